#include "climatekb/text.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include "climatekb/error.hpp"

namespace climatekb::text {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (is_ascii_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& length) {
  auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  unsigned char b0 = byte(pos);
  length = 1;
  if (b0 < 0x80) return b0;
  std::size_t need;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    return 0xFFFD;
  }
  if (pos + need >= s.size()) return 0xFFFD;
  for (std::size_t i = 1; i <= need; ++i) {
    unsigned char b = byte(pos + i);
    if ((b & 0xC0) != 0x80) return 0xFFFD;
    cp = (cp << 6) | (b & 0x3F);
  }
  length = need + 1;
  return cp;
}

std::size_t count_code_points(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len;
    decode_utf8(s, i, len);
    i += len;
    ++n;
  }
  return n;
}

std::size_t byte_offset(std::string_view s, std::size_t cp_index) {
  std::size_t i = 0;
  for (std::size_t n = 0; n < cp_index; ++n) {
    if (i >= s.size()) {
      throw ValidationError("character offset " + std::to_string(cp_index) +
                            " is past the end of the text");
    }
    std::size_t len;
    decode_utf8(s, i, len);
    i += len;
  }
  return i;
}

namespace {

bool is_ascii_alnum(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

// Non-ASCII code points that behave like punctuation or spaces.
bool is_unicode_separator(char32_t c) {
  return (c >= 0x00A0 && c <= 0x00BF) || c == 0x00D7 || c == 0x00F7 ||
         (c >= 0x2000 && c <= 0x206F) || (c >= 0x3000 && c <= 0x303F) ||
         c == 0xFEFF || c == 0xFFFD;
}

bool is_word_char(char32_t c) {
  if (c < 0x80) return is_ascii_alnum(c);
  return !is_unicode_separator(c);
}

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len;
    char32_t c = decode_utf8(s, i, len);
    if (!is_word_char(c)) {
      i += len;
      continue;
    }
    Token tok;
    tok.byte_begin = i;
    while (i < s.size()) {
      c = decode_utf8(s, i, len);
      if (is_word_char(c)) {
        tok.lower.append(s.substr(i, len));
        i += len;
        continue;
      }
      if (is_apostrophe(c) && i + len < s.size()) {
        std::size_t next_len;
        char32_t next = decode_utf8(s, i + len, next_len);
        if (is_word_char(next)) {
          tok.lower.push_back('\'');
          i += len;
          continue;
        }
      }
      break;
    }
    tok.byte_end = i;
    tok.lower = to_lower(tok.lower);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace climatekb::text
