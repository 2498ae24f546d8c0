#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Byte/character helpers shared by every stage. All case folding is ASCII
// only; non-ASCII code points pass through unchanged.
namespace climatekb::text {

bool is_space(char c);
bool is_ascii_upper(char c);
std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Decodes the code point starting at byte `pos`; `length` receives its byte
// length. Invalid sequences decode as U+FFFD with length 1.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& length);

std::size_t count_code_points(std::string_view s);

// Byte offset of the code point with index `cp_index`; cp_index may equal the
// code point count (one past the end).
std::size_t byte_offset(std::string_view s, std::size_t cp_index);

// Lowercased word token with its byte span in the source string.
struct Token {
  std::string lower;
  std::size_t byte_begin = 0;
  std::size_t byte_end = 0;
};

// Splits on whitespace and punctuation. Letters, digits and non-ASCII letters
// form words; an apostrophe between word characters stays inside the word
// (typographic apostrophes are folded to '). Hyphens separate words.
std::vector<Token> tokenize(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view data);

}  // namespace climatekb::text
