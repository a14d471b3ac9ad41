#ifndef STANCE_UTF8_H_
#define STANCE_UTF8_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace stance {
namespace utf8 {

// Decodes one scalar starting at `pos` and advances `pos`. Malformed
// sequences decode to U+FFFD and consume a single byte.
char32_t Next(std::string_view text, std::size_t* pos);

std::u32string Decode(std::string_view text);
std::string Encode(char32_t cp);
std::string Encode(std::u32string_view text);

// Number of Unicode scalars.
std::size_t Length(std::string_view text);

// Byte offset of the `n`-th scalar (or text.size() when n >= Length).
std::size_t ByteOffsetOfChar(std::string_view text, std::size_t n);

// Splits into single-scalar substrings.
std::vector<std::string_view> Chars(std::string_view text);

bool StartsWith(std::string_view text, std::string_view prefix);

}  // namespace utf8
}  // namespace stance

#endif  // STANCE_UTF8_H_
