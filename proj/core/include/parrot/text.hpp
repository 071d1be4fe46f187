#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace parrot::text {

/// Throws ValidationError if `s` is not well-formed UTF-8.
void require_utf8(std::string_view s, std::string_view what);

bool is_valid_utf8(std::string_view s);

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view codepoints);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t length(std::string_view utf8);

/// Canonical composition (NFC).
std::string nfc(std::string_view utf8);

std::string_view trim_right(std::string_view s);
std::string_view trim(std::string_view s);

/// Whitespace as Python's str.isspace() defines it; used by the BLEU tokenizers.
bool is_space(char32_t c);

std::string ascii_lower(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);
bool iequals(std::string_view a, std::string_view b);

}  // namespace parrot::text
