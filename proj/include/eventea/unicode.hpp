#pragma once

#include <string>
#include <string_view>

namespace eventea::unicode {

/// Decodes UTF-8 into Unicode scalar values. Ill-formed sequences become U+FFFD.
std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);

/// Canonical composition (NFC).
std::string nfc(std::string_view utf8);

/// Full Unicode lowercase mapping, locale-independent.
std::string lowercase(std::string_view utf8);

/// NFC, optionally lowercased, decoded to scalar values. Every string
/// similarity in this project is computed on the result of this function.
std::u32string prepare(std::string_view utf8, bool lower = true);

bool is_alnum(char32_t c);
bool is_digit(char32_t c);
bool is_space(char32_t c);

}  // namespace eventea::unicode
