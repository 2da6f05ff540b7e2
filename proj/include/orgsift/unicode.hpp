#pragma once

#include <string>
#include <string_view>

namespace orgsift {

// UTF-8 decoding to unicode scalar values. Invalid byte sequences decode to
// U+FFFD so arbitrary corpus bytes never throw.
std::u32string utf8_decode(std::string_view utf8);
std::string utf8_encode(std::u32string_view text);

// Simple one-to-one case folding covering ASCII and the Latin-1 supplement.
// Code points outside that range pass through unchanged; no normalization.
char32_t fold_char(char32_t c);
std::u32string fold(std::u32string_view text);
std::string fold_utf8(std::string_view utf8);

// ASCII-only lowercase of a byte string (multi-byte sequences untouched).
std::string ascii_lower(std::string_view s);

}  // namespace orgsift
