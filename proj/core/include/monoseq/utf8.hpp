#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace monoseq {

/// A symbol sequence: one element per unicode scalar value.
using Symbols = std::u32string;

namespace utf8 {

/// Decodes UTF-8 into scalar values. Returns std::nullopt on any malformed
/// sequence (overlongs, surrogates, truncation, values above U+10FFFF).
std::optional<Symbols> decode(std::string_view bytes);

std::string encode(std::u32string_view symbols);
std::string encode(char32_t symbol);

}  // namespace utf8
}  // namespace monoseq
