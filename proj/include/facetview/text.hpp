#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace facetview::text {

bool is_valid_utf8(std::string_view bytes) noexcept;

/// Drops a leading UTF-8 byte-order mark, if present.
std::string_view strip_bom(std::string_view bytes) noexcept;

std::string_view trim(std::string_view s) noexcept;
bool is_blank(std::string_view s) noexcept;

/// ASCII-only lowercasing; bytes outside ASCII pass through unchanged.
std::string fold_case(std::string_view s);

/// Lowercases, trims and collapses internal whitespace runs to one space.
/// Used for gazetteer and geography alias lookups.
std::string normalize_name(std::string_view s);

/// Splits on anything that is not an ASCII letter/digit. Bytes >= 0x80 are
/// treated as word characters so multi-byte UTF-8 words stay whole. Tokens
/// are case-folded.
std::vector<std::string> tokenize(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

}  // namespace facetview::text
