#pragma once

#include <map>
#include <string>
#include <string_view>

#include "facetview/facet_index.hpp"

namespace facetview {

/// Query-string form of a FilterState: repeated `f.<field>=<key>` pairs
/// (fields then keys in byte order) followed by `q=<text>`. Everything is
/// percent-encoded, so the output is stable and safe to bookmark.
std::string encode_filter_state(const FilterState& state);

/// Inverse of encode_filter_state. Accepts an optional leading '?', '+' as
/// space, and ignores parameters that are not `f.*` or `q`.
FilterState decode_filter_state(std::string_view query);

/// Same, from already-decoded parameters (as a web framework hands them over).
FilterState decode_filter_params(const std::multimap<std::string, std::string>& params);

/// Splits a raw query string into decoded (name, value) pairs.
std::multimap<std::string, std::string> parse_query_string(std::string_view query);

}  // namespace facetview
