#pragma once

#include <string>
#include <utility>
#include <vector>

#include "facetview/schema.hpp"

namespace fixtures {

/// Language distribution of the records mentioning Khrushchev, largest first.
/// Sums to 1000.
const std::vector<std::pair<std::string, std::size_t>>& khrushchev_languages();

/// CSV with columns Title, Language, Subjects, Translation Needed: the 1000
/// Khrushchev records (the name spelled in varying case, sometimes only in
/// Subjects) interleaved with 300 records that do not mention him.
std::string khrushchev_csv();

/// Archive collections: 30 on women's suffrage totalling 10 linear feet and
/// 2 on gender studies totalling 100.
facetview::DatasetSnapshot archives_snapshot();

}  // namespace fixtures
