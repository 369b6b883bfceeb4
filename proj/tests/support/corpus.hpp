#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "facetview/facet_index.hpp"
#include "facetview/geo_tree.hpp"
#include "oracle.hpp"

namespace corpus {

using namespace facetview;

/// Small fixed geography used by the random corpora.
std::shared_ptr<const GeoTree> geo_tree();

/// A random snapshot with six fields: Language (text), Subjects (list, up
/// to 20% of records multi-valued), Kind (case-folded text), Place (text
/// bound to geo_tree()), Date (datetime), Weight (number). Value
/// vocabularies of at most 8 per field, random missing values.
struct Corpus {
    DatasetSnapshot snapshot;
    std::shared_ptr<const GeoTree> tree;
    IndexOptions index_options() const;
    std::map<std::string, oracle::GeoBinding> bindings() const;
    std::vector<std::string> facet_fields() const;
};

Corpus random_corpus(std::mt19937_64& rng, std::size_t max_records = 2000, std::size_t min_records = 1);

/// Random selections on 0-3 fields (existing keys in any spelling, special
/// keys, unknown keys) plus an optional text query.
FilterState random_state(std::mt19937_64& rng, const Corpus& c);

/// A state selecting 1-2 geography nodes only.
FilterState random_geo_state(std::mt19937_64& rng, const Corpus& c);

}  // namespace corpus
