#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "facetview/augment.hpp"
#include "facetview/geo_tree.hpp"
#include "facetview/schema.hpp"

namespace facetview {

inline constexpr std::string_view kNoValue = "(no value)";
inline constexpr std::string_view kUnlocated = "(unlocated)";
inline constexpr std::string_view kUndated = "(undated)";

/// Set of record ordinals (positions in the snapshot) over a fixed universe.
class DocSet {
public:
    DocSet() = default;
    explicit DocSet(std::size_t universe, bool full = false);

    std::size_t universe() const noexcept { return universe_; }
    void insert(std::size_t doc);
    bool contains(std::size_t doc) const noexcept;
    std::size_t count() const noexcept;
    bool empty() const noexcept { return count() == 0; }
    std::size_t intersect_count(const DocSet& other) const noexcept;
    std::vector<std::size_t> members() const;

    DocSet& operator&=(const DocSet& other);
    DocSet& operator|=(const DocSet& other);
    friend DocSet operator&(DocSet a, const DocSet& b) { return a &= b; }
    friend DocSet operator|(DocSet a, const DocSet& b) { return a |= b; }
    friend bool operator==(const DocSet&, const DocSet&) = default;

private:
    std::size_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

/// The active query. Selections within one facet are OR-ed, facets are
/// AND-ed, and every token of `text_query` must occur.
struct FilterState {
    std::map<std::string, std::set<std::string>> selections;
    std::optional<std::string> text_query;

    bool empty() const noexcept { return selections.empty() && !text_query; }
    /// Drops empty selection sets and an empty text query.
    FilterState normalized() const;
    FilterState without(const std::string& field) const;
    FilterState toggled(const std::string& field, const std::string& key) const;

    friend bool operator==(const FilterState&, const FilterState&) = default;
};

struct FieldIndex {
    FieldSpec spec;
    std::map<std::string, DocSet> buckets;
    std::map<std::string, std::string> labels;  // key -> display label
    DocSet no_value;
    DocSet unlocated;                    // geography-bound fields only
    std::shared_ptr<const GeoTree> geo;  // set: buckets are geography nodes
    std::map<int, DocSet> years;         // DateTime fields
    DocSet undated;                      // DateTime fields

    /// A record can sit in several buckets (lists, geography).
    bool overlapping() const noexcept { return spec.multivalued || spec.type == FieldType::List || geo != nullptr; }
    /// Key a raw value or selection is filed under (case-folded, or the
    /// geography node it names).
    std::string key_for(std::string_view raw) const;
    /// Docs for a selection key, including the special buckets; nullptr if unknown.
    const DocSet* lookup(std::string_view key) const;
    std::string label_for(const std::string& key) const;
};

struct IndexOptions {
    /// Fields whose values are resolved against a geography tree.
    std::map<std::string, std::shared_ptr<const GeoTree>> geo_fields;
    /// Lets geocoded coordinates resolve to geography nodes by alias.
    std::shared_ptr<const Gazetteer> gazetteer;
};

/// Immutable inverted index over a snapshot's enabled fields.
class FacetIndex {
public:
    std::size_t size() const noexcept { return record_ids_.size(); }
    const std::vector<std::string>& record_ids() const noexcept { return record_ids_; }
    DocSet all() const { return DocSet(size(), true); }

    const FieldIndex* field(std::string_view name) const;
    /// Throws UnknownFacetField.
    const FieldIndex& require(std::string_view name) const;
    const std::map<std::string, FieldIndex, std::less<>>& fields() const noexcept { return fields_; }

    const DocSet* token(std::string_view folded) const;
    const std::string& dataset_id() const noexcept { return dataset_id_; }
    std::uint64_t version() const noexcept { return version_; }

    friend FacetIndex build_index(const DatasetSnapshot& snapshot, const IndexOptions& options);

private:
    std::string dataset_id_;
    std::uint64_t version_ = 0;
    std::vector<std::string> record_ids_;
    std::map<std::string, FieldIndex, std::less<>> fields_;
    std::map<std::string, DocSet, std::less<>> tokens_;
};

FacetIndex build_index(const DatasetSnapshot& snapshot, const IndexOptions& options = {});

struct FacetBucket {
    std::string key;
    std::string label;
    std::size_t count = 0;

    friend bool operator==(const FacetBucket&, const FacetBucket&) = default;
};

struct FacetCounts {
    std::string field;
    /// count descending, then key ascending (byte order)
    std::vector<FacetBucket> buckets;

    friend bool operator==(const FacetCounts&, const FacetCounts&) = default;
};

/// Throws UnknownFacetField for selections on fields that are not indexed.
DocSet filtered_ids(const FacetIndex& index, const FilterState& state);

/// Counts under `state` with `field`'s own selections removed. Every known
/// bucket is listed (zero counts included); "(no value)" / "(unlocated)"
/// only when non-zero.
FacetCounts facet_counts(const FacetIndex& index, const FilterState& state, const std::string& field);

/// Bucket counts of `field` restricted to `docs`, ordered as facet_counts.
FacetCounts counts_over(const FieldIndex& field, const DocSet& docs);

/// Size of the result if `key` were toggled in `field`'s selection.
std::size_t zero_result_guard(const FacetIndex& index, const FilterState& state, const std::string& field,
                              const std::string& key);

}  // namespace facetview
