#pragma once

// Brute-force reference implementations. They scan records directly and
// share no code with the inverted index or the view builders.

#include <cstdint>
#include <functional>
#include <optional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "facetview/augment.hpp"
#include "facetview/facet_index.hpp"
#include "facetview/geo_tree.hpp"
#include "facetview/schema.hpp"
#include "facetview/views.hpp"

namespace oracle {

using namespace facetview;

struct GeoBinding {
    const GeoTree* tree = nullptr;
    const Gazetteer* gazetteer = nullptr;
};

/// Per-record keys and tokens, computed once per snapshot by scanning.
class Scan {
public:
    Scan(const DatasetSnapshot& snapshot, std::map<std::string, GeoBinding> geo = {});

    const DatasetSnapshot& snapshot() const { return snapshot_; }
    /// Keys record `doc` is filed under for `field`, special keys included.
    const std::set<std::string>& keys(std::size_t doc, const std::string& field) const;
    bool is_geo(const std::string& field) const { return geo_.count(field) > 0; }
    const GeoBinding& geo_binding(const std::string& field) const { return geo_.at(field); }

    /// Record ordinals matching `state`, ascending.
    std::vector<std::size_t> filter(const FilterState& state) const;
    /// key -> count over `docs`; every known key listed, special keys only when > 0.
    std::map<std::string, std::size_t> counts(const std::vector<std::size_t>& docs, const std::string& field) const;
    /// Same, in count-desc / key-asc order.
    std::vector<std::pair<std::string, std::size_t>> ordered(const std::vector<std::size_t>& docs,
                                                             const std::string& field) const;

    std::map<int, std::size_t> years(const std::vector<std::size_t>& docs, const std::string& field) const;
    std::size_t undated(const std::vector<std::size_t>& docs, const std::string& field) const;

    /// Canonical key a selection refers to.
    std::string canonical(const std::string& field, const std::string& selection) const;

private:
    struct Resolved {
        std::map<std::string, std::set<std::string>> selections;
        std::vector<std::string> words;
    };
    bool matches(std::size_t doc, const Resolved& query) const;
    void number_keys();

    const DatasetSnapshot& snapshot_;
    std::map<std::string, GeoBinding> geo_;
    std::map<std::string, std::vector<std::set<std::string>>> keys_;
    std::map<std::string, std::set<std::string>> universe_;  // every ordinary key per field
    std::vector<std::set<std::string>> tokens_;
    std::map<std::string, std::vector<std::string>> names_;                  // sorted keys per field
    std::map<std::string, std::vector<std::vector<std::size_t>>> key_ids_;  // per doc, into names_
    mutable std::map<std::string, std::vector<std::size_t>> memo_;  // filter results by state
};

/// Whole-word tokens: ASCII letters/digits and bytes >= 0x80 form words,
/// ASCII letters are lower-cased.
std::vector<std::string> words(const std::string& s);

/// Largest remainder over 1000 tenths, ties to the lower index.
std::vector<std::int64_t> tenths(const std::vector<std::size_t>& counts);

/// Expected ViewResult buckets (key, count, percent / weight) for one view.
std::vector<ViewBucket> view_buckets(const Scan& scan, const ViewConfig& view, const FilterState& state);
/// Expected geo tree counts (state without the geo field's selections).
std::vector<GeoCount> geo_counts(const Scan& scan, const std::string& field, const FilterState& state);
/// Expected table record ids for a page.
std::vector<std::string> table_ids(const Scan& scan, const FilterState& state, std::size_t offset, std::size_t limit);

}  // namespace oracle
