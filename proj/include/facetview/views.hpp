#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facetview/facet_index.hpp"

namespace facetview {

enum class ViewKind { Pie, Timeline, Geo, TopK, TagCloud, Table, WeightedHist };
enum class WidgetKind { SearchBox, FilterList, TagCloud, Logo };

std::string_view to_string(ViewKind kind) noexcept;
std::optional<ViewKind> parse_view_kind(std::string_view name) noexcept;
std::string_view to_string(WidgetKind kind) noexcept;
std::optional<WidgetKind> parse_widget_kind(std::string_view name) noexcept;

struct Widget {
    WidgetKind kind = WidgetKind::SearchBox;
    std::string field;  // FilterList, TagCloud
    std::string url;    // Logo

    friend bool operator==(const Widget&, const Widget&) = default;
};

inline constexpr std::size_t kMaxPageSize = 500;

/// A named visualization over exactly one dataset.
struct ViewConfig {
    std::string view_id;
    ViewKind kind = ViewKind::Pie;
    std::string dataset_id;
    std::string label;
    std::string facet_field;  // Timeline: the date field
    std::size_t k = 5;
    std::string weight_field;
    std::vector<std::string> columns;  // Table; empty = every enabled field
    std::vector<Widget> widgets;

    friend bool operator==(const ViewConfig&, const ViewConfig&) = default;
};

/// Checks the config against the dataset's current schema. Throws
/// UnknownField, TypeConflict, or InvalidArgument.
void validate_view(const ViewConfig& config, const DatasetSnapshot& snapshot);

struct ViewBucket {
    std::string key;
    std::string label;
    std::size_t count = 0;
    std::optional<std::int64_t> percent_tenths;  // Pie only: 558 means 55.8%
    std::optional<double> weight;                // TagCloud (0,1], WeightedHist sums

    friend bool operator==(const ViewBucket&, const ViewBucket&) = default;
};

struct GeoCount {
    std::string name;
    GeoLevel level = GeoLevel::Region;
    std::size_t count = 0;
    std::vector<GeoCount> children;

    friend bool operator==(const GeoCount&, const GeoCount&) = default;
};

struct TableRow {
    std::string record_id;
    std::vector<Value> cells;

    friend bool operator==(const TableRow&, const TableRow&) = default;
};

struct ViewResult {
    ViewKind kind = ViewKind::Pie;
    std::string field;
    std::vector<ViewBucket> buckets;
    std::vector<GeoCount> geo;  // Geo: region roots
    std::vector<std::string> columns;
    std::vector<TableRow> rows;
    /// Records under the state the view aggregates (for Geo, the state
    /// without the geography field's own selections).
    std::size_t total = 0;
    std::size_t occurrences = 0;      // Pie: sum of bucket counts, the percentage base
    std::size_t missing_weights = 0;  // WeightedHist: records counted with weight 0
    std::size_t offset = 0;
    std::size_t limit = 0;
    std::string dataset_id;
    std::uint64_t dataset_version = 0;
    FilterState state;

    friend bool operator==(const ViewResult&, const ViewResult&) = default;
};

/// Largest-remainder apportionment of 1000 tenths-of-a-percent; ties go to
/// the earlier entry. Sums to exactly 1000 when any count is non-zero.
std::vector<std::int64_t> apportion_tenths(const std::vector<std::size_t>& counts);

ViewResult pie_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                    const std::string& field);
ViewResult timeline_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                         const std::string& date_field);
/// `field` must be bound to a geography tree in `index`.
ViewResult geo_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                    const std::string& field);
ViewResult top_k_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                      const std::string& field, std::size_t k);
ViewResult tag_cloud_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                          const std::string& field);
ViewResult weighted_hist_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                              const std::string& field, const std::string& weight_field);
ViewResult table_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                      const std::vector<std::string>& columns, std::size_t offset, std::size_t limit);

struct Page {
    std::size_t offset = 0;
    std::size_t limit = 50;
};

ViewResult render_view(const ViewConfig& config, const DatasetSnapshot& snapshot, const FacetIndex& index,
                       const FilterState& state, const Page& page = {});

}  // namespace facetview
