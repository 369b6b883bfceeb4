#include "facetview/views.hpp"

#include <algorithm>
#include <numeric>

#include "facetview/text.hpp"

namespace facetview {

std::string_view to_string(ViewKind kind) noexcept
{
    switch (kind) {
    case ViewKind::Pie: return "pie";
    case ViewKind::Timeline: return "timeline";
    case ViewKind::Geo: return "geo";
    case ViewKind::TopK: return "top_k";
    case ViewKind::TagCloud: return "tag_cloud";
    case ViewKind::Table: return "table";
    case ViewKind::WeightedHist: return "weighted_hist";
    }
    return "pie";
}

std::optional<ViewKind> parse_view_kind(std::string_view name) noexcept
{
    const std::string n = text::fold_case(name);
    if (n == "pie") return ViewKind::Pie;
    if (n == "timeline") return ViewKind::Timeline;
    if (n == "geo" || n == "map") return ViewKind::Geo;
    if (n == "top_k" || n == "topk" || n == "list") return ViewKind::TopK;
    if (n == "tag_cloud" || n == "tagcloud") return ViewKind::TagCloud;
    if (n == "table") return ViewKind::Table;
    if (n == "weighted_hist" || n == "weighted") return ViewKind::WeightedHist;
    return std::nullopt;
}

std::string_view to_string(WidgetKind kind) noexcept
{
    switch (kind) {
    case WidgetKind::SearchBox: return "search_box";
    case WidgetKind::FilterList: return "filter_list";
    case WidgetKind::TagCloud: return "tag_cloud";
    case WidgetKind::Logo: return "logo";
    }
    return "search_box";
}

std::optional<WidgetKind> parse_widget_kind(std::string_view name) noexcept
{
    const std::string n = text::fold_case(name);
    if (n == "search_box" || n == "search") return WidgetKind::SearchBox;
    if (n == "filter_list" || n == "list") return WidgetKind::FilterList;
    if (n == "tag_cloud" || n == "tagcloud") return WidgetKind::TagCloud;
    if (n == "logo") return WidgetKind::Logo;
    return std::nullopt;
}

namespace {

const FieldSpec& enabled_field(const DatasetSnapshot& snapshot, const std::string& name)
{
    const auto* f = snapshot.field(name);
    if (!f || !f->enabled) throw Error(ErrorCode::UnknownField, "no enabled field '" + name + "'", name);
    return *f;
}

ViewResult start(ViewKind kind, const std::string& field, const FacetIndex& index, const FilterState& state)
{
    ViewResult r;
    r.kind = kind;
    r.field = field;
    r.dataset_id = index.dataset_id();
    r.dataset_version = index.version();
    r.state = state;
    return r;
}

bool is_special(const std::string& key)
{
    return key == kNoValue || key == kUnlocated;
}

/// Non-zero ordinary buckets, in facet order.
std::vector<FacetBucket> visible_buckets(const FieldIndex& fi, const DocSet& docs)
{
    auto counts = counts_over(fi, docs).buckets;
    std::erase_if(counts, [](const FacetBucket& b) { return b.count == 0 || is_special(b.key); });
    return counts;
}

GeoCount geo_node_count(const FieldIndex& fi, std::size_t id, const DocSet& docs)
{
    const GeoNode& node = fi.geo->node(id);
    GeoCount out{node.name, node.level, fi.buckets.at(node.name).intersect_count(docs), {}};
    for (auto child : node.children) out.children.push_back(geo_node_count(fi, child, docs));
    return out;
}

}  // namespace

void validate_view(const ViewConfig& config, const DatasetSnapshot& snapshot)
{
    if (config.dataset_id != snapshot.dataset_id)
        throw Error(ErrorCode::MismatchedDataset, "view belongs to dataset '" + config.dataset_id + "'");
    switch (config.kind) {
    case ViewKind::Pie:
    case ViewKind::TopK:
    case ViewKind::TagCloud:
    case ViewKind::Geo:
        enabled_field(snapshot, config.facet_field);
        break;
    case ViewKind::Timeline: {
        const auto& f = enabled_field(snapshot, config.facet_field);
        if (f.type != FieldType::DateTime)
            throw Error(ErrorCode::TypeConflict, "timeline needs a datetime field; '" + f.name + "' is " +
                                                     std::string(to_string(f.type)),
                        f.name);
        break;
    }
    case ViewKind::WeightedHist: {
        enabled_field(snapshot, config.facet_field);
        const auto* w = snapshot.field(config.weight_field);
        if (!w) throw Error(ErrorCode::UnknownField, "no field '" + config.weight_field + "'", config.weight_field);
        if (w->type != FieldType::Number)
            throw Error(ErrorCode::TypeConflict, "weight field '" + w->name + "' must be a number", w->name);
        break;
    }
    case ViewKind::Table:
        for (const auto& c : config.columns) enabled_field(snapshot, c);
        break;
    }
    if (config.kind == ViewKind::TopK && config.k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    for (const auto& w : config.widgets) {
        if (w.kind == WidgetKind::FilterList || w.kind == WidgetKind::TagCloud) enabled_field(snapshot, w.field);
        if (w.kind == WidgetKind::Logo && !is_absolute_url(w.url))
            throw Error(ErrorCode::InvalidArgument, "logo widget needs an absolute URL", "url");
    }
}

std::vector<std::int64_t> apportion_tenths(const std::vector<std::size_t>& counts)
{
    std::vector<std::int64_t> out(counts.size(), 0);
    const auto base = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    if (base == 0) return out;
    std::vector<std::uint64_t> remainder(counts.size());
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const std::uint64_t quota = static_cast<std::uint64_t>(counts[i]) * 1000;
        out[i] = static_cast<std::int64_t>(quota / base);
        remainder[i] = quota % base;
        assigned += out[i];
    }
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::int64_t left = 1000 - assigned, i = 0; left > 0; --left, ++i) ++out[order[static_cast<std::size_t>(i)]];
    return out;
}

ViewResult pie_view(const DatasetSnapshot&, const FacetIndex& index, const FilterState& state,
                    const std::string& field)
{
    const FieldIndex& fi = index.require(field);
    const DocSet docs = filtered_ids(index, state);
    ViewResult r = start(ViewKind::Pie, field, index, state);
    r.total = docs.count();

    auto counts = counts_over(fi, docs).buckets;
    std::erase_if(counts, [](const FacetBucket& b) { return b.count == 0; });
    std::vector<std::size_t> raw;
    for (const auto& b : counts) raw.push_back(b.count);
    const auto tenths = apportion_tenths(raw);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        r.occurrences += counts[i].count;
        r.buckets.push_back({counts[i].key, counts[i].label, counts[i].count, tenths[i], std::nullopt});
    }
    return r;
}

ViewResult timeline_view(const DatasetSnapshot&, const FacetIndex& index, const FilterState& state,
                         const std::string& date_field)
{
    const FieldIndex& fi = index.require(date_field);
    if (fi.spec.type != FieldType::DateTime)
        throw Error(ErrorCode::TypeConflict, "timeline needs a datetime field; '" + date_field + "' is " +
                                                 std::string(to_string(fi.spec.type)),
                    date_field);
    const DocSet docs = filtered_ids(index, state);
    ViewResult r = start(ViewKind::Timeline, date_field, index, state);
    r.total = docs.count();

    std::map<int, std::size_t> per_year;
    for (const auto& [year, set] : fi.years)
        if (const auto c = set.intersect_count(docs)) per_year.emplace(year, c);
    if (!per_year.empty()) {
        for (int y = per_year.begin()->first; y <= per_year.rbegin()->first; ++y) {
            const auto it = per_year.find(y);
            const std::string label = std::to_string(y);
            r.buckets.push_back({label, label, it == per_year.end() ? 0 : it->second, std::nullopt, std::nullopt});
        }
    }
    if (const auto undated = fi.undated.intersect_count(docs))
        r.buckets.push_back({std::string(kUndated), std::string(kUndated), undated, std::nullopt, std::nullopt});
    return r;
}

ViewResult geo_view(const DatasetSnapshot&, const FacetIndex& index, const FilterState& state,
                    const std::string& field)
{
    const FieldIndex& fi = index.require(field);
    if (!fi.geo) throw Error(ErrorCode::TypeConflict, "field '" + field + "' is not bound to a geography tree", field);
    const DocSet docs = filtered_ids(index, state.without(field));
    ViewResult r = start(ViewKind::Geo, field, index, state);
    r.total = docs.count();
    for (auto root : fi.geo->roots()) r.geo.push_back(geo_node_count(fi, root, docs));
    if (const auto c = fi.unlocated.intersect_count(docs))
        r.buckets.push_back({std::string(kUnlocated), std::string(kUnlocated), c, std::nullopt, std::nullopt});
    if (const auto c = fi.no_value.intersect_count(docs))
        r.buckets.push_back({std::string(kNoValue), std::string(kNoValue), c, std::nullopt, std::nullopt});
    return r;
}

ViewResult top_k_view(const DatasetSnapshot&, const FacetIndex& index, const FilterState& state,
                      const std::string& field, std::size_t k)
{
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    const FieldIndex& fi = index.require(field);
    const DocSet docs = filtered_ids(index, state);
    ViewResult r = start(ViewKind::TopK, field, index, state);
    r.total = docs.count();
    auto counts = visible_buckets(fi, docs);
    if (counts.size() > k) counts.resize(k);
    for (const auto& b : counts) r.buckets.push_back({b.key, b.label, b.count, std::nullopt, std::nullopt});
    return r;
}

ViewResult tag_cloud_view(const DatasetSnapshot&, const FacetIndex& index, const FilterState& state,
                          const std::string& field)
{
    const FieldIndex& fi = index.require(field);
    const DocSet docs = filtered_ids(index, state);
    ViewResult r = start(ViewKind::TagCloud, field, index, state);
    r.total = docs.count();
    const auto counts = visible_buckets(fi, docs);
    std::size_t max = 0;
    for (const auto& b : counts) max = std::max(max, b.count);
    for (const auto& b : counts)
        r.buckets.push_back({b.key, b.label, b.count, std::nullopt,
                             static_cast<double>(b.count) / static_cast<double>(max)});
    return r;
}

ViewResult weighted_hist_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                              const std::string& field, const std::string& weight_field)
{
    const FieldIndex& fi = index.require(field);
    const auto* wspec = snapshot.field(weight_field);
    if (!wspec) throw Error(ErrorCode::UnknownField, "no field '" + weight_field + "'", weight_field);
    if (wspec->type != FieldType::Number)
        throw Error(ErrorCode::TypeConflict, "weight field '" + weight_field + "' must be a number", weight_field);

    const DocSet docs = filtered_ids(index, state);
    ViewResult r = start(ViewKind::WeightedHist, field, index, state);
    r.total = docs.count();

    std::vector<double> weight(snapshot.records.size(), 0.0);
    for (auto doc : docs.members()) {
        if (const auto* d = snapshot.records[doc].get(weight_field).get_if<Decimal>())
            weight[doc] = d->to_double();
        else
            ++r.missing_weights;
    }

    for (const auto& b : counts_over(fi, docs).buckets) {
        if (b.count == 0) continue;
        const DocSet* set = fi.lookup(b.key);
        double sum = 0.0;
        for (auto doc : (*set & docs).members()) sum += weight[doc];
        r.buckets.push_back({b.key, b.label, b.count, std::nullopt, sum});
    }
    std::stable_sort(r.buckets.begin(), r.buckets.end(), [](const ViewBucket& a, const ViewBucket& b) {
        if (*a.weight != *b.weight) return *a.weight > *b.weight;
        return a.key < b.key;
    });
    return r;
}

ViewResult table_view(const DatasetSnapshot& snapshot, const FacetIndex& index, const FilterState& state,
                      const std::vector<std::string>& columns, std::size_t offset, std::size_t limit)
{
    if (limit == 0 || limit > kMaxPageSize)
        throw Error(ErrorCode::InvalidArgument, "limit must be between 1 and " + std::to_string(kMaxPageSize), "limit");
    std::vector<std::string> cols = columns;
    if (cols.empty())
        for (const auto& f : snapshot.schema)
            if (f.enabled) cols.push_back(f.name);
    for (const auto& c : cols) enabled_field(snapshot, c);

    const DocSet docs = filtered_ids(index, state);
    ViewResult r = start(ViewKind::Table, {}, index, state);
    r.total = docs.count();
    r.columns = cols;
    r.offset = offset;
    r.limit = limit;

    auto members = docs.members();
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return snapshot.records[a].id() < snapshot.records[b].id();
    });
    for (std::size_t i = offset; i < members.size() && i < offset + limit; ++i) {
        const Record& rec = snapshot.records[members[i]];
        TableRow row{rec.id(), {}};
        for (const auto& c : cols) row.cells.push_back(rec.get(c));
        r.rows.push_back(std::move(row));
    }
    return r;
}

ViewResult render_view(const ViewConfig& config, const DatasetSnapshot& snapshot, const FacetIndex& index,
                       const FilterState& state, const Page& page)
{
    switch (config.kind) {
    case ViewKind::Pie: return pie_view(snapshot, index, state, config.facet_field);
    case ViewKind::Timeline: return timeline_view(snapshot, index, state, config.facet_field);
    case ViewKind::Geo: return geo_view(snapshot, index, state, config.facet_field);
    case ViewKind::TopK: return top_k_view(snapshot, index, state, config.facet_field, config.k);
    case ViewKind::TagCloud: return tag_cloud_view(snapshot, index, state, config.facet_field);
    case ViewKind::WeightedHist:
        return weighted_hist_view(snapshot, index, state, config.facet_field, config.weight_field);
    case ViewKind::Table: return table_view(snapshot, index, state, config.columns, page.offset, page.limit);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown view kind");
}

}  // namespace facetview
