#include "facetview/serialize.hpp"

namespace facetview {

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& locator = {})
{
    throw Error(ErrorCode::InvalidArgument, what, locator);
}

const Json& member(const Json& j, const char* key)
{
    if (!j.is_object()) bad("expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) bad(std::string("missing member '") + key + "'", key);
    return *it;
}

std::string string_member(const Json& j, const char* key)
{
    const Json& v = member(j, key);
    if (!v.is_string()) bad(std::string("member '") + key + "' must be a string", key);
    return v.get<std::string>();
}

std::string optional_string(const Json& j, const char* key, std::string fallback = {})
{
    if (!j.is_object()) return fallback;
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_string()) bad(std::string("member '") + key + "' must be a string", key);
    return it->get<std::string>();
}

std::vector<std::string> string_list(const Json& v, const char* key)
{
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) bad(std::string("member '") + key + "' must be a list of strings", key);
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) bad(std::string("member '") + key + "' must be a list of strings", key);
        out.push_back(e.get<std::string>());
    }
    return out;
}

bool optional_bool(const Json& j, const char* key, bool fallback)
{
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (!it->is_boolean()) bad(std::string("member '") + key + "' must be a boolean", key);
    return it->get<bool>();
}

}  // namespace

Json parse_json(std::string_view text)
{
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::MalformedDocument, std::string("invalid JSON: ") + e.what(),
                    "byte " + std::to_string(e.byte));
    }
}

// ---------------------------------------------------------------- values

Json value_to_json(const Value& v)
{
    struct Visitor {
        Json operator()(std::monostate) const { return nullptr; }
        Json operator()(const TextValue& t) const { return t.text; }
        Json operator()(const Decimal& d) const { return Json{{"number", d.canonical()}}; }
        Json operator()(const DateTime& d) const { return Json{{"datetime", d.iso()}}; }
        Json operator()(const GeoPoint& p) const { return Json{{"location", p.text()}}; }
        Json operator()(const UrlValue& u) const { return Json{{"url", u.url}}; }
        Json operator()(const ListValue& l) const { return Json(l.items); }
    };
    return std::visit(Visitor{}, v.storage());
}

Value value_from_json(const Json& j)
{
    if (j.is_null()) return {};
    if (j.is_string()) return Value::text(j.get<std::string>());
    if (j.is_array()) return Value::list(string_list(j, "list"));
    if (j.is_object() && j.size() == 1) {
        const auto& [key, val] = *j.items().begin();
        if (!val.is_string()) bad("typed value must hold a string");
        const auto s = val.get<std::string>();
        if (key == "number") return coerce(s, FieldType::Number);
        if (key == "datetime") return coerce(s, FieldType::DateTime);
        if (key == "location") return coerce(s, FieldType::Location);
        if (key == "url") return Value(UrlValue{s});
    }
    bad("unrecognized stored value " + j.dump());
}

Json value_to_plain_json(const Value& v)
{
    if (v.is_missing()) return nullptr;
    if (const auto* l = v.get_if<ListValue>()) return Json(l->items);
    return v.display();
}

// ---------------------------------------------------------------- schema and snapshots

Json to_json(const FieldSpec& f)
{
    return Json{{"name", f.name},
                {"type", std::string(to_string(f.type))},
                {"enabled", f.enabled},
                {"multivalued", f.multivalued},
                {"fold_case", f.fold_case}};
}

FieldSpec field_spec_from_json(const Json& j)
{
    FieldSpec f;
    f.name = string_member(j, "name");
    const auto type = parse_field_type(optional_string(j, "type", "text"));
    if (!type) bad("unknown field type '" + optional_string(j, "type") + "'", "type");
    f.type = *type;
    f.enabled = optional_bool(j, "enabled", true);
    f.multivalued = optional_bool(j, "multivalued", f.type == FieldType::List);
    f.fold_case = optional_bool(j, "fold_case", false);
    return f;
}

Json to_json(const SourceDescriptor& s)
{
    Json opts = Json::object();
    for (const auto& [k, v] : s.options) opts[k] = v;
    return Json{{"kind", std::string(to_string(s.kind))}, {"location", s.location}, {"options", opts}};
}

SourceDescriptor source_from_json(const Json& j)
{
    SourceDescriptor s;
    const auto kind = parse_source_kind(optional_string(j, "kind", "none"));
    if (!kind) bad("unknown source kind", "kind");
    s.kind = *kind;
    s.location = optional_string(j, "location");
    if (const auto it = j.find("options"); it != j.end() && it->is_object())
        for (const auto& [k, v] : it->items())
            if (v.is_string()) s.options[k] = v.get<std::string>();
    return s;
}

Json to_json(const DatasetSnapshot& s)
{
    Json schema = Json::array();
    for (const auto& f : s.schema) schema.push_back(to_json(f));
    Json records = Json::array();
    for (const auto& r : s.records) {
        Json values = Json::object();
        for (const auto& f : s.schema) {
            const Value& v = r.get(f.name);
            if (!v.is_missing()) values[f.name] = value_to_json(v);
        }
        records.push_back(Json{{"id", r.id()}, {"values", std::move(values)}});
    }
    return Json{{"dataset_id", s.dataset_id},
                {"version", s.version},
                {"source", to_json(s.source)},
                {"schema", std::move(schema)},
                {"records", std::move(records)}};
}

DatasetSnapshot snapshot_from_json(const Json& j)
{
    DatasetSnapshot s;
    s.dataset_id = string_member(j, "dataset_id");
    const Json& version = member(j, "version");
    if (!version.is_number_unsigned() && !version.is_number_integer()) bad("version must be an integer", "version");
    s.version = version.get<std::uint64_t>();
    if (const auto it = j.find("source"); it != j.end()) s.source = source_from_json(*it);
    for (const auto& f : member(j, "schema")) s.schema.push_back(field_spec_from_json(f));
    for (const auto& r : member(j, "records")) {
        Record rec(string_member(r, "id"));
        if (const auto it = r.find("values"); it != r.end() && it->is_object())
            for (const auto& [k, v] : it->items()) rec.set(k, value_from_json(v));
        s.records.push_back(std::move(rec));
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------- reports

Json to_json(const ImportReport& r)
{
    Json warnings = Json::array();
    for (const auto& w : r.warnings) warnings.push_back(Json{{"locator", w.locator}, {"message", w.message}});
    return Json{{"rows_read", r.rows_read},
                {"records_created", r.records_created},
                {"rows_skipped", r.rows_skipped},
                {"warnings", std::move(warnings)}};
}

Json to_json(const ChangeSummary& c)
{
    return Json{{"added", c.added}, {"removed", c.removed}, {"modified", c.modified}};
}

Json to_json(const AugmentReport& r, const std::vector<AugmentationStep>& steps)
{
    Json warnings = Json::array();
    for (const auto& w : r.warnings)
        warnings.push_back(Json{{"step", w.step}, {"record_id", w.record_id}, {"message", w.message}});
    Json replacements = Json::array();
    for (const auto& [step, hits] : r.replacement_counts) {
        Json entries = Json::array();
        for (std::size_t i = 0; i < hits.size() && step < steps.size() && i < steps[step].mapping.size(); ++i)
            entries.push_back(Json{{"from", steps[step].mapping[i].first},
                                   {"to", steps[step].mapping[i].second},
                                   {"count", hits[i]}});
        replacements.push_back(Json{{"step", step}, {"counts", std::move(entries)}});
    }
    return Json{{"warnings", std::move(warnings)}, {"replacements", std::move(replacements)}};
}

// ---------------------------------------------------------------- augmentation steps

Json to_json(const AugmentationStep& s)
{
    Json j{{"kind", std::string(to_string(s.kind))}, {"source_fields", s.source_fields}};
    if (!s.target_field.empty()) j["target_field"] = s.target_field;
    switch (s.kind) {
    case AugmentKind::SplitList:
        if (!s.delimiters.empty()) j["delimiters"] = s.delimiters;
        break;
    case AugmentKind::MergeFields: j["separator"] = s.separator; break;
    case AugmentKind::ReplaceValues: {
        Json mapping = Json::array();
        for (const auto& [from, to] : s.mapping) mapping.push_back(Json::array({from, to}));
        j["mapping"] = std::move(mapping);
        break;
    }
    default: break;
    }
    return j;
}

AugmentationStep step_from_json(const Json& j)
{
    AugmentationStep s;
    const auto kind = parse_augment_kind(string_member(j, "kind"));
    if (!kind) bad("unknown augmentation kind '" + string_member(j, "kind") + "'", "kind");
    s.kind = *kind;
    if (const auto it = j.find("source_fields"); it != j.end())
        s.source_fields = string_list(*it, "source_fields");
    else if (const auto f = j.find("field"); f != j.end())
        s.source_fields = string_list(*f, "field");
    else
        bad("step needs 'source_fields'", "source_fields");
    s.target_field = optional_string(j, "target_field");
    s.separator = optional_string(j, "separator", " ");
    if (const auto it = j.find("delimiters"); it != j.end()) {
        if (!it->is_array()) bad("'delimiters' must be a list", "delimiters");
        for (const auto& d : *it) s.delimiters.push_back(string_list(d, "delimiters"));
    }
    const std::string preset = optional_string(j, "preset");
    if (preset == "translation_status")
        s.mapping = translation_status_preset();
    else if (preset == "translation_status_alt")
        s.mapping = translation_status_alt_preset();
    else if (!preset.empty())
        bad("unknown preset '" + preset + "'", "preset");
    if (const auto it = j.find("mapping"); it != j.end()) {
        if (it->is_object()) {
            for (const auto& [from, to] : it->items()) {
                if (!to.is_string()) bad("mapping values must be strings", "mapping");
                s.mapping.emplace_back(from, to.get<std::string>());
            }
        } else if (it->is_array()) {
            for (const auto& pair : *it) {
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
                    bad("mapping entries must be [from, to] string pairs", "mapping");
                s.mapping.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
            }
        } else {
            bad("'mapping' must be an object or a list of pairs", "mapping");
        }
    }
    return s;
}

std::vector<AugmentationStep> pipeline_from_json(const Json& j)
{
    const Json* steps = &j;
    if (j.is_object()) steps = &member(j, "steps");
    if (!steps->is_array()) bad("pipeline must be a list of steps");
    std::vector<AugmentationStep> out;
    for (const auto& s : *steps) out.push_back(step_from_json(s));
    return out;
}

// ---------------------------------------------------------------- harvest config

Json to_json(const HarvestConfig& c)
{
    Json map = Json::object();
    for (const auto& [k, v] : c.field_map) map[k] = v;
    Json j{{"base_url", c.base_url}, {"metadata_prefix", c.metadata_prefix}};
    if (c.set_spec) j["set"] = *c.set_spec;
    j["field_map"] = std::move(map);
    return j;
}

HarvestConfig harvest_config_from_json(const Json& j)
{
    HarvestConfig c;
    c.base_url = string_member(j, "base_url");
    c.metadata_prefix = optional_string(j, "metadata_prefix", "oai_dc");
    if (auto set = optional_string(j, "set"); !set.empty()) c.set_spec = std::move(set);
    if (const auto it = j.find("field_map"); it != j.end()) {
        if (!it->is_object()) bad("'field_map' must be an object", "field_map");
        for (const auto& [k, v] : it->items()) {
            if (!v.is_string()) bad("field_map values must be strings", "field_map");
            c.field_map[k] = v.get<std::string>();
        }
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------- views

Json to_json(const Widget& w)
{
    Json j{{"kind", std::string(to_string(w.kind))}};
    if (!w.field.empty()) j["field"] = w.field;
    if (!w.url.empty()) j["url"] = w.url;
    return j;
}

Json to_json(const ViewConfig& v)
{
    Json widgets = Json::array();
    for (const auto& w : v.widgets) widgets.push_back(to_json(w));
    Json j{{"view_id", v.view_id}, {"kind", std::string(to_string(v.kind))}, {"dataset_id", v.dataset_id}};
    if (!v.label.empty()) j["label"] = v.label;
    if (!v.facet_field.empty()) j["facet_field"] = v.facet_field;
    j["k"] = v.k;
    if (!v.weight_field.empty()) j["weight_field"] = v.weight_field;
    if (!v.columns.empty()) j["columns"] = v.columns;
    j["widgets"] = std::move(widgets);
    return j;
}

ViewConfig view_config_from_json(const Json& j)
{
    ViewConfig v;
    v.view_id = optional_string(j, "view_id");
    const auto kind = parse_view_kind(string_member(j, "kind"));
    if (!kind) bad("unknown view kind '" + string_member(j, "kind") + "'", "kind");
    v.kind = *kind;
    v.dataset_id = optional_string(j, "dataset_id");
    v.label = optional_string(j, "label");
    v.facet_field = optional_string(j, "facet_field");
    if (v.facet_field.empty()) v.facet_field = optional_string(j, "field");
    if (const auto it = j.find("k"); it != j.end()) {
        if (!it->is_number_integer() || it->get<long long>() < 1) bad("'k' must be a positive integer", "k");
        v.k = it->get<std::size_t>();
    }
    v.weight_field = optional_string(j, "weight_field");
    if (const auto it = j.find("columns"); it != j.end()) v.columns = string_list(*it, "columns");
    if (const auto it = j.find("widgets"); it != j.end()) {
        if (!it->is_array()) bad("'widgets' must be a list", "widgets");
        for (const auto& wj : *it) {
            Widget w;
            const auto wk = parse_widget_kind(string_member(wj, "kind"));
            if (!wk) bad("unknown widget kind '" + string_member(wj, "kind") + "'", "widgets");
            w.kind = *wk;
            w.field = optional_string(wj, "field");
            w.url = optional_string(wj, "url");
            v.widgets.push_back(std::move(w));
        }
    }
    return v;
}

Json to_json(const FilterState& s)
{
    Json sel = Json::object();
    for (const auto& [field, keys] : s.selections) sel[field] = Json(std::vector<std::string>(keys.begin(), keys.end()));
    Json j{{"selections", std::move(sel)}};
    j["q"] = s.text_query ? Json(*s.text_query) : Json(nullptr);
    return j;
}

FilterState filter_state_from_json(const Json& j)
{
    FilterState s;
    if (const auto it = j.find("selections"); it != j.end()) {
        if (!it->is_object()) bad("'selections' must be an object", "selections");
        for (const auto& [field, keys] : it->items()) {
            const auto list = string_list(keys, "selections");
            s.selections[field].insert(list.begin(), list.end());
        }
    }
    if (auto q = optional_string(j, "q"); !q.empty()) s.text_query = std::move(q);
    return s.normalized();
}

Json to_json(const FacetCounts& c)
{
    Json buckets = Json::array();
    for (const auto& b : c.buckets) buckets.push_back(Json{{"key", b.key}, {"label", b.label}, {"count", b.count}});
    return Json{{"field", c.field}, {"buckets", std::move(buckets)}};
}

namespace {

Json geo_json(const GeoCount& g)
{
    Json children = Json::array();
    for (const auto& c : g.children) children.push_back(geo_json(c));
    return Json{{"name", g.name},
                {"level", std::string(to_string(g.level))},
                {"count", g.count},
                {"children", std::move(children)}};
}

}  // namespace

Json to_json(const ViewResult& r)
{
    Json j{{"kind", std::string(to_string(r.kind))},
           {"dataset_id", r.dataset_id},
           {"dataset_version", r.dataset_version},
           {"state", to_json(r.state)},
           {"total", r.total}};
    if (!r.field.empty()) j["field"] = r.field;

    if (r.kind == ViewKind::Table) {
        j["columns"] = r.columns;
        j["offset"] = r.offset;
        j["limit"] = r.limit;
        Json rows = Json::array();
        for (const auto& row : r.rows) {
            Json cells = Json::array();
            for (const auto& c : row.cells) cells.push_back(value_to_plain_json(c));
            rows.push_back(Json{{"record_id", row.record_id}, {"cells", std::move(cells)}});
        }
        j["rows"] = std::move(rows);
        return j;
    }
    if (r.kind == ViewKind::Pie) j["occurrences"] = r.occurrences;
    if (r.kind == ViewKind::WeightedHist) j["missing_weights"] = r.missing_weights;
    if (r.kind == ViewKind::Geo) {
        Json tree = Json::array();
        for (const auto& g : r.geo) tree.push_back(geo_json(g));
        j["tree"] = std::move(tree);
    }
    Json buckets = Json::array();
    for (const auto& b : r.buckets) {
        Json bj{{"key", b.key}, {"label", b.label}, {"count", b.count}};
        if (b.percent_tenths) bj["percentage"] = static_cast<double>(*b.percent_tenths) / 10.0;
        if (b.weight) bj["weight"] = *b.weight;
        buckets.push_back(std::move(bj));
    }
    j["buckets"] = std::move(buckets);
    return j;
}

Json error_json(const Error& e)
{
    Json j{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    if (!e.locator().empty()) j["locator"] = e.locator();
    return j;
}

}  // namespace facetview
