#include "facetview/service.hpp"

#include <charconv>
#include <set>

#include "facetview/filter_url.hpp"
#include "facetview/text.hpp"

namespace facetview {

namespace {

std::vector<std::string> split_path(std::string_view path)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start < path.size()) {
        auto slash = path.find('/', start);
        if (slash == std::string_view::npos) slash = path.size();
        if (slash > start) parts.push_back(percent_decode(path.substr(start, slash - start), false));
        start = slash + 1;
    }
    return parts;
}

std::optional<std::string> param(const std::multimap<std::string, std::string>& params, const std::string& name)
{
    const auto it = params.find(name);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

std::size_t size_param(const std::multimap<std::string, std::string>& params, const std::string& name,
                       std::size_t fallback)
{
    const auto raw = param(params, name);
    if (!raw) return fallback;
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), value);
    if (ec != std::errc{} || ptr != raw->data() + raw->size() || raw->empty())
        throw Error(ErrorCode::InvalidArgument, "'" + name + "' must be a non-negative integer", name);
    return value;
}

bool bool_param(const std::multimap<std::string, std::string>& params, const std::string& name, bool fallback)
{
    const auto raw = param(params, name);
    if (!raw) return fallback;
    if (*raw == "true" || *raw == "1") return true;
    if (*raw == "false" || *raw == "0") return false;
    throw Error(ErrorCode::InvalidArgument, "'" + name + "' must be true or false", name);
}

std::string etag(const std::string& dataset_id, std::uint64_t version)
{
    return "\"" + dataset_id + "-v" + std::to_string(version) + "\"";
}

Json describe(const DatasetState& state, const Registry& registry)
{
    const auto& s = *state.snapshot;
    Json schema = Json::array();
    for (const auto& f : s.schema) schema.push_back(to_json(f));
    Json views = Json::array();
    for (const auto& v : registry.views_for(s.dataset_id)) views.push_back(v.view_id);
    return Json{{"dataset_id", s.dataset_id},
                {"version", s.version},
                {"records", s.records.size()},
                {"source", to_json(s.source)},
                {"schema", std::move(schema)},
                {"views", std::move(views)},
                {"edits", state.log.size()}};
}

ApiResponse json_response(int status, const Json& body)
{
    ApiResponse r;
    r.status = status;
    r.body = body.dump() + "\n";
    return r;
}

std::vector<SchemaPatch> patches_from_json(const Json& j)
{
    const Json& list = j.is_object() && j.contains("fields") ? j["fields"] : j;
    if (!list.is_array()) throw Error(ErrorCode::InvalidArgument, "schema patch must be a list of field changes");
    std::vector<SchemaPatch> out;
    for (const auto& pj : list) {
        if (!pj.is_object() || !pj.contains("field") || !pj["field"].is_string())
            throw Error(ErrorCode::InvalidArgument, "each schema change needs a 'field' name");
        SchemaPatch p;
        p.field = pj["field"].get<std::string>();
        if (pj.contains("type")) {
            const auto t = pj["type"].is_string() ? parse_field_type(pj["type"].get<std::string>()) : std::nullopt;
            if (!t) throw Error(ErrorCode::InvalidArgument, "unknown field type", p.field);
            p.type = *t;
        }
        if (pj.contains("enabled")) {
            if (!pj["enabled"].is_boolean())
                throw Error(ErrorCode::InvalidArgument, "'enabled' must be a boolean", p.field);
            p.enabled = pj["enabled"].get<bool>();
        }
        out.push_back(std::move(p));
    }
    return out;
}

ImportRequest import_request(const ApiRequest& req)
{
    ImportRequest ir;
    std::string format = param(req.params, "format").value_or("");
    if (format.empty()) {
        const std::string ct = text::fold_case(req.content_type);
        if (ct.find("csv") != std::string::npos)
            format = "csv";
        else if (ct.find("tab-separated") != std::string::npos)
            format = "tsv";
        else if (ct.find("json") != std::string::npos)
            format = "json";
        else {
            const auto body = text::trim(req.body);
            format = !body.empty() && (body.front() == '[' || body.front() == '{') ? "json" : "csv";
        }
    }
    if (format == "csv" || format == "tsv") {
        ir.kind = SourceDescriptor::Kind::Delimited;
        ir.bytes = req.body;
        ir.delimited.delimiter = format == "tsv" ? '\t' : ',';
        if (const auto d = param(req.params, "delimiter")) {
            if (d->size() != 1) throw Error(ErrorCode::InvalidArgument, "'delimiter' must be one character", "delimiter");
            ir.delimited.delimiter = d->front();
        }
        ir.delimited.header_row = bool_param(req.params, "header", true);
        ir.delimited.id_column = param(req.params, "id_column");
        ir.delimited.keep_id_column = bool_param(req.params, "keep_id_column", true);
        return ir;
    }
    if (format == "json") {
        const Json doc = parse_json(req.body);
        if (doc.is_array()) {
            ir.kind = SourceDescriptor::Kind::RecordList;
            ir.bytes = req.body;
            ir.record_list.id_key = param(req.params, "id_key");
            return ir;
        }
        if (doc.is_object() && doc.contains("base_url")) {
            ir.kind = SourceDescriptor::Kind::Harvest;
            ir.harvest = harvest_config_from_json(doc);
            return ir;
        }
        throw Error(ErrorCode::InvalidArgument, "JSON body must be a record list or a harvest config");
    }
    throw Error(ErrorCode::UnknownFormat, "unknown import format '" + format + "'", "format");
}

std::set<std::string> view_fields(const ViewConfig& v, const DatasetSnapshot& s)
{
    std::set<std::string> names;
    if (!v.facet_field.empty()) names.insert(v.facet_field);
    if (!v.weight_field.empty()) names.insert(v.weight_field);
    names.insert(v.columns.begin(), v.columns.end());
    if (v.kind == ViewKind::Table && v.columns.empty())
        for (const auto& f : s.schema)
            if (f.enabled) names.insert(f.name);
    for (const auto& w : v.widgets)
        if (!w.field.empty()) names.insert(w.field);
    return names;
}

}  // namespace

int http_status(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::UnknownDataset:
    case ErrorCode::UnknownView:
    case ErrorCode::UnknownRoute:
        return 404;
    case ErrorCode::MethodNotAllowed:
        return 405;
    case ErrorCode::Forbidden:
        return 403;
    case ErrorCode::ProtocolError:
    case ErrorCode::NetworkError:
    case ErrorCode::TokenLoop:
    case ErrorCode::SourceUnavailable:
        return 502;
    case ErrorCode::IoError:
        return 500;
    default:
        return 400;
    }
}

Service::Service(Registry& registry, ServiceOptions options) : registry_(registry), options_(options) {}

Json Service::query(const std::string& view_id, const std::multimap<std::string, std::string>& params) const
{
    const ViewConfig config = registry_.view(view_id);
    const auto ds = registry_.get(config.dataset_id);
    const auto& snap = *ds->snapshot;
    const auto& index = *ds->index;

    const FilterState state = decode_filter_params(params);
    Page page;
    page.offset = size_param(params, "offset", page.offset);
    page.limit = size_param(params, "limit", page.limit);

    const ViewResult result = render_view(config, snap, index, state, page);
    const std::size_t matched = filtered_ids(index, state).count();

    Json widgets = Json::array();
    for (const auto& w : config.widgets) {
        Json wj{{"kind", std::string(to_string(w.kind))}};
        switch (w.kind) {
        case WidgetKind::SearchBox:
            wj["q"] = state.text_query.value_or("");
            break;
        case WidgetKind::FilterList: {
            wj["field"] = w.field;
            const auto counts = facet_counts(index, state, w.field);
            const auto sel = state.selections.find(w.field);
            Json buckets = Json::array();
            for (const auto& b : counts.buckets) {
                const bool selected = sel != state.selections.end() && sel->second.count(b.key) > 0;
                buckets.push_back(Json{{"key", b.key},
                                       {"label", b.label},
                                       {"count", b.count},
                                       {"selected", selected},
                                       {"projected", zero_result_guard(index, state, w.field, b.key)}});
            }
            wj["buckets"] = std::move(buckets);
            break;
        }
        case WidgetKind::TagCloud:
            wj["field"] = w.field;
            wj["result"] = to_json(tag_cloud_view(snap, index, state, w.field));
            break;
        case WidgetKind::Logo:
            wj["url"] = w.url;
            break;
        }
        widgets.push_back(std::move(wj));
    }

    Json body{{"view_id", config.view_id},
              {"dataset_id", snap.dataset_id},
              {"dataset_version", snap.version},
              {"state", to_json(state)},
              {"url_state", encode_filter_state(state)},
              {"matched", matched},
              {"result", to_json(result)},
              {"widgets", std::move(widgets)}};

    std::set<std::string> included;
    for (auto [it, end] = params.equal_range("include"); it != end; ++it) included.insert(it->second);
    if (!included.empty()) {
        Json coupled = Json::object();
        for (const auto& id : included) {
            const ViewConfig other = registry_.view(id);
            if (other.dataset_id != config.dataset_id)
                throw Error(ErrorCode::InvalidArgument, "view '" + id + "' belongs to another dataset", id);
            coupled[id] = to_json(render_view(other, snap, index, state, page));
        }
        body["coupled"] = std::move(coupled);
    }
    return body;
}

Json Service::embed(const std::string& view_id) const
{
    const ViewConfig config = registry_.view(view_id);
    const auto ds = registry_.get(config.dataset_id);
    Json schema = Json::array();
    for (const auto& name : view_fields(config, *ds->snapshot))
        if (const auto* f = ds->snapshot->field(name)) schema.push_back(to_json(*f));
    return Json{{"view", to_json(config)},
                {"dataset_id", config.dataset_id},
                {"dataset_version", ds->snapshot->version},
                {"query_url", "/views/" + percent_encode(view_id) + "/query"},
                {"schema", std::move(schema)},
                {"initial", query(view_id, {})}};
}

ApiResponse Service::handle(const ApiRequest& request) const
{
    try {
        return route(request);
    } catch (const Error& e) {
        return json_response(http_status(e.code()), Json{{"error", error_json(e)}});
    } catch (const nlohmann::json::exception& e) {
        return json_response(400, Json{{"error", error_json(Error(ErrorCode::InvalidArgument, e.what()))}});
    } catch (const std::exception& e) {
        return json_response(500, Json{{"error", error_json(Error(ErrorCode::IoError, e.what()))}});
    }
}

ApiResponse Service::route(const ApiRequest& req) const
{
    const auto parts = split_path(req.path);
    const std::string& m = req.method;
    const bool mutating = m == "POST" || m == "PATCH" || m == "PUT" || m == "DELETE";
    if (mutating && options_.mutations_local_only && !req.from_loopback)
        throw Error(ErrorCode::Forbidden, "changes are only accepted from this machine");

    const auto not_allowed = [&]() -> ApiResponse {
        throw Error(ErrorCode::MethodNotAllowed, m + " not allowed on " + req.path);
    };
    // Cacheable reads carry the dataset version as entity tag.
    const auto tagged = [&](const std::string& dataset_id, std::uint64_t version, ApiResponse r) {
        const std::string tag = etag(dataset_id, version);
        r.headers["ETag"] = tag;
        if (!req.if_none_match.empty() && req.if_none_match == tag) {
            r.status = 304;
            r.body.clear();
        }
        return r;
    };

    if (parts.size() == 1 && parts[0] == "datasets") {
        if (m != "POST") return not_allowed();
        const ImportRequest ir = import_request(req);
        const auto id = param(req.params, "id");
        auto created = registry_.create(ir, id);
        Json body = describe(*created.state, registry_);
        body["report"] = to_json(created.report);
        return json_response(201, body);
    }

    if (parts.size() >= 2 && parts[0] == "datasets") {
        const std::string& id = parts[1];
        if (parts.size() == 2) {
            if (m != "GET") return not_allowed();
            const auto state = registry_.get(id);
            return tagged(id, state->snapshot->version, json_response(200, describe(*state, registry_)));
        }
        if (parts.size() != 3) throw Error(ErrorCode::UnknownRoute, "no route " + req.path);
        const std::string& action = parts[2];

        if (action == "harvest") {
            if (m != "POST") return not_allowed();
            bool existed = false;
            for (const auto& d : registry_.dataset_ids()) existed = existed || d == id;
            auto outcome = registry_.harvest_into(id, harvest_config_from_json(parse_json(req.body)));
            Json body = describe(*outcome.state, registry_);
            body["changes"] = to_json(outcome.changes);
            body["report"] = to_json(outcome.report);
            return json_response(existed ? 200 : 201, body);
        }
        if (action == "schema") {
            if (m != "PATCH") return not_allowed();
            const auto state = registry_.patch_schema(id, patches_from_json(parse_json(req.body)));
            return json_response(200, describe(*state, registry_));
        }
        if (action == "augment") {
            if (m != "POST") return not_allowed();
            const auto steps = pipeline_from_json(parse_json(req.body));
            auto outcome = registry_.augment(id, steps);
            Json body = describe(*outcome.state, registry_);
            body["report"] = to_json(outcome.report, steps);
            return json_response(200, body);
        }
        if (action == "refresh") {
            if (m != "POST") return not_allowed();
            std::optional<std::string> upload;
            if (!text::is_blank(req.body)) upload = req.body;
            auto outcome = registry_.refresh(id, std::move(upload));
            Json body = describe(*outcome.state, registry_);
            body["changes"] = to_json(outcome.changes);
            body["report"] = to_json(outcome.report);
            return json_response(200, body);
        }
        if (action == "views") {
            if (m != "POST") return not_allowed();
            ViewConfig config = view_config_from_json(parse_json(req.body));
            if (!config.dataset_id.empty() && config.dataset_id != id)
                throw Error(ErrorCode::InvalidArgument, "view body names another dataset", "dataset_id");
            config.dataset_id = id;
            return json_response(201, to_json(registry_.add_view(std::move(config))));
        }
        if (action == "export") {
            if (m != "GET") return not_allowed();
            const auto state = registry_.get(id);
            const auto& snap = *state->snapshot;
            const std::string format = param(req.params, "format").value_or("json");
            if (format != "csv" && format != "json")
                throw Error(ErrorCode::UnknownFormat, "unknown export format '" + format + "'", "format");
            const DocSet docs = filtered_ids(*state->index, decode_filter_params(req.params));
            std::vector<const Record*> records;
            for (const auto ord : docs.members()) records.push_back(&snap.records[ord]);
            ApiResponse r;
            if (format == "csv") {
                r.content_type = "text/csv; charset=utf-8";
                r.body = write_delimited(snap, &records);
            } else {
                r.body = write_record_list(snap, &records);
            }
            return tagged(id, snap.version, std::move(r));
        }
        throw Error(ErrorCode::UnknownRoute, "no route " + req.path);
    }

    if (parts.size() >= 2 && parts[0] == "views") {
        const std::string& id = parts[1];
        if (m != "GET") return not_allowed();
        const ViewConfig config = registry_.view(id);
        std::optional<Json> body;
        if (parts.size() == 2)
            body = Json{{"view", to_json(config)}, {"dataset_version", registry_.get(config.dataset_id)->snapshot->version}};
        else if (parts.size() == 3 && parts[2] == "query")
            body = query(id, req.params);
        else if (parts.size() == 3 && parts[2] == "embed")
            body = embed(id);
        if (body)
            return tagged(config.dataset_id, (*body)["dataset_version"].get<std::uint64_t>(), json_response(200, *body));
    }
    throw Error(ErrorCode::UnknownRoute, "no route " + req.path);
}

}  // namespace facetview
