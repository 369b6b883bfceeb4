#include "facetview/cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "facetview/http_server.hpp"
#include "facetview/service.hpp"
#include "facetview/text.hpp"

#ifndef FACETVIEW_BUNDLED_DATA
#define FACETVIEW_BUNDLED_DATA ""
#endif

namespace facetview {

namespace {

struct Settings {
    std::string config;
    std::string data_dir = "facetview-data";
    std::string gazetteer;
    std::string geo_tree;
    std::string host = "127.0.0.1";
    int port = 8080;
    bool local_mutations = false;
};

void apply_config_file(Settings& s, const CLI::App& app)
{
    if (s.config.empty()) return;
    std::ifstream in(s.config, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read config '" + s.config + "'", s.config);
    std::ostringstream ss;
    ss << in.rdbuf();
    const Json j = parse_json(ss.str());
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object", s.config);
    // command-line flags win over the file
    const auto take = [&](const char* key, const char* flag, auto& target) {
        if (j.contains(key) && app.count(flag) == 0) j.at(key).get_to(target);
    };
    take("data_dir", "--data-dir", s.data_dir);
    take("gazetteer", "--gazetteer", s.gazetteer);
    take("geo_tree", "--geo-tree", s.geo_tree);
    take("host", "--host", s.host);
    take("port", "--port", s.port);
    take("mutations_local_only", "--local-mutations", s.local_mutations);
}

std::string bundled(const std::string& name)
{
    const std::string dir = FACETVIEW_BUNDLED_DATA;
    if (dir.empty()) return {};
    const std::string path = dir + "/" + name;
    return std::filesystem::exists(path) ? path : std::string{};
}

RegistryOptions registry_options(const Settings& s)
{
    RegistryOptions o;
    if (!s.data_dir.empty()) o.data_dir = s.data_dir;
    const std::string gaz = s.gazetteer.empty() ? bundled("gazetteer.tsv") : s.gazetteer;
    if (!gaz.empty() && gaz != "none") o.gazetteer = std::make_shared<const Gazetteer>(Gazetteer::load(gaz));
    const std::string tree = s.geo_tree.empty() ? bundled("geo_tree.txt") : s.geo_tree;
    if (!tree.empty() && tree != "none") o.geo_tree = std::make_shared<const GeoTree>(GeoTree::load(tree));
    return o;
}

std::string resolve_dataset(const Registry& r, const std::string& requested)
{
    if (!requested.empty()) return requested;
    const auto latest = r.latest_dataset();
    if (!latest) throw Error(ErrorCode::UnknownDataset, "no dataset yet; run `facetview ingest <file>` first");
    return *latest;
}

std::pair<std::string, std::string> split_pair(const std::string& s, const std::string& what)
{
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
        throw Error(ErrorCode::InvalidArgument, what + " must look like name=value: '" + s + "'", s);
    return {s.substr(0, eq), s.substr(eq + 1)};
}

FilterState filter_from(const std::vector<std::string>& filters, const std::string& q)
{
    FilterState state;
    for (const auto& f : filters) {
        auto [field, key] = split_pair(f, "--filter");
        state.selections[field].insert(key);
    }
    if (!q.empty()) state.text_query = q;
    return state.normalized();
}

void write_output(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'", path);
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'", path);
}

Json describe(const DatasetState& state)
{
    const auto& s = *state.snapshot;
    Json schema = Json::array();
    for (const auto& f : s.schema) schema.push_back(to_json(f));
    return Json{{"dataset_id", s.dataset_id},
                {"version", s.version},
                {"records", s.records.size()},
                {"schema", std::move(schema)}};
}

HttpServer* g_server = nullptr;

extern "C" void on_signal(int)
{
    if (g_server) g_server->stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Import, augment and serve faceted collection views", "facetview"};
    app.require_subcommand(1);
    Settings s;
    app.add_option("--config", s.config, "JSON settings file");
    app.add_option("--data-dir", s.data_dir, "Where datasets and views are stored");
    app.add_option("--gazetteer", s.gazetteer, "Place-name gazetteer (TSV); 'none' disables");
    app.add_option("--geo-tree", s.geo_tree, "Geography outline for geo views; 'none' disables");
    app.add_option("--port", s.port, "Port for serve");
    app.add_option("--host", s.host, "Address for serve");
    app.add_flag("--local-mutations", s.local_mutations, "Accept changes only from this machine");

    std::string dataset;
    std::string new_id;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Import a CSV/TSV file or JSON record list");
    std::string ingest_path, ingest_format, id_column, id_key, delimiter;
    bool no_header = false;
    ingest->add_option("file", ingest_path, "Input file")->required();
    ingest->add_option("--id", new_id, "Dataset id");
    ingest->add_option("--format", ingest_format, "csv, tsv or json (default: from extension)");
    ingest->add_option("--delimiter", delimiter, "Field delimiter for delimited files");
    ingest->add_option("--id-column", id_column, "Column holding record ids");
    ingest->add_option("--id-key", id_key, "Key holding record ids in a JSON list");
    ingest->add_flag("--no-header", no_header, "First row is data");

    // harvest
    auto* harvest = app.add_subcommand("harvest", "Harvest an OAI-PMH endpoint");
    std::string base_url, prefix = "oai_dc", set_spec;
    std::vector<std::string> field_map;
    harvest->add_option("url", base_url, "Endpoint base URL")->required();
    harvest->add_option("--id", new_id, "Dataset id (existing: re-harvest)");
    harvest->add_option("--prefix", prefix, "metadataPrefix");
    harvest->add_option("--set", set_spec, "setSpec");
    harvest->add_option("--map", field_map, "element=Field renames");

    // augment
    auto* augment = app.add_subcommand("augment", "Apply an augmentation step, or a pipeline file");
    std::string aug_kind, target, separator = " ", preset, pipeline_file;
    std::vector<std::string> aug_fields, delimiters, mapping;
    augment->add_option("kind", aug_kind, "dates, geocode, split, heading, merge or replace");
    augment->add_option("fields", aug_fields, "Source field(s)");
    augment->add_option("--dataset", dataset, "Dataset id (default: latest)");
    augment->add_option("--target", target, "Target field (default: first source)");
    augment->add_option("--delimiter", delimiters, "Split delimiter, repeatable, first match wins");
    augment->add_option("--separator", separator, "Merge separator");
    augment->add_option("--preset", preset, "Replacement preset");
    augment->add_option("--map", mapping, "from=to replacement, repeatable");
    augment->add_option("--file", pipeline_file, "JSON pipeline document");

    // schema
    auto* schema = app.add_subcommand("schema", "Change a field's type or visibility");
    std::string schema_field, schema_type;
    bool enable = false, disable = false;
    schema->add_option("field", schema_field, "Field name")->required();
    schema->add_option("--dataset", dataset, "Dataset id (default: latest)");
    schema->add_option("--type", schema_type, "text, number, datetime, location, url or list");
    auto* en = schema->add_flag("--enable", enable, "Show the field");
    schema->add_flag("--disable", disable, "Hide the field")->excludes(en);

    // refresh
    auto* refresh = app.add_subcommand("refresh", "Re-import the source and replay edits");
    std::string refresh_file;
    refresh->add_option("--dataset", dataset, "Dataset id (default: latest)");
    refresh->add_option("--file", refresh_file, "New bytes for an uploaded source");

    // views add
    auto* views = app.add_subcommand("views", "Manage views");
    views->require_subcommand(1);
    auto* views_add = views->add_subcommand("add", "Add a view");
    std::string view_kind, view_field, view_id, label, weight;
    std::size_t k = 5;
    std::vector<std::string> columns, widgets;
    views_add->add_option("kind", view_kind, "pie, timeline, geo, top_k, tag_cloud, table or weighted_hist")
        ->required();
    views_add->add_option("field", view_field, "Facet field");
    views_add->add_option("--dataset", dataset, "Dataset id (default: latest)");
    views_add->add_option("--id", view_id, "View id");
    views_add->add_option("--label", label, "Title");
    views_add->add_option("--k", k, "Buckets shown by top_k");
    views_add->add_option("--weight", weight, "Weight field for weighted_hist");
    views_add->add_option("--column", columns, "Table column, repeatable");
    views_add->add_option("--widget", widgets, "kind[:field or url], repeatable");

    // snapshot
    auto* snapshot = app.add_subcommand("snapshot", "Write a view result to a file");
    std::vector<std::string> snap_args, filters;
    std::string q;
    std::size_t offset = 0, limit = 50;
    snapshot->add_option("args", snap_args, "<view-id> <out> | <kind> <field> <out>")->required()->expected(2, 3);
    snapshot->add_option("--dataset", dataset, "Dataset id (default: latest)");
    snapshot->add_option("--filter", filters, "field=key selection, repeatable");
    snapshot->add_option("--q", q, "Text query");
    snapshot->add_option("--k", k, "Buckets shown by top_k");
    snapshot->add_option("--weight", weight, "Weight field for weighted_hist");
    snapshot->add_option("--offset", offset, "Table offset");
    snapshot->add_option("--limit", limit, "Table page size");

    // export
    auto* exporter = app.add_subcommand("export", "Export records as CSV or JSON");
    std::string export_format = "csv", export_out;
    exporter->add_option("--dataset", dataset, "Dataset id (default: latest)");
    exporter->add_option("--format", export_format, "csv or json");
    exporter->add_option("--out", export_out, "Output file (default: stdout)");
    exporter->add_option("--filter", filters, "field=key selection, repeatable");
    exporter->add_option("--q", q, "Text query");

    // serve
    app.add_subcommand("serve", "Run the HTTP API");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 1;
    }

    try {
        apply_config_file(s, app);
        Registry registry(registry_options(s));
        const auto print = [&](const Json& j) { out << j.dump(2) << "\n"; };

        if (*ingest) {
            ImportRequest req;
            std::string format = ingest_format;
            if (format.empty()) {
                const std::string ext = text::fold_case(std::filesystem::path(ingest_path).extension().string());
                format = ext == ".json" ? "json" : ext == ".tsv" || ext == ".tab" ? "tsv" : "csv";
            }
            if (format == "json") {
                req.kind = SourceDescriptor::Kind::RecordList;
                if (!id_key.empty()) req.record_list.id_key = id_key;
            } else if (format == "csv" || format == "tsv") {
                req.kind = SourceDescriptor::Kind::Delimited;
                req.delimited.delimiter = format == "tsv" ? '\t' : ',';
                if (!delimiter.empty()) {
                    if (delimiter.size() != 1)
                        throw Error(ErrorCode::InvalidArgument, "--delimiter must be one character", delimiter);
                    req.delimited.delimiter = delimiter.front();
                }
                req.delimited.header_row = !no_header;
                if (!id_column.empty()) req.delimited.id_column = id_column;
            } else {
                throw Error(ErrorCode::UnknownFormat, "unknown format '" + format + "'", format);
            }
            req.path = std::filesystem::absolute(ingest_path).string();
            auto created = registry.create(req, new_id.empty() ? std::nullopt : std::optional(new_id));
            Json j = describe(*created.state);
            j["report"] = to_json(created.report);
            print(j);
        } else if (*harvest) {
            HarvestConfig config;
            config.base_url = base_url;
            config.metadata_prefix = prefix;
            if (!set_spec.empty()) config.set_spec = set_spec;
            for (const auto& m : field_map) config.field_map.insert(split_pair(m, "--map"));
            config.validate();
            Json j;
            if (new_id.empty()) {
                ImportRequest req;
                req.kind = SourceDescriptor::Kind::Harvest;
                req.harvest = config;
                auto created = registry.create(req);
                j = describe(*created.state);
                j["report"] = to_json(created.report);
            } else {
                auto outcome = registry.harvest_into(new_id, config);
                j = describe(*outcome.state);
                j["changes"] = to_json(outcome.changes);
                j["report"] = to_json(outcome.report);
            }
            print(j);
        } else if (*augment) {
            std::vector<AugmentationStep> steps;
            if (!pipeline_file.empty()) {
                std::ifstream in(pipeline_file, std::ios::binary);
                if (!in) throw Error(ErrorCode::IoError, "cannot read '" + pipeline_file + "'", pipeline_file);
                std::ostringstream ss;
                ss << in.rdbuf();
                steps = pipeline_from_json(parse_json(ss.str()));
            } else {
                if (aug_kind.empty() || aug_fields.empty())
                    throw Error(ErrorCode::InvalidArgument, "augment needs a kind and at least one field");
                Json j{{"kind", aug_kind}, {"source_fields", aug_fields}, {"separator", separator}};
                if (!target.empty()) j["target_field"] = target;
                if (!delimiters.empty()) j["delimiters"] = delimiters;
                if (!preset.empty()) j["preset"] = preset;
                if (!mapping.empty()) {
                    Json pairs = Json::array();
                    for (const auto& m : mapping) {
                        auto [from, to] = split_pair(m, "--map");
                        pairs.push_back(Json::array({from, to}));
                    }
                    j["mapping"] = std::move(pairs);
                }
                steps.push_back(step_from_json(j));
            }
            auto outcome = registry.augment(resolve_dataset(registry, dataset), steps);
            Json j = describe(*outcome.state);
            j["report"] = to_json(outcome.report, steps);
            print(j);
        } else if (*schema) {
            SchemaPatch p;
            p.field = schema_field;
            if (!schema_type.empty()) {
                p.type = parse_field_type(schema_type);
                if (!p.type) throw Error(ErrorCode::InvalidArgument, "unknown type '" + schema_type + "'", schema_type);
            }
            if (enable) p.enabled = true;
            if (disable) p.enabled = false;
            print(describe(*registry.patch_schema(resolve_dataset(registry, dataset), {p})));
        } else if (*refresh) {
            std::optional<std::string> upload;
            if (!refresh_file.empty()) {
                std::ifstream in(refresh_file, std::ios::binary);
                if (!in) throw Error(ErrorCode::IoError, "cannot read '" + refresh_file + "'", refresh_file);
                std::ostringstream ss;
                ss << in.rdbuf();
                upload = ss.str();
            }
            auto outcome = registry.refresh(resolve_dataset(registry, dataset), std::move(upload));
            Json j = describe(*outcome.state);
            j["changes"] = to_json(outcome.changes);
            j["report"] = to_json(outcome.report);
            print(j);
        } else if (*views_add) {
            ViewConfig v;
            const auto kind = parse_view_kind(view_kind);
            if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown view kind '" + view_kind + "'", view_kind);
            v.kind = *kind;
            v.view_id = view_id;
            v.dataset_id = resolve_dataset(registry, dataset);
            v.label = label;
            v.facet_field = view_field;
            v.k = k;
            v.weight_field = weight;
            v.columns = columns;
            for (const auto& w : widgets) {
                const auto colon = w.find(':');
                const auto wk = parse_widget_kind(w.substr(0, colon));
                if (!wk) throw Error(ErrorCode::InvalidArgument, "unknown widget '" + w + "'", w);
                Widget widget{*wk, {}, {}};
                const std::string rest = colon == std::string::npos ? std::string{} : w.substr(colon + 1);
                (*wk == WidgetKind::Logo ? widget.url : widget.field) = rest;
                v.widgets.push_back(std::move(widget));
            }
            print(to_json(registry.add_view(std::move(v))));
        } else if (*snapshot) {
            const FilterState state = filter_from(filters, q);
            const Page page{offset, limit};
            ViewResult result;
            const std::string& out_path = snap_args.back();
            if (snap_args.size() == 2) {
                const ViewConfig v = registry.view(snap_args[0]);
                const auto ds = registry.get(v.dataset_id);
                result = render_view(v, *ds->snapshot, *ds->index, state, page);
            } else {
                ViewConfig v;
                const auto kind = parse_view_kind(snap_args[0]);
                if (!kind)
                    throw Error(ErrorCode::InvalidArgument, "unknown view kind '" + snap_args[0] + "'", snap_args[0]);
                v.kind = *kind;
                v.dataset_id = resolve_dataset(registry, dataset);
                v.facet_field = snap_args[1];
                v.k = k;
                v.weight_field = weight;
                const auto ds = registry.get(v.dataset_id);
                validate_view(v, *ds->snapshot);
                if (v.kind == ViewKind::Geo) {
                    if (!registry.options().geo_tree)
                        throw Error(ErrorCode::InvalidArgument, "geo views need a geography tree (--geo-tree)");
                    IndexOptions io;
                    io.gazetteer = registry.options().gazetteer;
                    io.geo_fields[v.facet_field] = registry.options().geo_tree;
                    const FacetIndex index = build_index(*ds->snapshot, io);
                    result = render_view(v, *ds->snapshot, index, state, page);
                } else {
                    result = render_view(v, *ds->snapshot, *ds->index, state, page);
                }
            }
            write_output(out_path, to_json(result).dump(2) + "\n");
            print(Json{{"written", out_path}, {"total", result.total}});
        } else if (*exporter) {
            const auto ds = registry.get(resolve_dataset(registry, dataset));
            if (export_format != "csv" && export_format != "json")
                throw Error(ErrorCode::UnknownFormat, "unknown export format '" + export_format + "'", export_format);
            const DocSet docs = filtered_ids(*ds->index, filter_from(filters, q));
            std::vector<const Record*> records;
            for (const auto ord : docs.members()) records.push_back(&ds->snapshot->records[ord]);
            const std::string body = export_format == "csv" ? write_delimited(*ds->snapshot, &records)
                                                            : write_record_list(*ds->snapshot, &records);
            if (export_out.empty())
                out << body;
            else
                write_output(export_out, body);
        } else {
            Service service(registry, ServiceOptions{s.local_mutations});
            HttpServer server(service);
            const int port = server.bind(s.host, s.port);
            err << "listening on http://" << s.host << ":" << port << "\n";
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.listen();
            g_server = nullptr;
        }
        return 0;
    } catch (const Error& e) {
        err << Json{{"error", error_json(e)}}.dump() << "\n";
        return is_environment_error(e.code()) ? 2 : 1;
    } catch (const nlohmann::json::exception& e) {
        err << Json{{"error", error_json(Error(ErrorCode::InvalidArgument, e.what()))}}.dump() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << Json{{"error", error_json(Error(ErrorCode::IoError, e.what()))}}.dump() << "\n";
        return 2;
    }
}

}  // namespace facetview
