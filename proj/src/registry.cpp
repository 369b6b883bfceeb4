#include "facetview/registry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "facetview/serialize.hpp"
#include "facetview/text.hpp"

namespace facetview {

namespace fs = std::filesystem;

namespace {

bool valid_id(std::string_view id)
{
    if (id.empty() || id.size() > 64 || id == "." || id == "..") return false;
    for (char c : id)
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
              c == '.'))
            return false;
    return true;
}

std::optional<std::string> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'", tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'", tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot replace '" + path.string() + "': " + ec.message(), path.string());
}

Json log_to_json(const std::vector<LogEntry>& log)
{
    Json arr = Json::array();
    for (const auto& e : log) {
        if (e.kind == LogEntry::Kind::Augment) {
            Json steps = Json::array();
            for (const auto& s : e.steps) steps.push_back(to_json(s));
            arr.push_back(Json{{"op", "augment"}, {"steps", std::move(steps)}});
        } else {
            Json patches = Json::array();
            for (const auto& p : e.patches) {
                Json pj{{"field", p.field}};
                if (p.type) pj["type"] = std::string(to_string(*p.type));
                if (p.enabled) pj["enabled"] = *p.enabled;
                patches.push_back(std::move(pj));
            }
            arr.push_back(Json{{"op", "schema"}, {"patches", std::move(patches)}});
        }
    }
    return arr;
}

std::vector<LogEntry> log_from_json(const Json& arr)
{
    std::vector<LogEntry> log;
    for (const auto& e : arr) {
        LogEntry entry;
        if (e.at("op") == "augment") {
            entry.kind = LogEntry::Kind::Augment;
            entry.steps = pipeline_from_json(e.at("steps"));
        } else {
            entry.kind = LogEntry::Kind::Schema;
            for (const auto& pj : e.at("patches")) {
                SchemaPatch p;
                p.field = pj.at("field").get<std::string>();
                if (pj.contains("type")) p.type = parse_field_type(pj["type"].get<std::string>());
                if (pj.contains("enabled")) p.enabled = pj["enabled"].get<bool>();
                entry.patches.push_back(std::move(p));
            }
        }
        log.push_back(std::move(entry));
    }
    return log;
}

DelimitedOptions delimited_from(const SourceDescriptor& s)
{
    DelimitedOptions o;
    if (const auto it = s.options.find("delimiter"); it != s.options.end() && !it->second.empty())
        o.delimiter = it->second.front();
    if (const auto it = s.options.find("header_row"); it != s.options.end()) o.header_row = it->second != "false";
    if (const auto it = s.options.find("id_column"); it != s.options.end()) o.id_column = it->second;
    if (const auto it = s.options.find("keep_id_column"); it != s.options.end())
        o.keep_id_column = it->second != "false";
    return o;
}

HarvestConfig harvest_from(const SourceDescriptor& s)
{
    HarvestConfig c;
    c.base_url = s.location;
    for (const auto& [k, v] : s.options) {
        if (k == "metadata_prefix")
            c.metadata_prefix = v;
        else if (k == "set")
            c.set_spec = v;
        else if (k.rfind("map:", 0) == 0)
            c.field_map[k.substr(4)] = v;
    }
    return c;
}

}  // namespace

SourceDescriptor describe_source(const ImportRequest& request)
{
    SourceDescriptor s;
    s.kind = request.kind;
    switch (request.kind) {
    case SourceDescriptor::Kind::Delimited:
        s.location = request.path.value_or("");
        s.options["delimiter"] = std::string(1, request.delimited.delimiter);
        s.options["header_row"] = request.delimited.header_row ? "true" : "false";
        if (request.delimited.id_column) s.options["id_column"] = *request.delimited.id_column;
        s.options["keep_id_column"] = request.delimited.keep_id_column ? "true" : "false";
        break;
    case SourceDescriptor::Kind::RecordList:
        s.location = request.path.value_or("");
        if (request.record_list.id_key) s.options["id_key"] = *request.record_list.id_key;
        break;
    case SourceDescriptor::Kind::Harvest:
        s.location = request.harvest.base_url;
        s.options["metadata_prefix"] = request.harvest.metadata_prefix;
        if (request.harvest.set_spec) s.options["set"] = *request.harvest.set_spec;
        for (const auto& [k, v] : request.harvest.field_map) s.options["map:" + k] = v;
        break;
    case SourceDescriptor::Kind::None:
        break;
    }
    return s;
}

DatasetSnapshot apply_schema_patch(const DatasetSnapshot& snapshot, const std::vector<SchemaPatch>& patches)
{
    DatasetSnapshot out = snapshot;
    out.version = snapshot.version + 1;
    for (const auto& p : patches) {
        FieldSpec* spec = out.field(p.field);
        if (!spec) throw Error(ErrorCode::UnknownField, "unknown field '" + p.field + "'", p.field);
        if (p.enabled) spec->enabled = *p.enabled;
        if (p.type && *p.type != spec->type) {
            spec->type = *p.type;
            spec->multivalued = *p.type == FieldType::List;
            if (*p.type != FieldType::List) spec->fold_case = false;
            for (auto& r : out.records) {
                const Value& v = r.get(p.field);
                if (v.is_missing()) continue;
                try {
                    r.set(p.field, coerce(v.display(), *p.type, p.field));
                } catch (const Error& e) {
                    throw Error(e.code(), e.what(), "record " + r.id() + ", field " + p.field);
                }
            }
        }
    }
    return out;
}

Registry::Registry(RegistryOptions options) : options_(std::move(options))
{
    if (!options_.http_get) options_.http_get = default_http_get();
    load();
}

std::shared_ptr<std::mutex> Registry::lock_for(const std::string& dataset_id)
{
    std::lock_guard guard(mutex_);
    auto& m = locks_[dataset_id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

Registry::Slot Registry::slot(const std::string& dataset_id) const
{
    std::lock_guard guard(mutex_);
    const auto it = datasets_.find(dataset_id);
    if (it == datasets_.end())
        throw Error(ErrorCode::UnknownDataset, "no dataset '" + dataset_id + "'", dataset_id);
    return it->second;
}

std::shared_ptr<const DatasetState> Registry::get(const std::string& dataset_id) const
{
    return slot(dataset_id).state;
}

std::vector<std::string> Registry::dataset_ids() const
{
    std::lock_guard guard(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, s] : datasets_) out.push_back(id);
    return out;
}

std::optional<std::string> Registry::latest_dataset() const
{
    std::lock_guard guard(mutex_);
    return latest_;
}

Imported Registry::run_import(const SourceDescriptor& source, const std::optional<std::string>& upload,
                              const std::string& dataset_id) const
{
    Imported imported;
    switch (source.kind) {
    case SourceDescriptor::Kind::Delimited:
    case SourceDescriptor::Kind::RecordList: {
        std::optional<std::string> bytes = upload;
        if (!bytes && !source.location.empty()) {
            bytes = read_file(source.location);
            if (!bytes)
                throw Error(ErrorCode::SourceUnavailable, "cannot read source file '" + source.location + "'",
                            source.location);
        }
        if (!bytes) throw Error(ErrorCode::SourceUnavailable, "dataset has no stored source to re-import", dataset_id);
        if (source.kind == SourceDescriptor::Kind::Delimited) {
            imported = parse_delimited(*bytes, delimited_from(source), dataset_id);
        } else {
            RecordListOptions o;
            if (const auto it = source.options.find("id_key"); it != source.options.end()) o.id_key = it->second;
            imported = parse_record_list(*bytes, o, dataset_id);
        }
        break;
    }
    case SourceDescriptor::Kind::Harvest:
        imported = harvest_oai(harvest_from(source), options_.http_get, options_.retry, dataset_id);
        break;
    case SourceDescriptor::Kind::None:
        throw Error(ErrorCode::SourceUnavailable, "dataset has no recorded source", dataset_id);
    }
    imported.snapshot.source = source;
    imported.snapshot.dataset_id = dataset_id;
    return imported;
}

std::shared_ptr<const FacetIndex> Registry::index_for(const DatasetSnapshot& snapshot) const
{
    IndexOptions opts;
    opts.gazetteer = options_.gazetteer;
    if (options_.geo_tree) {
        std::lock_guard guard(mutex_);
        for (const auto& [id, v] : views_)
            if (v.dataset_id == snapshot.dataset_id && v.kind == ViewKind::Geo && snapshot.field(v.facet_field))
                opts.geo_fields[v.facet_field] = options_.geo_tree;
    }
    return std::make_shared<const FacetIndex>(build_index(snapshot, opts));
}

std::shared_ptr<const DatasetState> Registry::publish(const std::string& dataset_id, DatasetSnapshot snapshot,
                                                      std::vector<LogEntry> log, std::optional<std::string> upload)
{
    snapshot.dataset_id = dataset_id;
    snapshot.validate();
    auto state = std::make_shared<DatasetState>();
    state->snapshot = std::make_shared<const DatasetSnapshot>(std::move(snapshot));
    state->index = index_for(*state->snapshot);
    state->log = std::move(log);
    persist_dataset(*state, upload);

    std::lock_guard guard(mutex_);
    datasets_[dataset_id] = Slot{state, std::move(upload)};
    latest_ = dataset_id;
    if (options_.data_dir) write_file_atomic(*options_.data_dir / "latest", dataset_id);
    return state;
}

Registry::CreateResult Registry::create(const ImportRequest& request, std::optional<std::string> dataset_id)
{
    if (!dataset_id) {
        std::lock_guard guard(mutex_);
        for (std::size_t n = datasets_.size() + 1;; ++n) {
            std::string candidate = "ds" + std::to_string(n);
            if (!datasets_.count(candidate)) {
                dataset_id = std::move(candidate);
                break;
            }
        }
    }
    if (!valid_id(*dataset_id))
        throw Error(ErrorCode::InvalidArgument, "invalid dataset id '" + *dataset_id + "'", *dataset_id);
    const auto lock = lock_for(*dataset_id);
    std::lock_guard guard(*lock);
    {
        std::lock_guard g(mutex_);
        if (datasets_.count(*dataset_id))
            throw Error(ErrorCode::InvalidArgument, "dataset '" + *dataset_id + "' already exists", *dataset_id);
    }
    const SourceDescriptor source = describe_source(request);
    const std::optional<std::string> upload = request.path ? std::nullopt : request.bytes;
    Imported imported = run_import(source, request.path ? request.bytes : upload, *dataset_id);
    imported.snapshot.version = 1;
    auto state = publish(*dataset_id, std::move(imported.snapshot), {}, upload);
    return {state, std::move(imported.report)};
}

Registry::RefreshOutcome Registry::refresh(const std::string& dataset_id, std::optional<std::string> upload)
{
    const auto lock = lock_for(dataset_id);
    std::lock_guard guard(*lock);
    const Slot current = slot(dataset_id);
    const DatasetSnapshot& before = *current.state->snapshot;

    if (upload && before.source.kind == SourceDescriptor::Kind::Harvest)
        throw Error(ErrorCode::InvalidArgument, "harvested datasets refresh from their endpoint", dataset_id);
    const std::optional<std::string> stored = upload ? upload : current.upload;
    Imported imported = run_import(before.source, stored, dataset_id);

    DatasetSnapshot next = std::move(imported.snapshot);
    for (const auto& entry : current.state->log) {
        if (entry.kind == LogEntry::Kind::Augment)
            next = apply_pipeline(next, entry.steps, options_.gazetteer.get()).snapshot;
        else
            next = apply_schema_patch(next, entry.patches);
    }
    next.version = before.version + 1;
    ChangeSummary changes = snapshot_diff(before, next);
    auto state = publish(dataset_id, std::move(next), current.state->log, stored);
    return {state, std::move(changes), std::move(imported.report)};
}

Registry::RefreshOutcome Registry::harvest_into(const std::string& dataset_id, const HarvestConfig& config)
{
    config.validate();
    ImportRequest request;
    request.kind = SourceDescriptor::Kind::Harvest;
    request.harvest = config;

    bool exists;
    {
        std::lock_guard guard(mutex_);
        exists = datasets_.count(dataset_id) > 0;
    }
    if (!exists) {
        auto created = create(request, dataset_id);
        ChangeSummary changes;
        for (const auto& r : created.state->snapshot->records) changes.added.push_back(r.id());
        std::sort(changes.added.begin(), changes.added.end());
        return {created.state, std::move(changes), std::move(created.report)};
    }

    // Re-point the source, then refresh through the normal path.
    {
        const auto lock = lock_for(dataset_id);
        std::lock_guard guard(*lock);
        const Slot current = slot(dataset_id);
        if (current.state->snapshot->source.kind != SourceDescriptor::Kind::Harvest)
            throw Error(ErrorCode::InvalidArgument, "dataset '" + dataset_id + "' was not harvested", dataset_id);
        auto state = std::make_shared<DatasetState>(*current.state);
        auto snap = std::make_shared<DatasetSnapshot>(*current.state->snapshot);
        snap->source = describe_source(request);
        state->snapshot = std::move(snap);
        std::lock_guard g(mutex_);
        datasets_[dataset_id].state = std::move(state);
    }
    return refresh(dataset_id);
}

std::shared_ptr<const DatasetState> Registry::patch_schema(const std::string& dataset_id,
                                                           const std::vector<SchemaPatch>& patches)
{
    const auto lock = lock_for(dataset_id);
    std::lock_guard guard(*lock);
    const Slot current = slot(dataset_id);
    DatasetSnapshot next = apply_schema_patch(*current.state->snapshot, patches);
    auto log = current.state->log;
    log.push_back(LogEntry{LogEntry::Kind::Schema, {}, patches});
    return publish(dataset_id, std::move(next), std::move(log), current.upload);
}

Registry::AugmentOutcome Registry::augment(const std::string& dataset_id, const std::vector<AugmentationStep>& steps)
{
    const auto lock = lock_for(dataset_id);
    std::lock_guard guard(*lock);
    const Slot current = slot(dataset_id);
    AugmentResult result = apply_pipeline(*current.state->snapshot, steps, options_.gazetteer.get());
    auto log = current.state->log;
    log.push_back(LogEntry{LogEntry::Kind::Augment, steps, {}});
    auto state = publish(dataset_id, std::move(result.snapshot), std::move(log), current.upload);
    return {state, std::move(result.report)};
}

ViewConfig Registry::add_view(ViewConfig config)
{
    if (config.kind == ViewKind::Geo && !options_.geo_tree)
        throw Error(ErrorCode::InvalidArgument, "geo views need a geography tree (--geo-tree)");
    if (!config.view_id.empty() && !valid_id(config.view_id))
        throw Error(ErrorCode::InvalidArgument, "invalid view id '" + config.view_id + "'", config.view_id);

    const auto lock = lock_for(config.dataset_id);
    std::lock_guard guard(*lock);
    const Slot current = slot(config.dataset_id);
    validate_view(config, *current.state->snapshot);
    {
        std::lock_guard g(mutex_);
        if (config.view_id.empty()) {
            for (std::size_t n = views_.size() + 1;; ++n) {
                std::string candidate = "v" + std::to_string(n);
                if (!views_.count(candidate)) {
                    config.view_id = std::move(candidate);
                    break;
                }
            }
        } else if (views_.count(config.view_id)) {
            throw Error(ErrorCode::InvalidArgument, "view '" + config.view_id + "' already exists", config.view_id);
        }
        views_[config.view_id] = config;
    }
    persist_view(config);

    if (config.kind == ViewKind::Geo) {
        // same version, index rebuilt with the geography binding
        auto state = std::make_shared<DatasetState>(*current.state);
        state->index = index_for(*state->snapshot);
        std::lock_guard g(mutex_);
        datasets_[config.dataset_id].state = std::move(state);
    }
    return config;
}

ViewConfig Registry::view(const std::string& view_id) const
{
    std::lock_guard guard(mutex_);
    const auto it = views_.find(view_id);
    if (it == views_.end()) throw Error(ErrorCode::UnknownView, "no view '" + view_id + "'", view_id);
    return it->second;
}

std::vector<ViewConfig> Registry::views_for(const std::string& dataset_id) const
{
    std::lock_guard guard(mutex_);
    std::vector<ViewConfig> out;
    for (const auto& [id, v] : views_)
        if (v.dataset_id == dataset_id) out.push_back(v);
    return out;
}

// ---------------------------------------------------------------- persistence

void Registry::persist_dataset(const DatasetState& state, const std::optional<std::string>& upload) const
{
    if (!options_.data_dir) return;
    const auto& snap = *state.snapshot;
    const fs::path dir = *options_.data_dir / "datasets" / snap.dataset_id;
    write_file_atomic(dir / ("v" + std::to_string(snap.version) + ".json"), to_json(snap).dump() + "\n");
    if (upload) write_file_atomic(dir / "upload.dat", *upload);
    Json meta{{"dataset_id", snap.dataset_id},
              {"version", snap.version},
              {"log", log_to_json(state.log)},
              {"upload", upload.has_value()}};
    write_file_atomic(dir / "dataset.json", meta.dump(2) + "\n");
}

void Registry::persist_view(const ViewConfig& config) const
{
    if (!options_.data_dir) return;
    write_file_atomic(*options_.data_dir / "views" / (config.view_id + ".json"), to_json(config).dump(2) + "\n");
}

void Registry::load()
{
    if (!options_.data_dir) return;
    const fs::path root = *options_.data_dir;
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create data dir '" + root.string() + "'", root.string());

    const auto load_json = [](const fs::path& p) {
        const auto text = read_file(p);
        if (!text) throw Error(ErrorCode::IoError, "cannot read '" + p.string() + "'", p.string());
        return parse_json(*text);
    };

    if (fs::is_directory(root / "views"))
        for (const auto& entry : fs::directory_iterator(root / "views"))
            if (entry.path().extension() == ".json") {
                ViewConfig v = view_config_from_json(load_json(entry.path()));
                views_[v.view_id] = std::move(v);
            }

    if (fs::is_directory(root / "datasets")) {
        for (const auto& entry : fs::directory_iterator(root / "datasets")) {
            const fs::path meta_path = entry.path() / "dataset.json";
            if (!fs::exists(meta_path)) continue;
            const Json meta = load_json(meta_path);
            const auto version = meta.at("version").get<std::uint64_t>();
            DatasetSnapshot snap = snapshot_from_json(load_json(entry.path() / ("v" + std::to_string(version) + ".json")));
            auto state = std::make_shared<DatasetState>();
            state->log = log_from_json(meta.at("log"));
            std::optional<std::string> upload;
            if (meta.value("upload", false)) upload = read_file(entry.path() / "upload.dat");
            state->snapshot = std::make_shared<const DatasetSnapshot>(std::move(snap));
            datasets_[state->snapshot->dataset_id] = Slot{state, std::move(upload)};
        }
    }
    // indexes need the view bindings loaded above
    for (auto& [id, s] : datasets_) {
        auto state = std::make_shared<DatasetState>(*s.state);
        state->index = index_for(*state->snapshot);
        s.state = std::move(state);
    }
    if (const auto latest = read_file(root / "latest")) {
        const std::string id(text::trim(*latest));
        if (datasets_.count(id)) latest_ = id;
    }
}

}  // namespace facetview
