#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "facetview/augment.hpp"
#include "facetview/facet_index.hpp"
#include "facetview/geo_tree.hpp"
#include "facetview/ingest.hpp"
#include "facetview/views.hpp"

namespace facetview {

struct SchemaPatch {
    std::string field;
    std::optional<FieldType> type;
    std::optional<bool> enabled;

    friend bool operator==(const SchemaPatch&, const SchemaPatch&) = default;
};

/// Re-types / enables fields, re-coercing stored values from their display
/// form. Bumps the version. Throws UnknownField or CoercionError (locator
/// "record <id>, field <name>").
DatasetSnapshot apply_schema_patch(const DatasetSnapshot& snapshot, const std::vector<SchemaPatch>& patches);

/// One replayable edit. Refresh re-applies the log in order.
struct LogEntry {
    enum class Kind { Augment, Schema };
    Kind kind = Kind::Augment;
    std::vector<AugmentationStep> steps;
    std::vector<SchemaPatch> patches;

    friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

/// A published dataset version together with its index. Never mutated.
struct DatasetState {
    std::shared_ptr<const DatasetSnapshot> snapshot;
    std::shared_ptr<const FacetIndex> index;
    std::vector<LogEntry> log;
};

struct ImportRequest {
    SourceDescriptor::Kind kind = SourceDescriptor::Kind::Delimited;
    std::optional<std::string> bytes;  // uploaded content
    std::optional<std::string> path;   // file read now and on every refresh
    DelimitedOptions delimited;
    RecordListOptions record_list;
    HarvestConfig harvest;
};

struct RegistryOptions {
    /// Persist datasets and views here; nullopt keeps everything in memory.
    std::optional<std::filesystem::path> data_dir;
    std::shared_ptr<const Gazetteer> gazetteer;
    std::shared_ptr<const GeoTree> geo_tree;
    HttpGet http_get;  // empty: default_http_get()
    RetryPolicy retry;
};

/// Owns every dataset and view. Reads hand out immutable DatasetState
/// pointers; mutations are serialized per dataset and publish atomically.
///
/// On-disk layout under data_dir:
///   latest                          id of the most recently changed dataset
///   datasets/<id>/dataset.json      {dataset_id, version, log, upload}
///   datasets/<id>/v<N>.json         snapshot documents, one per version
///   datasets/<id>/upload.dat        bytes of the last upload, if any
///   views/<view_id>.json            view configs
class Registry {
public:
    explicit Registry(RegistryOptions options = {});

    struct CreateResult {
        std::shared_ptr<const DatasetState> state;
        ImportReport report;
    };
    struct AugmentOutcome {
        std::shared_ptr<const DatasetState> state;
        AugmentReport report;
    };
    struct RefreshOutcome {
        std::shared_ptr<const DatasetState> state;
        ChangeSummary changes;
        ImportReport report;
    };

    /// Publishes version 1. Throws InvalidArgument when the id exists.
    CreateResult create(const ImportRequest& request, std::optional<std::string> dataset_id = {});
    /// Creates the dataset, or points an existing one at `config` and refreshes it.
    RefreshOutcome harvest_into(const std::string& dataset_id, const HarvestConfig& config);

    std::shared_ptr<const DatasetState> get(const std::string& dataset_id) const;
    std::vector<std::string> dataset_ids() const;
    std::optional<std::string> latest_dataset() const;

    std::shared_ptr<const DatasetState> patch_schema(const std::string& dataset_id,
                                                     const std::vector<SchemaPatch>& patches);
    AugmentOutcome augment(const std::string& dataset_id, const std::vector<AugmentationStep>& steps);
    /// Re-runs the recorded import, replays the log and publishes version+1.
    /// `upload` replaces the stored bytes of an uploaded source.
    RefreshOutcome refresh(const std::string& dataset_id, std::optional<std::string> upload = {});

    /// Validates, assigns an id when empty, stores. Throws UnknownDataset,
    /// UnknownField, TypeConflict, InvalidArgument.
    ViewConfig add_view(ViewConfig config);
    ViewConfig view(const std::string& view_id) const;
    std::vector<ViewConfig> views_for(const std::string& dataset_id) const;

    const RegistryOptions& options() const noexcept { return options_; }

private:
    struct Slot {
        std::shared_ptr<const DatasetState> state;
        std::optional<std::string> upload;
    };

    std::shared_ptr<std::mutex> lock_for(const std::string& dataset_id);
    Slot slot(const std::string& dataset_id) const;
    Imported run_import(const SourceDescriptor& source, const std::optional<std::string>& upload,
                        const std::string& dataset_id) const;
    std::shared_ptr<const FacetIndex> index_for(const DatasetSnapshot& snapshot) const;
    std::shared_ptr<const DatasetState> publish(const std::string& dataset_id, DatasetSnapshot snapshot,
                                                std::vector<LogEntry> log, std::optional<std::string> upload);
    void persist_dataset(const DatasetState& state, const std::optional<std::string>& upload) const;
    void persist_view(const ViewConfig& config) const;
    void load();

    RegistryOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, Slot> datasets_;
    std::map<std::string, ViewConfig> views_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
    std::optional<std::string> latest_;
};

SourceDescriptor describe_source(const ImportRequest& request);

}  // namespace facetview
