#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>

#include <unistd.h>

#include "facetview/error.hpp"
#include "facetview/registry.hpp"
#include "support/corpus.hpp"
#include "support/mock_oai.hpp"

using namespace facetview;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int n = 0;
        path = fs::temp_directory_path() /
               ("facetview-registry-" + std::to_string(::getpid()) + "-" + std::to_string(++n));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ImportRequest csv_upload(std::string bytes, const std::string& id_column = "Id")
{
    ImportRequest r;
    r.kind = SourceDescriptor::Kind::Delimited;
    r.bytes = std::move(bytes);
    r.delimited.id_column = id_column;
    return r;
}

const std::string kCsv = "Id,Title,Date,Language\n"
                         "1,Letter,19620902,Russian\n"
                         "2,Memo,196601,German\n"
                         "3,Cable,,Russian\n";

AugmentationStep dates(const std::string& field)
{
    AugmentationStep s;
    s.kind = AugmentKind::NormalizeDate;
    s.source_fields = {field};
    return s;
}

RegistryOptions quiet(RegistryOptions o = {})
{
    o.retry.sleep = [](std::chrono::milliseconds) {};
    return o;
}

std::string write_rows(const std::map<std::string, std::string>& rows)
{
    std::string csv = "Id,Title\n";
    for (const auto& [id, title] : rows) csv += id + "," + title + "\n";
    return csv;
}

std::vector<std::string> sorted(std::vector<std::string> v)
{
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST(Registry, CreateAssignsIdsAndVersionOne)
{
    Registry reg;
    const auto a = reg.create(csv_upload(kCsv));
    EXPECT_EQ(a.state->snapshot->dataset_id, "ds1");
    EXPECT_EQ(a.state->snapshot->version, 1u);
    EXPECT_EQ(a.state->snapshot->records.size(), 3u);
    EXPECT_EQ(a.state->index->size(), 3u);
    EXPECT_EQ(a.report.records_created, 3u);
    const auto b = reg.create(csv_upload(kCsv), "archive");
    EXPECT_EQ(b.state->snapshot->dataset_id, "archive");
    EXPECT_EQ(reg.latest_dataset(), "archive");
    EXPECT_EQ(reg.dataset_ids(), (std::vector<std::string>{"archive", "ds1"}));
    EXPECT_EQ(code_of([&] { reg.create(csv_upload(kCsv), "archive"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { reg.create(csv_upload(kCsv), "../x"); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { reg.get("nope"); }), ErrorCode::UnknownDataset);
    EXPECT_EQ(code_of([&] { reg.create(csv_upload("")); }), ErrorCode::EmptyInput);
}

TEST(Registry, MissingSourceFile)
{
    Registry reg;
    ImportRequest r;
    r.path = "/nonexistent/file.csv";
    EXPECT_EQ(code_of([&] { reg.create(r); }), ErrorCode::SourceUnavailable);
}

TEST(Registry, EditsBumpVersionAndLog)
{
    Registry reg;
    reg.create(csv_upload(kCsv), "d");
    const auto aug = reg.augment("d", {dates("Date")});
    EXPECT_EQ(aug.state->snapshot->version, 2u);
    EXPECT_EQ(aug.state->snapshot->find_record("1")->get("Date").display(), "1962-09-02T00:00:00+00:00");
    const auto patched = reg.patch_schema("d", {SchemaPatch{"Language", std::nullopt, false}});
    EXPECT_EQ(patched->snapshot->version, 3u);
    EXPECT_EQ(patched->index->field("Language"), nullptr);
    EXPECT_EQ(patched->log.size(), 2u);
    EXPECT_EQ(code_of([&] { reg.patch_schema("d", {SchemaPatch{"Nope", std::nullopt, false}}); }),
              ErrorCode::UnknownField);
    EXPECT_EQ(code_of([&] { reg.patch_schema("d", {SchemaPatch{"Title", FieldType::Number, std::nullopt}}); }),
              ErrorCode::CoercionError);
    EXPECT_EQ(reg.get("d")->snapshot->version, 3u);
}

TEST(Registry, RefreshUnchangedAndReplaysLog)
{
    Registry reg;
    reg.create(csv_upload(kCsv), "d");
    reg.augment("d", {dates("Date")});
    const auto r = reg.refresh("d");
    EXPECT_TRUE(r.changes.empty());
    EXPECT_EQ(r.state->snapshot->version, 3u);
    EXPECT_EQ(r.state->snapshot->find_record("2")->get("Date").display(), "1966-01-01T00:00:00+00:00");
}

TEST(Registry, RefreshWithOneAddedRecord)
{
    Registry reg;
    reg.create(csv_upload(kCsv), "d");
    const auto r = reg.refresh("d", kCsv + "4,Minutes,1970,Polish\n");
    EXPECT_EQ(r.changes.added, std::vector<std::string>{"4"});
    EXPECT_TRUE(r.changes.removed.empty());
    EXPECT_TRUE(r.changes.modified.empty());
    EXPECT_EQ(r.state->snapshot->version, 2u);
    // The new upload becomes the stored source.
    EXPECT_TRUE(reg.refresh("d").changes.empty());
}

// A refresh reports exactly the edits applied to the source rows.
TEST(Registry, RefreshRandomEditsMatchScript)
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        std::map<std::string, std::string> rows;
        const int n = std::uniform_int_distribution<int>(1, 60)(rng);
        for (int i = 0; i < n; ++i) rows["id" + std::to_string(i)] = "title" + std::to_string(i);
        Registry reg;
        reg.create(csv_upload(write_rows(rows)), "d");

        std::set<std::string> added, removed, modified;
        int next = n;
        const int edits = std::uniform_int_distribution<int>(0, 20)(rng);
        for (int e = 0; e < edits; ++e) {
            const int op = std::uniform_int_distribution<int>(0, 2)(rng);
            if (op == 0 || rows.empty()) {
                const std::string id = "id" + std::to_string(next++);
                rows[id] = "new" + id;
                added.insert(id);
                continue;
            }
            auto it = rows.begin();
            std::advance(it, std::uniform_int_distribution<std::size_t>(0, rows.size() - 1)(rng));
            const std::string id = it->first;
            if (op == 1) {
                rows.erase(it);
                if (!added.erase(id)) {
                    modified.erase(id);
                    removed.insert(id);
                }
            } else {
                it->second += "x";
                if (!added.count(id)) modified.insert(id);
            }
        }
        if (rows.empty()) continue;
        const auto r = reg.refresh("d", write_rows(rows));
        EXPECT_EQ(sorted(r.changes.added), std::vector<std::string>(added.begin(), added.end())) << trial;
        EXPECT_EQ(sorted(r.changes.removed), std::vector<std::string>(removed.begin(), removed.end())) << trial;
        EXPECT_EQ(sorted(r.changes.modified), std::vector<std::string>(modified.begin(), modified.end())) << trial;
        EXPECT_EQ(r.state->snapshot->version, 2u);
    }
}

TEST(Registry, RefreshRereadsPath)
{
    TempDir tmp;
    const auto file = tmp.path / "source.csv";
    std::ofstream(file) << kCsv;
    Registry reg;
    ImportRequest req;
    req.path = file.string();
    req.delimited.id_column = "Id";
    reg.create(req, "d");
    std::ofstream(file, std::ios::app) << "4,Minutes,1970,Polish\n";
    EXPECT_EQ(reg.refresh("d").changes.added, std::vector<std::string>{"4"});
}

TEST(Registry, HarvestIntoCreatesThenRefreshes)
{
    mock::OaiServer server(25, 10);
    Registry reg(quiet());
    HarvestConfig c;
    c.base_url = server.base_url();
    const auto first = reg.harvest_into("oai", c);
    EXPECT_EQ(first.state->snapshot->records.size(), 25u);
    EXPECT_EQ(first.changes.added.size(), 25u);
    EXPECT_EQ(first.state->snapshot->version, 1u);

    server.set_records(27);
    server.set_edition(2);
    const auto second = reg.harvest_into("oai", c);
    EXPECT_EQ(second.state->snapshot->version, 2u);
    EXPECT_EQ(sorted(second.changes.added), (std::vector<std::string>{"oai:mock:26", "oai:mock:27"}));
    EXPECT_EQ(second.changes.modified.size(), 25u);

    EXPECT_EQ(code_of([&] { reg.refresh("oai", "Id\n1\n"); }), ErrorCode::InvalidArgument);
    reg.create(csv_upload(kCsv), "csv");
    EXPECT_EQ(code_of([&] { reg.harvest_into("csv", c); }), ErrorCode::InvalidArgument);
}

TEST(Registry, HarvestFailureKeepsPreviousVersion)
{
    mock::OaiServer server(5, 10);
    Registry reg(quiet());
    HarvestConfig c;
    c.base_url = server.base_url();
    reg.harvest_into("oai", c);
    mock::OaiServer looping(25, 10, mock::OaiServer::Mode::TokenLoop);
    c.base_url = looping.base_url();
    EXPECT_EQ(code_of([&] { reg.harvest_into("oai", c); }), ErrorCode::TokenLoop);
    EXPECT_EQ(reg.get("oai")->snapshot->version, 1u);
}

TEST(Registry, Views)
{
    Registry reg;
    reg.create(csv_upload(kCsv), "d");
    ViewConfig v;
    v.kind = ViewKind::Pie;
    v.dataset_id = "d";
    v.facet_field = "Language";
    const auto stored = reg.add_view(v);
    EXPECT_EQ(stored.view_id, "v1");
    EXPECT_EQ(reg.view("v1"), stored);
    EXPECT_EQ(reg.views_for("d").size(), 1u);
    EXPECT_EQ(code_of([&] { reg.view("zz"); }), ErrorCode::UnknownView);
    EXPECT_EQ(code_of([&] { reg.add_view(stored); }), ErrorCode::InvalidArgument);
    v.dataset_id = "nope";
    EXPECT_EQ(code_of([&] { reg.add_view(v); }), ErrorCode::UnknownDataset);
    v.dataset_id = "d";
    v.kind = ViewKind::Geo;
    EXPECT_EQ(code_of([&] { reg.add_view(v); }), ErrorCode::InvalidArgument);
}

TEST(Registry, GeoViewBindsIndex)
{
    RegistryOptions o;
    o.geo_tree = corpus::geo_tree();
    Registry reg(o);
    reg.create(csv_upload("Id,Place\n1,Peking\n2,Atlantis\n"), "d");
    ViewConfig v;
    v.kind = ViewKind::Geo;
    v.dataset_id = "d";
    v.facet_field = "Place";
    reg.add_view(v);
    const auto state = reg.get("d");
    EXPECT_EQ(state->snapshot->version, 1u);
    ASSERT_NE(state->index->field("Place"), nullptr);
    EXPECT_NE(state->index->field("Place")->geo, nullptr);
    EXPECT_EQ(state->index->field("Place")->buckets.at("East Asia").count(), 1u);
    // The binding survives a refresh.
    EXPECT_NE(reg.refresh("d").state->index->field("Place")->geo, nullptr);
}

TEST(Registry, PersistsAcrossInstances)
{
    TempDir tmp;
    RegistryOptions o;
    o.data_dir = tmp.path;
    {
        Registry reg(o);
        reg.create(csv_upload(kCsv), "d");
        reg.augment("d", {dates("Date")});
        ViewConfig v;
        v.view_id = "langs";
        v.kind = ViewKind::TopK;
        v.dataset_id = "d";
        v.facet_field = "Language";
        v.k = 3;
        reg.add_view(v);
    }
    Registry again(o);
    const auto state = again.get("d");
    EXPECT_EQ(state->snapshot->version, 2u);
    EXPECT_EQ(state->snapshot->find_record("1")->get("Date").display(), "1962-09-02T00:00:00+00:00");
    EXPECT_EQ(state->log.size(), 1u);
    EXPECT_EQ(again.view("langs").k, 3u);
    EXPECT_EQ(again.latest_dataset(), "d");
    EXPECT_TRUE(fs::exists(tmp.path / "datasets" / "d" / "v1.json"));
    EXPECT_TRUE(fs::exists(tmp.path / "datasets" / "d" / "v2.json"));

    // Refresh after reload uses the persisted upload and log.
    const auto r = again.refresh("d");
    EXPECT_TRUE(r.changes.empty());
    EXPECT_EQ(r.state->snapshot->version, 3u);
}

TEST(Registry, UnwritableDataDir)
{
    TempDir tmp;
    const auto blocker = tmp.path / "file";
    std::ofstream(blocker) << "x";
    RegistryOptions o;
    o.data_dir = blocker / "sub";
    EXPECT_EQ(code_of([&] {
                  Registry reg(o);
                  reg.create(csv_upload(kCsv), "d");
              }),
              ErrorCode::IoError);
}
