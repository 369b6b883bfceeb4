#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "facetview/cli.hpp"
#include "facetview/serialize.hpp"
#include "support/mock_oai.hpp"

using namespace facetview;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        static int n = 0;
        dir_ = fs::temp_directory_path() / ("facetview-cli-" + std::to_string(::getpid()) + "-" + std::to_string(++n));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Outcome run(std::vector<std::string> args) const
    {
        args.insert(args.begin(), {"--data-dir", (dir_ / "data").string()});
        std::ostringstream out, err;
        Outcome r;
        r.code = run_cli(args, out, err);
        r.out = out.str();
        r.err = err.str();
        return r;
    }

    std::string file(const std::string& name, const std::string& content) const
    {
        const auto p = dir_ / name;
        std::ofstream(p, std::ios::binary) << content;
        return p.string();
    }

    std::string read(const std::string& name) const
    {
        std::ifstream in(dir_ / name, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

const std::string kFigure = "Record Id,Title,Date,Language,Location,Subjects,Translation Needed\n"
                            "115568,Record of conversation,19620902,Bulgarian,\"Washington, DC\",\"Cuba; Missiles\",No\n"
                            "115569,Memo,196601,Russian,Moscow,Cold War,Yes\n"
                            "115570,Letter,19620903,Russian,Beijing,Cold War,No\n";

}  // namespace

TEST_F(Cli, HelpAndParseErrors)
{
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"ingest"}).code, 1);
}

TEST_F(Cli, IngestThenPieSnapshot)
{
    const auto r = run({"ingest", FACETVIEW_SOURCE_DIR "/data/sample_documents.csv", "--id", "docs"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = Json::parse(r.out);
    EXPECT_EQ(j["dataset_id"], "docs");
    EXPECT_EQ(j["records"], 12);

    const auto s = run({"snapshot", "pie", "Language", path("out.json")});
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(Json::parse(s.out)["total"], 12);
    const auto doc = Json::parse(read("out.json"));
    EXPECT_EQ(doc["kind"], "pie");
    std::int64_t sum = 0;
    for (const auto& b : doc["buckets"]) sum += std::llround(b["percentage"].get<double>() * 10);
    EXPECT_EQ(sum, 1000);
}

TEST_F(Cli, AugmentDatesOnFigureRecord)
{
    ASSERT_EQ(run({"ingest", file("fig.csv", kFigure), "--id-column", "Record Id"}).code, 0);
    const auto r = run({"augment", "dates", "Date"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["version"], 2);
    const auto e = run({"export", "--format", "json"});
    ASSERT_EQ(e.code, 0) << e.err;
    const auto records = Json::parse(e.out);
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[0]["record_id"], "115568");
    EXPECT_EQ(records[0]["Date"], "1962-09-02T00:00:00+00:00");
    EXPECT_EQ(records[1]["Date"], "1966-01-01T00:00:00+00:00");
}

TEST_F(Cli, AugmentVariants)
{
    ASSERT_EQ(run({"ingest", file("fig.csv", kFigure), "--id-column", "Record Id", "--id", "fig"}).code, 0);
    auto r = run({"augment", "geocode", "Location", "--target", "Coordinates"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"augment", "split", "Subjects", "--delimiter", ";"});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"augment", "replace", "Translation Needed", "--map", "No=No Translation", "--map", "Yes=Translated"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto records = Json::parse(run({"export", "--dataset", "fig", "--format", "json"}).out);
    EXPECT_EQ(records[0]["Coordinates"], "38.89511,-77.03637");
    EXPECT_EQ(records[0]["Subjects"], Json::array({"Cuba", "Missiles"}));
    EXPECT_EQ(records[0]["Translation Needed"], "No Translation");
    EXPECT_EQ(run({"export", "--dataset", "fig"}).out.substr(0, 20), "record_id,Record Id,");
    EXPECT_EQ(run({"augment", "dates"}).code, 1);
    EXPECT_EQ(run({"augment", "bogus", "Date"}).code, 1);
    EXPECT_EQ(run({"augment", "--file", path("missing.json")}).code, 2);
}

TEST_F(Cli, SchemaViewsAndRefresh)
{
    ASSERT_EQ(run({"ingest", file("fig.csv", kFigure), "--id-column", "Record Id"}).code, 0);
    auto r = run({"schema", "Title", "--disable"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["version"], 2);
    EXPECT_EQ(run({"schema", "Nope", "--disable"}).code, 1);
    EXPECT_EQ(run({"schema", "Title", "--type", "number"}).code, 1);

    r = run({"views", "add", "top_k", "Language", "--id", "langs", "--k", "1", "--widget", "search_box",
             "--widget", "filter_list:Translation Needed"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["widgets"].size(), 2u);
    r = run({"snapshot", "langs", path("top.json"), "--filter", "Translation Needed=No"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto top = Json::parse(read("top.json"));
    ASSERT_EQ(top["buckets"].size(), 1u);
    EXPECT_EQ(top["buckets"][0]["key"], "Bulgarian");
    EXPECT_EQ(top["total"], 2);

    r = run({"refresh", "--file", file("more.csv", kFigure + "115571,Cable,1970,Polish,Warsaw,Trade,No\n")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["changes"]["added"], Json::array({"115571"}));
    EXPECT_EQ(Json::parse(r.out)["version"], 3);
}

TEST_F(Cli, GeoSnapshotUsesBundledTree)
{
    ASSERT_EQ(run({"ingest", file("fig.csv", kFigure), "--id-column", "Record Id"}).code, 0);
    const auto r = run({"snapshot", "geo", "Location", path("geo.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = Json::parse(read("geo.json"));
    std::map<std::string, int> roots;
    for (const auto& g : doc["tree"]) roots[g["name"].get<std::string>()] = g["count"].get<int>();
    EXPECT_EQ(roots["East Asia"], 1);
    EXPECT_EQ(roots["Eastern Europe"], 1);
    EXPECT_EQ(roots["North America"], 1);
    EXPECT_EQ(run({"--geo-tree", "none", "snapshot", "geo", "Location", path("g2.json")}).code, 1);
}

TEST_F(Cli, HarvestFromMock)
{
    mock::OaiServer server(25, 10);
    auto r = run({"harvest", server.base_url(), "--id", "oai"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["records"], 25);
    r = run({"harvest", server.base_url()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(Json::parse(r.out)["records"], 25);
    mock::OaiServer looping(25, 10, mock::OaiServer::Mode::TokenLoop);
    r = run({"harvest", looping.base_url()});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(Json::parse(r.err)["error"]["code"], "TokenLoop");
    EXPECT_EQ(run({"harvest", "not a url"}).code, 1);
}

TEST_F(Cli, ExitCodes)
{
    auto r = run({"ingest", path("missing.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(Json::parse(r.err)["error"]["code"], "SourceUnavailable");
    r = run({"ingest", file("empty.csv", "")});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(Json::parse(r.err)["error"]["code"], "EmptyInput");
    EXPECT_EQ(run({"export"}).code, 1);
    ASSERT_EQ(run({"ingest", file("fig.csv", kFigure)}).code, 0);
    EXPECT_EQ(run({"export", "--format", "yaml"}).code, 1);
    EXPECT_EQ(run({"snapshot", "nope", path("x.json")}).code, 1);
    EXPECT_EQ(run({"snapshot", "pie", "Language", (dir_ / "no" / "such" / "dir" / "x.json").string()}).code, 2);
}

TEST_F(Cli, ExportCsvToFileAndConfig)
{
    const auto cfg = file("cfg.json", Json{{"data_dir", path("other")}}.dump());
    std::ostringstream out, err;
    ASSERT_EQ(run_cli({"--config", cfg, "ingest", file("fig.csv", kFigure), "--id-column", "Record Id"}, out, err), 0)
        << err.str();
    EXPECT_TRUE(fs::exists(dir_ / "other" / "datasets"));
    std::ostringstream out2, err2;
    ASSERT_EQ(run_cli({"--config", cfg, "export", "--format", "csv", "--out", path("x.csv"), "--q", "memo"}, out2, err2),
              0)
        << err2.str();
    const auto csv = read("x.csv");
    EXPECT_EQ(csv.substr(0, csv.find("\r\n")), "record_id,Record Id,Title,Date,Language,Location,Subjects,Translation Needed");
    EXPECT_NE(csv.find("115569"), std::string::npos);
    EXPECT_EQ(csv.find("115568"), std::string::npos);
    std::ostringstream out3, err3;
    EXPECT_EQ(run_cli({"--config", path("missing.json"), "export"}, out3, err3), 2);
}
