#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "facetview/error.hpp"
#include "facetview/http_server.hpp"
#include "facetview/serialize.hpp"

using namespace facetview;

namespace {

class Served : public ::testing::Test {
protected:
    void SetUp() override
    {
        port_ = server_.bind("127.0.0.1", 0);
        thread_ = std::thread([this] { server_.listen(); });
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }
    void TearDown() override
    {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    Registry registry_;
    Service service_{registry_};
    HttpServer server_{service_};
    std::thread thread_;
    int port_ = 0;
    std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST_F(Served, EndToEnd)
{
    auto r = client_->Post("/datasets?id=d&id_column=Id", "Id,Language\n1,Russian\n2,German\n3,Russian\n", "text/csv");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 201);
    EXPECT_EQ(r->get_header_value("Content-Type"), "application/json");

    r = client_->Post("/datasets/d/views", R"({"view_id":"p","kind":"pie","facet_field":"Language"})",
                      "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 201);

    r = client_->Get("/views/p/query?f.Language=Russian");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
    const auto etag = r->get_header_value("ETag");
    EXPECT_EQ(etag, "\"d-v1\"");
    const auto body = Json::parse(r->body);
    EXPECT_EQ(body["matched"], 2);
    EXPECT_EQ(body["result"]["buckets"][0]["percentage"], 100.0);

    r = client_->Get("/views/p/query?f.Language=Russian", {{"If-None-Match", etag}});
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 304);

    r = client_->Patch("/datasets/d/schema", R"([{"field":"Language","enabled":false}])", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);

    r = client_->Get("/datasets/d/export?format=csv");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->get_header_value("Content-Type"), "text/csv; charset=utf-8");
    EXPECT_EQ(r->body.substr(0, 22), "record_id,Id,Language\r");

    r = client_->Get("/nothing/here");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 404);
    EXPECT_EQ(Json::parse(r->body)["error"]["code"], "UnknownRoute");

    r = client_->Delete("/datasets/d");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 405);
}

TEST(HttpServer, BindFailureIsIoError)
{
    Registry registry;
    Service service(registry);
    HttpServer server(service);
    try {
        server.bind("256.0.0.1", 8080);
        FAIL() << "bind to an invalid address succeeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}
