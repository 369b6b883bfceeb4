#include "facetview/http_server.hpp"

#include <httplib.h>

namespace facetview {

struct HttpServer::Impl {
    const Service& service;
    httplib::Server server;

    explicit Impl(const Service& s) : service(s) {}

    void dispatch(const httplib::Request& req, httplib::Response& res) const
    {
        ApiRequest api;
        api.method = req.method;
        api.path = req.path;
        for (const auto& [k, v] : req.params) api.params.emplace(k, v);
        api.body = req.body;
        api.content_type = req.get_header_value("Content-Type");
        api.if_none_match = req.get_header_value("If-None-Match");
        api.from_loopback = req.remote_addr == "127.0.0.1" || req.remote_addr == "::1" ||
                            req.remote_addr == "::ffff:127.0.0.1";

        const ApiResponse out = service.handle(api);
        res.status = out.status;
        for (const auto& [k, v] : out.headers) res.set_header(k, v);
        if (req.method == "GET") res.set_header("Access-Control-Allow-Origin", "*");
        if (out.status != 304) res.set_content(out.body, out.content_type);
    }
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service))
{
    const auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->dispatch(req, res); };
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    impl_->server.Patch(".*", handler);
    impl_->server.Put(".*", handler);
    impl_->server.Delete(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port)
{
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port),
                    host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop()
{
    if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace facetview
