#pragma once

#include <memory>
#include <string>

#include "facetview/service.hpp"

namespace facetview {

/// Serves a Service over HTTP. Reads are open to any origin so views can be
/// embedded in other sites.
class HttpServer {
public:
    explicit HttpServer(const Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port. Throws IoError.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace facetview
