#pragma once

#include <map>
#include <string>

#include "facetview/registry.hpp"
#include "facetview/serialize.hpp"

namespace facetview {

struct ApiRequest {
    std::string method;  // "GET", "POST", "PATCH"
    std::string path;    // without query string
    std::multimap<std::string, std::string> params;  // decoded query parameters
    std::string body;
    std::string content_type;
    std::string if_none_match;
    bool from_loopback = true;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

struct ServiceOptions {
    /// Reject POST/PATCH from non-loopback peers.
    bool mutations_local_only = false;
};

/// HTTP status for an error code.
int http_status(ErrorCode code) noexcept;

/// The JSON API, independent of any transport. Routes:
///
///   POST  /datasets                   CSV/TSV upload, JSON record list, or harvest config
///   POST  /datasets/{id}/harvest      harvest config; creates or refreshes
///   GET   /datasets/{id}
///   PATCH /datasets/{id}/schema       [{field, type?, enabled?}] or {"fields": [...]}
///   POST  /datasets/{id}/augment      augmentation pipeline
///   POST  /datasets/{id}/refresh      optional body replaces an uploaded source
///   POST  /datasets/{id}/views        view config
///   GET   /views/{id}
///   GET   /views/{id}/query           f.<field>=<key>, q=<text>, offset, limit, include=<view_id>
///   GET   /views/{id}/embed
///   GET   /datasets/{id}/export       format=csv|json plus filter parameters
///
/// Bodies are byte-identical for identical requests against the same
/// dataset version. Errors carry {"error": {code, message, locator}}.
class Service {
public:
    explicit Service(Registry& registry, ServiceOptions options = {});

    ApiResponse handle(const ApiRequest& request) const;

    /// The query response document; also the `initial` member of an embed.
    Json query(const std::string& view_id, const std::multimap<std::string, std::string>& params) const;
    Json embed(const std::string& view_id) const;

private:
    ApiResponse route(const ApiRequest& request) const;

    Registry& registry_;
    ServiceOptions options_;
};

}  // namespace facetview
