#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <httplib.h>

#include "facetview/ingest.hpp"
#include "facetview/text.hpp"

namespace facetview {

namespace pt = boost::property_tree;

namespace {

std::string_view local_name(std::string_view qualified)
{
    const auto colon = qualified.rfind(':');
    return colon == std::string_view::npos ? qualified : qualified.substr(colon + 1);
}

bool is_element(const std::string& key)
{
    return key != "<xmlattr>" && key != "<xmlcomment>";
}

const pt::ptree* child_by_local(const pt::ptree& node, std::string_view name)
{
    for (const auto& [key, child] : node)
        if (is_element(key) && local_name(key) == name) return &child;
    return nullptr;
}

std::string attribute(const pt::ptree& node, const std::string& name)
{
    return node.get<std::string>("<xmlattr>." + name, "");
}

}  // namespace

std::string percent_encode(std::string_view s)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
            c == '_' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

std::string percent_decode(std::string_view s, bool plus_as_space)
{
    const auto hexval = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            const int hi = hexval(s[i + 1]);
            const int lo = hexval(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(plus_as_space && s[i] == '+' ? ' ' : s[i]);
    }
    return out;
}

void HarvestConfig::validate() const
{
    if (!is_absolute_url(base_url) ||
        !(text::starts_with_ci(base_url, "http://") || text::starts_with_ci(base_url, "https://")))
        throw Error(ErrorCode::InvalidArgument, "base_url must be an absolute http(s) URL", "base_url");
    if (metadata_prefix.empty())
        throw Error(ErrorCode::InvalidArgument, "metadata_prefix must not be empty", "metadata_prefix");
}

HttpGet default_http_get()
{
    return [](const std::string& url) -> HttpResponse {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw Error(ErrorCode::NetworkError, "bad URL '" + url + "'", url);
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (text::starts_with_ci(url, "https://"))
            throw Error(ErrorCode::NetworkError, "https is not supported by this build", url);
#endif
        httplib::Client client(origin);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(10, 0);
        client.set_follow_location(true);
        auto res = client.Get(path);
        if (!res)
            throw Error(ErrorCode::NetworkError, "GET " + url + " failed: " + httplib::to_string(res.error()), url);
        return HttpResponse{res->status, res->body};
    };
}

OaiPage parse_list_records(std::string_view xml)
{
    pt::ptree doc;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, doc);
    } catch (const pt::xml_parser_error& e) {
        throw Error(ErrorCode::ProtocolError, std::string("response is not well-formed XML: ") + e.what());
    }
    const pt::ptree* root = child_by_local(doc, "OAI-PMH");
    if (!root) throw Error(ErrorCode::ProtocolError, "response has no OAI-PMH root element");

    OaiPage page;
    if (const auto* err = child_by_local(*root, "error")) {
        page.error_code = attribute(*err, "code");
        page.error_message = std::string(text::trim(err->data()));
        return page;
    }
    const pt::ptree* list = child_by_local(*root, "ListRecords");
    if (!list) throw Error(ErrorCode::ProtocolError, "response has neither ListRecords nor error");

    for (const auto& [key, node] : *list) {
        if (!is_element(key)) continue;
        const auto name = local_name(key);
        if (name == "resumptionToken") {
            const auto token = text::trim(node.data());
            if (!token.empty()) page.resumption_token = std::string(token);
            continue;
        }
        if (name != "record") continue;
        OaiPage::Item item;
        if (const auto* header = child_by_local(node, "header")) {
            item.deleted = attribute(*header, "status") == "deleted";
            if (const auto* id = child_by_local(*header, "identifier"))
                item.identifier = std::string(text::trim(id->data()));
        }
        if (const auto* metadata = child_by_local(node, "metadata")) {
            for (const auto& [mkey, container] : *metadata) {
                if (!is_element(mkey)) continue;
                for (const auto& [ekey, element] : container) {
                    if (!is_element(ekey)) continue;
                    const auto value = text::trim(element.data());
                    if (!value.empty()) item.elements.emplace_back(ekey, std::string(value));
                }
                break;  // a record carries one metadata container
            }
        }
        page.items.push_back(std::move(item));
    }
    return page;
}

std::string list_records_url(const HarvestConfig& config, const std::optional<std::string>& token)
{
    std::string url = config.base_url;
    url += url.find('?') == std::string::npos ? '?' : '&';
    url += "verb=ListRecords&";
    if (token) {
        url += "resumptionToken=" + percent_encode(*token);
    } else {
        url += "metadataPrefix=" + percent_encode(config.metadata_prefix);
        if (config.set_spec) url += "&set=" + percent_encode(*config.set_spec);
    }
    return url;
}

namespace {

std::string fetch_with_retry(const std::string& url, const HttpGet& get, const RetryPolicy& retry,
                             HarvestStats& stats)
{
    auto backoff = retry.initial_backoff;
    std::string last_error;
    const int attempts = std::max(1, retry.attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        ++stats.requests;
        try {
            const auto res = get(url);
            if (res.status == 200) return res.body;
            last_error = "HTTP status " + std::to_string(res.status);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NetworkError) throw;
            last_error = e.what();
        }
        if (attempt < attempts) {
            if (retry.sleep)
                retry.sleep(backoff);
            else
                std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw Error(ErrorCode::NetworkError,
                "GET " + url + " failed after " + std::to_string(attempts) + " attempts: " + last_error, url);
}

std::string field_for(const HarvestConfig& config, const std::string& element)
{
    if (const auto it = config.field_map.find(element); it != config.field_map.end()) return it->second;
    const std::string local(local_name(element));
    if (const auto it = config.field_map.find(local); it != config.field_map.end()) return it->second;
    std::string name = local;
    if (!name.empty() && name[0] >= 'a' && name[0] <= 'z') name[0] = static_cast<char>(name[0] - 'a' + 'A');
    return name;
}

}  // namespace

Imported harvest_oai(const HarvestConfig& config, const HttpGet& get, const RetryPolicy& retry,
                     const std::string& dataset_id, HarvestStats* stats_out)
{
    config.validate();
    HarvestStats stats;

    Imported out;
    out.snapshot.dataset_id = dataset_id;
    out.snapshot.version = 1;
    out.snapshot.source.kind = SourceDescriptor::Kind::Harvest;
    out.snapshot.source.location = config.base_url;

    std::vector<std::string> field_order;
    std::unordered_map<std::string, bool> field_repeats;
    std::vector<std::pair<std::string, std::map<std::string, std::vector<std::string>>>> collected;
    std::set<std::string> ids;
    std::set<std::string> seen_tokens;
    std::optional<std::string> token;

    for (;;) {
        const std::string url = list_records_url(config, token);
        const std::string body = fetch_with_retry(url, get, retry, stats);
        ++stats.pages;
        const OaiPage page = parse_list_records(body);

        if (page.error_code) {
            if (*page.error_code == "noRecordsMatch") {
                out.report.warnings.push_back({"page " + std::to_string(stats.pages), "noRecordsMatch"});
                break;
            }
            throw Error(ErrorCode::ProtocolError,
                        "OAI-PMH error " + *page.error_code + (page.error_message.empty() ? "" : ": " + page.error_message),
                        *page.error_code);
        }

        for (const auto& item : page.items) {
            ++out.report.rows_read;
            const std::string loc = "record " + (item.identifier.empty() ? "#" + std::to_string(out.report.rows_read)
                                                                         : item.identifier);
            if (item.deleted) {
                ++out.report.rows_skipped;
                out.report.warnings.push_back({loc, "deleted record skipped"});
                continue;
            }
            if (item.identifier.empty()) {
                ++out.report.rows_skipped;
                out.report.warnings.push_back({loc, "record without identifier skipped"});
                continue;
            }
            if (!ids.insert(item.identifier).second) {
                ++out.report.rows_skipped;
                out.report.warnings.push_back({loc, "duplicate identifier; first occurrence kept"});
                continue;
            }
            std::map<std::string, std::vector<std::string>> values;
            for (const auto& [element, value] : item.elements) {
                const std::string field = field_for(config, element);
                if (!field_repeats.count(field)) {
                    field_repeats[field] = false;
                    field_order.push_back(field);
                }
                auto& slot = values[field];
                slot.push_back(value);
                if (slot.size() > 1) field_repeats[field] = true;
            }
            collected.emplace_back(item.identifier, std::move(values));
            ++out.report.records_created;
        }

        if (!page.resumption_token) break;
        if (!seen_tokens.insert(*page.resumption_token).second)
            throw Error(ErrorCode::TokenLoop, "resumptionToken '" + *page.resumption_token + "' returned twice",
                        *page.resumption_token);
        token = page.resumption_token;
    }

    for (const auto& name : field_order) {
        const bool list = field_repeats[name];
        out.snapshot.schema.push_back(FieldSpec{name, list ? FieldType::List : FieldType::Text, true, list, false});
    }
    for (auto& [id, values] : collected) {
        Record rec(id);
        for (auto& [field, items] : values) {
            if (field_repeats[field])
                rec.set(field, Value::list(std::move(items)));
            else
                rec.set(field, Value::text(std::move(items.front())));
        }
        out.snapshot.records.push_back(std::move(rec));
    }
    if (stats_out) *stats_out = stats;
    return out;
}

}  // namespace facetview
