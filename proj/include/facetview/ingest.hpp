#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facetview/schema.hpp"

namespace facetview {

struct ImportWarning {
    std::string locator;  // "row 3", "record oai:x:1", ...
    std::string message;

    friend bool operator==(const ImportWarning&, const ImportWarning&) = default;
};

/// rows_read == records_created + rows_skipped always holds.
struct ImportReport {
    std::size_t rows_read = 0;
    std::size_t records_created = 0;
    std::size_t rows_skipped = 0;
    std::vector<ImportWarning> warnings;
};

struct Imported {
    DatasetSnapshot snapshot;
    ImportReport report;
};

// ---------------------------------------------------------------- delimited files

struct DelimitedOptions {
    char delimiter = ',';
    bool header_row = true;
    /// Column holding record ids; when absent ids are "r<row number>".
    std::optional<std::string> id_column;
    /// Keep the id column as an ordinary field as well.
    bool keep_id_column = true;
};

/// RFC 4180 parsing (quotes, doubled quotes, embedded newlines, CRLF/LF),
/// UTF-8 with optional BOM. All fields come out as TEXT. Blank lines are
/// ignored. Ragged rows and rows without an id are skipped with a warning.
/// Throws EmptyInput, InvalidEncoding, MalformedDocument, DuplicateId.
Imported parse_delimited(std::string_view bytes, const DelimitedOptions& options = {},
                         const std::string& dataset_id = {});

/// Name of the id column written by write_delimited for this schema.
std::string export_id_column(const DatasetSnapshot& snapshot);

/// Writes `records` (or every record) as RFC 4180 text with CRLF line ends:
/// an id column (see export_id_column) followed by every schema field.
std::string write_delimited(const DatasetSnapshot& snapshot, const std::vector<const Record*>* records = nullptr,
                            char delimiter = ',');

// ---------------------------------------------------------------- record-list documents

struct RecordListOptions {
    /// Key whose value becomes the record id; absent: "r1", "r2", ...
    std::optional<std::string> id_key;
};

/// A JSON array of flat objects with string/number/boolean/null values.
/// Union of keys (first-seen order) becomes the schema, all TEXT.
/// Throws MalformedDocument, NonScalarValue, InvalidEncoding, DuplicateId.
Imported parse_record_list(std::string_view bytes, const RecordListOptions& options = {},
                           const std::string& dataset_id = {});

/// Flat JSON array: {"record_id": ..., field: string | [strings]}.
std::string write_record_list(const DatasetSnapshot& snapshot, const std::vector<const Record*>* records = nullptr);

// ---------------------------------------------------------------- OAI-PMH

struct HarvestConfig {
    std::string base_url;
    std::string metadata_prefix = "oai_dc";
    std::optional<std::string> set_spec;
    /// Source element ("dc:title" or "title") -> field name. Unmapped
    /// elements use their capitalized local name ("dc:title" -> "Title").
    std::map<std::string, std::string> field_map;

    /// Throws InvalidArgument unless base_url is an absolute http(s) URL.
    void validate() const;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Performs one GET. Throws NetworkError on transport failure.
using HttpGet = std::function<HttpResponse(const std::string& url)>;

/// cpp-httplib backed GET with a 10 s timeout.
HttpGet default_http_get();

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};  // doubles per retry
    std::function<void(std::chrono::milliseconds)> sleep;  // default: this_thread::sleep_for
};

/// One parsed ListRecords response.
struct OaiPage {
    struct Item {
        std::string identifier;
        bool deleted = false;
        /// (qualified element name, text) in document order
        std::vector<std::pair<std::string, std::string>> elements;
    };
    std::vector<Item> items;
    std::optional<std::string> resumption_token;  // present and non-empty: more pages
    std::optional<std::string> error_code;
    std::string error_message;
};

/// Throws ProtocolError when the document is not an OAI-PMH response.
OaiPage parse_list_records(std::string_view xml);

/// ListRecords URL for the first page (no token) or a continuation.
std::string list_records_url(const HarvestConfig& config, const std::optional<std::string>& token);

struct HarvestStats {
    std::size_t pages = 0;
    std::size_t requests = 0;  // including retries
};

/// Follows resumptionTokens until exhausted. Records are keyed by OAI
/// identifier (first occurrence wins); deleted records are skipped;
/// repeated elements make the field a LIST. noRecordsMatch yields an empty
/// dataset with a warning. Throws ProtocolError, NetworkError, TokenLoop.
Imported harvest_oai(const HarvestConfig& config, const HttpGet& get = default_http_get(),
                     const RetryPolicy& retry = {}, const std::string& dataset_id = {},
                     HarvestStats* stats = nullptr);

std::string percent_encode(std::string_view s);
std::string percent_decode(std::string_view s, bool plus_as_space = true);

}  // namespace facetview
