#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "facetview/error.hpp"

namespace facetview {

enum class FieldType { Text, Number, DateTime, Location, Url, List };

std::string_view to_string(FieldType type) noexcept;
std::optional<FieldType> parse_field_type(std::string_view name) noexcept;

/// Exact decimal number held in canonical text form: no leading '+', no
/// redundant zeros, no exponent, "0" for zero. Equality is string equality
/// of the canonical form.
class Decimal {
public:
    static std::optional<Decimal> parse(std::string_view raw);

    const std::string& canonical() const noexcept { return canonical_; }
    double to_double() const;

    /// Value multiplied by 10^places, rounded half away from zero.
    /// nullopt when the result does not fit in 64 bits.
    std::optional<std::int64_t> scaled(int places) const;

    friend bool operator==(const Decimal&, const Decimal&) = default;

private:
    std::string canonical_;
};

/// A UTC instant with one-second resolution.
struct DateTime {
    std::int64_t seconds = 0;  // since 1970-01-01T00:00:00Z

    static DateTime from_civil(int year, unsigned month, unsigned day,
                               int hour = 0, int minute = 0, int second = 0);

    int year() const;
    /// "YYYY-MM-DDTHH:MM:SS+00:00"
    std::string iso() const;

    friend auto operator<=>(const DateTime&, const DateTime&) = default;
};

/// Parses the accepted date spellings (YYYY, YYYYMM, YYYYMMDD, YYYY-MM,
/// YYYY-MM-DD, ISO instants with Z / +HH:MM / +HHMM offsets). Missing
/// month/day pad to 01. Throws UnparseableDate or ImpossibleDate.
DateTime parse_datetime(std::string_view raw);

/// Latitude/longitude in units of 1e-5 degrees.
struct GeoPoint {
    std::int64_t lat_e5 = 0;
    std::int64_t lon_e5 = 0;

    static std::optional<GeoPoint> from_degrees(std::string_view lat, std::string_view lon);
    static std::optional<GeoPoint> parse(std::string_view raw);  // "lat,lon"

    double lat() const noexcept { return static_cast<double>(lat_e5) / 1e5; }
    double lon() const noexcept { return static_cast<double>(lon_e5) / 1e5; }
    /// "38.89511,-77.03637"
    std::string text() const;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct TextValue {
    std::string text;
    friend bool operator==(const TextValue&, const TextValue&) = default;
};

struct UrlValue {
    std::string url;
    friend bool operator==(const UrlValue&, const UrlValue&) = default;
};

struct ListValue {
    std::vector<std::string> items;
    friend bool operator==(const ListValue&, const ListValue&) = default;
};

/// Separator used when a list is flattened to one string (display, export).
inline constexpr std::string_view kListJoiner = "; ";

class Value {
public:
    using Storage = std::variant<std::monostate, TextValue, Decimal, DateTime, GeoPoint, UrlValue, ListValue>;

    Value() = default;
    Value(TextValue v) : data_(std::move(v)) {}
    Value(Decimal v) : data_(std::move(v)) {}
    Value(DateTime v) : data_(v) {}
    Value(GeoPoint v) : data_(v) {}
    Value(UrlValue v) : data_(std::move(v)) {}
    Value(ListValue v) : data_(std::move(v)) {}

    static Value text(std::string s) { return Value(TextValue{std::move(s)}); }
    static Value list(std::vector<std::string> items) { return Value(ListValue{std::move(items)}); }

    bool is_missing() const noexcept { return std::holds_alternative<std::monostate>(data_); }
    const Storage& storage() const noexcept { return data_; }

    template <class T>
    const T* get_if() const noexcept { return std::get_if<T>(&data_); }

    /// Kind of the stored value; nullopt when missing.
    std::optional<FieldType> kind() const noexcept;

    /// Single-string rendering; lists are joined with kListJoiner.
    std::string display() const;

    /// The strings a facet buckets this value under: the list items for a
    /// list, otherwise the display form. Empty for missing.
    std::vector<std::string> facet_keys() const;

    friend bool operator==(const Value&, const Value&) = default;

private:
    Storage data_;
};

struct FieldSpec {
    std::string name;
    FieldType type = FieldType::Text;
    bool enabled = true;
    bool multivalued = false;
    /// Facet keys are compared case-insensitively (set for decomposed headings).
    bool fold_case = false;

    friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

class Record {
public:
    Record() = default;
    explicit Record(std::string id) : id_(std::move(id)) {}

    const std::string& id() const noexcept { return id_; }

    /// Absent fields read as missing.
    const Value& get(const std::string& field) const;
    /// Setting a missing value erases the field.
    void set(const std::string& field, Value v);
    void erase(const std::string& field) { values_.erase(field); }

    const std::map<std::string, Value>& values() const noexcept { return values_; }

    friend bool operator==(const Record&, const Record&) = default;

private:
    std::string id_;
    std::map<std::string, Value> values_;
};

/// Where a dataset's records came from; enough to re-run the import.
struct SourceDescriptor {
    enum class Kind { None, Delimited, RecordList, Harvest };
    Kind kind = Kind::None;
    std::string location;                       // file path or base URL
    std::map<std::string, std::string> options;  // import options, stringly typed

    friend bool operator==(const SourceDescriptor&, const SourceDescriptor&) = default;
};

std::string_view to_string(SourceDescriptor::Kind kind) noexcept;
std::optional<SourceDescriptor::Kind> parse_source_kind(std::string_view name) noexcept;

struct DatasetSnapshot {
    std::string dataset_id;
    std::uint64_t version = 1;
    std::vector<FieldSpec> schema;
    std::vector<Record> records;
    SourceDescriptor source;

    const FieldSpec* field(std::string_view name) const noexcept;
    FieldSpec* field(std::string_view name) noexcept;
    const Record* find_record(std::string_view id) const noexcept;

    /// Checks unique record ids, unique field names and that every stored
    /// value names a schema field. Throws DuplicateId / UnknownField.
    void validate() const;
};

/// Turns raw text into a typed value. Empty or whitespace-only input is
/// missing. Text never fails. Lists split with the default delimiter preset.
/// Throws CoercionError (locator = field) for unparseable input.
Value coerce(std::string_view raw, FieldType type, std::string_view field = {});

bool is_absolute_url(std::string_view raw) noexcept;

struct ChangeSummary {
    std::vector<std::string> added;
    std::vector<std::string> removed;
    std::vector<std::string> modified;

    bool empty() const noexcept { return added.empty() && removed.empty() && modified.empty(); }
    friend bool operator==(const ChangeSummary&, const ChangeSummary&) = default;
};

/// Record-level difference from `before` to `after`; id lists are sorted.
/// Throws MismatchedDataset when the dataset ids differ.
ChangeSummary snapshot_diff(const DatasetSnapshot& before, const DatasetSnapshot& after);

}  // namespace facetview
