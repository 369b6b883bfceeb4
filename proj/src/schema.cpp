#include "facetview/schema.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "facetview/augment.hpp"
#include "facetview/text.hpp"

namespace facetview {

std::string_view to_string(FieldType type) noexcept
{
    switch (type) {
    case FieldType::Text: return "text";
    case FieldType::Number: return "number";
    case FieldType::DateTime: return "datetime";
    case FieldType::Location: return "location";
    case FieldType::Url: return "url";
    case FieldType::List: return "list";
    }
    return "text";
}

std::optional<FieldType> parse_field_type(std::string_view name) noexcept
{
    const std::string n = text::fold_case(name);
    if (n == "text") return FieldType::Text;
    if (n == "number") return FieldType::Number;
    if (n == "datetime" || n == "date" || n == "date/time") return FieldType::DateTime;
    if (n == "location") return FieldType::Location;
    if (n == "url") return FieldType::Url;
    if (n == "list") return FieldType::List;
    return std::nullopt;
}

std::string_view to_string(SourceDescriptor::Kind kind) noexcept
{
    switch (kind) {
    case SourceDescriptor::Kind::None: return "none";
    case SourceDescriptor::Kind::Delimited: return "delimited";
    case SourceDescriptor::Kind::RecordList: return "record_list";
    case SourceDescriptor::Kind::Harvest: return "harvest";
    }
    return "none";
}

std::optional<SourceDescriptor::Kind> parse_source_kind(std::string_view name) noexcept
{
    if (name == "none") return SourceDescriptor::Kind::None;
    if (name == "delimited") return SourceDescriptor::Kind::Delimited;
    if (name == "record_list") return SourceDescriptor::Kind::RecordList;
    if (name == "harvest") return SourceDescriptor::Kind::Harvest;
    return std::nullopt;
}

// ---------------------------------------------------------------- Decimal

std::optional<Decimal> Decimal::parse(std::string_view raw)
{
    std::string_view s = text::trim(raw);
    if (s.empty()) return std::nullopt;

    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }

    std::string digits;
    long point = 0;  // digits before the decimal point
    bool seen_point = false;
    bool any_digit = false;
    std::size_t i = 0;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c >= '0' && c <= '9') {
            digits.push_back(c);
            any_digit = true;
            if (!seen_point) ++point;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!any_digit) return std::nullopt;

    long exponent = 0;
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') return std::nullopt;
        ++i;
        bool exp_negative = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            exp_negative = s[i] == '-';
            ++i;
        }
        if (i >= s.size()) return std::nullopt;
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            exponent = exponent * 10 + (s[i] - '0');
            if (exponent > 1000) return std::nullopt;
        }
        if (exp_negative) exponent = -exponent;
    }
    point += exponent;

    // strip leading zeros (each one moves the point left) and trailing zeros
    std::size_t lead = 0;
    while (lead < digits.size() && digits[lead] == '0') ++lead;
    digits.erase(0, lead);
    point -= static_cast<long>(lead);
    while (!digits.empty() && digits.back() == '0') digits.pop_back();

    Decimal d;
    if (digits.empty()) {
        d.canonical_ = "0";
        return d;
    }
    const long len = static_cast<long>(digits.size());
    if (point > 1100 || point < -1100) return std::nullopt;

    std::string out;
    if (negative) out.push_back('-');
    if (point <= 0) {
        out += "0.";
        out.append(static_cast<std::size_t>(-point), '0');
        out += digits;
    } else if (point >= len) {
        out += digits;
        out.append(static_cast<std::size_t>(point - len), '0');
    } else {
        out.append(digits, 0, static_cast<std::size_t>(point));
        out.push_back('.');
        out.append(digits, static_cast<std::size_t>(point));
    }
    d.canonical_ = std::move(out);
    return d;
}

double Decimal::to_double() const
{
    return std::strtod(canonical_.c_str(), nullptr);
}

std::optional<std::int64_t> Decimal::scaled(int places) const
{
    std::string_view s = canonical_;
    const bool negative = !s.empty() && s.front() == '-';
    if (negative) s.remove_prefix(1);
    const auto dot = s.find('.');
    std::string whole(s.substr(0, dot));
    std::string frac = dot == std::string_view::npos ? std::string{} : std::string(s.substr(dot + 1));

    std::string digits = whole;
    for (int k = 0; k < places; ++k) digits.push_back(k < static_cast<int>(frac.size()) ? frac[static_cast<std::size_t>(k)] : '0');
    const bool round_up = static_cast<int>(frac.size()) > places && frac[static_cast<std::size_t>(places)] >= '5';

    std::int64_t value = 0;
    constexpr auto max = std::numeric_limits<std::int64_t>::max();
    for (char c : digits) {
        const int dgt = c - '0';
        if (value > (max - dgt) / 10) return std::nullopt;
        value = value * 10 + dgt;
    }
    if (round_up) {
        if (value == max) return std::nullopt;
        ++value;
    }
    return negative ? -value : value;
}

// ---------------------------------------------------------------- DateTime

namespace {

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
    std::int64_t year;
    unsigned month;
    unsigned day;
};

Civil civil_from_days(std::int64_t z)
{
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2), m, d};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

unsigned days_in_month(std::int64_t y, unsigned m)
{
    static constexpr unsigned table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2) {
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return leap ? 29 : 28;
    }
    return table[m - 1];
}

[[noreturn]] void unparseable(std::string_view raw)
{
    throw Error(ErrorCode::UnparseableDate, "unrecognized date '" + std::string(raw) + "'", std::string(raw));
}

[[noreturn]] void impossible(std::string_view raw, std::string_view what)
{
    throw Error(ErrorCode::ImpossibleDate, "impossible date '" + std::string(raw) + "': " + std::string(what),
                std::string(raw));
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    bool accept(char c)
    {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    std::optional<int> digits(std::size_t n)
    {
        if (pos_ + n > s_.size()) return std::nullopt;
        int v = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const char c = s_[pos_ + k];
            if (c < '0' || c > '9') return std::nullopt;
            v = v * 10 + (c - '0');
        }
        pos_ += n;
        return v;
    }
    void skip_digits()
    {
        while (!done() && peek() >= '0' && peek() <= '9') ++pos_;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

DateTime DateTime::from_civil(int year, unsigned month, unsigned day, int hour, int minute, int second)
{
    return DateTime{days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second};
}

int DateTime::year() const
{
    return static_cast<int>(civil_from_days(floor_div(seconds, 86400)).year);
}

std::string DateTime::iso() const
{
    const std::int64_t days = floor_div(seconds, 86400);
    const std::int64_t secs = seconds - days * 86400;
    const Civil c = civil_from_days(days);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld+00:00", static_cast<long long>(c.year),
                  c.month, c.day, static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                  static_cast<long long>(secs % 60));
    return buf;
}

DateTime parse_datetime(std::string_view raw)
{
    const std::string_view s = text::trim(raw);
    if (s.empty()) unparseable(raw);

    int year = 0;
    unsigned month = 1;
    unsigned day = 1;
    int hour = 0, minute = 0, second = 0;
    int offset_minutes = 0;

    const bool all_digits = std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (all_digits) {
        Cursor cur(s);
        if (s.size() != 4 && s.size() != 6 && s.size() != 8) unparseable(raw);
        year = *cur.digits(4);
        if (s.size() >= 6) month = static_cast<unsigned>(*cur.digits(2));
        if (s.size() == 8) day = static_cast<unsigned>(*cur.digits(2));
    } else {
        Cursor cur(s);
        const auto y = cur.digits(4);
        if (!y || !cur.accept('-')) unparseable(raw);
        year = *y;
        const auto m = cur.digits(2);
        if (!m) unparseable(raw);
        month = static_cast<unsigned>(*m);
        if (cur.accept('-')) {
            const auto d = cur.digits(2);
            if (!d) unparseable(raw);
            day = static_cast<unsigned>(*d);
            if (cur.accept('T') || cur.accept(' ')) {
                const auto hh = cur.digits(2);
                if (!hh || !cur.accept(':')) unparseable(raw);
                const auto mm = cur.digits(2);
                if (!mm) unparseable(raw);
                hour = *hh;
                minute = *mm;
                if (cur.accept(':')) {
                    const auto ss = cur.digits(2);
                    if (!ss) unparseable(raw);
                    second = *ss;
                    if (cur.accept('.')) {
                        if (cur.peek() < '0' || cur.peek() > '9') unparseable(raw);
                        cur.skip_digits();
                    }
                }
                if (cur.accept('Z')) {
                } else if (cur.peek() == '+' || cur.peek() == '-') {
                    const int sign = cur.peek() == '-' ? -1 : 1;
                    cur.accept(cur.peek());
                    const auto oh = cur.digits(2);
                    if (!oh) unparseable(raw);
                    int om = 0;
                    if (!cur.done()) {
                        cur.accept(':');
                        const auto omv = cur.digits(2);
                        if (!omv) unparseable(raw);
                        om = *omv;
                    }
                    if (*oh > 23 || om > 59) impossible(raw, "offset out of range");
                    offset_minutes = sign * (*oh * 60 + om);
                }
            }
        }
        if (!cur.done()) unparseable(raw);
    }

    if (month < 1 || month > 12) impossible(raw, "month out of range");
    if (day < 1 || day > days_in_month(year, month)) impossible(raw, "day out of range");
    if (hour > 23 || minute > 59 || second > 59) impossible(raw, "time out of range");

    DateTime dt = DateTime::from_civil(year, month, day, hour, minute, second);
    dt.seconds -= static_cast<std::int64_t>(offset_minutes) * 60;
    const int y = dt.year();
    if (y < 0 || y > 9999) impossible(raw, "year out of range after offset");
    return dt;
}

// ---------------------------------------------------------------- GeoPoint

std::optional<GeoPoint> GeoPoint::from_degrees(std::string_view lat, std::string_view lon)
{
    const auto dlat = Decimal::parse(lat);
    const auto dlon = Decimal::parse(lon);
    if (!dlat || !dlon) return std::nullopt;
    const auto la = dlat->scaled(5);
    const auto lo = dlon->scaled(5);
    if (!la || !lo) return std::nullopt;
    if (*la < -9000000 || *la > 9000000 || *lo < -18000000 || *lo > 18000000) return std::nullopt;
    return GeoPoint{*la, *lo};
}

std::optional<GeoPoint> GeoPoint::parse(std::string_view raw)
{
    const auto comma = raw.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    return from_degrees(raw.substr(0, comma), raw.substr(comma + 1));
}

namespace {

std::string fixed5(std::int64_t v)
{
    const bool negative = v < 0;
    const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-v) : static_cast<std::uint64_t>(v);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%llu.%05llu", negative ? "-" : "", static_cast<unsigned long long>(mag / 100000),
                  static_cast<unsigned long long>(mag % 100000));
    return buf;
}

}  // namespace

std::string GeoPoint::text() const
{
    return fixed5(lat_e5) + "," + fixed5(lon_e5);
}

// ---------------------------------------------------------------- Value

std::optional<FieldType> Value::kind() const noexcept
{
    switch (data_.index()) {
    case 1: return FieldType::Text;
    case 2: return FieldType::Number;
    case 3: return FieldType::DateTime;
    case 4: return FieldType::Location;
    case 5: return FieldType::Url;
    case 6: return FieldType::List;
    default: return std::nullopt;
    }
}

std::string Value::display() const
{
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(const TextValue& v) const { return v.text; }
        std::string operator()(const Decimal& v) const { return v.canonical(); }
        std::string operator()(const DateTime& v) const { return v.iso(); }
        std::string operator()(const GeoPoint& v) const { return v.text(); }
        std::string operator()(const UrlValue& v) const { return v.url; }
        std::string operator()(const ListValue& v) const { return text::join(v.items, kListJoiner); }
    };
    return std::visit(Visitor{}, data_);
}

std::vector<std::string> Value::facet_keys() const
{
    if (is_missing()) return {};
    if (const auto* l = get_if<ListValue>()) return l->items;
    return {display()};
}

// ---------------------------------------------------------------- Record / snapshot

const Value& Record::get(const std::string& field) const
{
    static const Value missing;
    const auto it = values_.find(field);
    return it == values_.end() ? missing : it->second;
}

void Record::set(const std::string& field, Value v)
{
    if (v.is_missing())
        values_.erase(field);
    else
        values_[field] = std::move(v);
}

const FieldSpec* DatasetSnapshot::field(std::string_view name) const noexcept
{
    for (const auto& f : schema)
        if (f.name == name) return &f;
    return nullptr;
}

FieldSpec* DatasetSnapshot::field(std::string_view name) noexcept
{
    for (auto& f : schema)
        if (f.name == name) return &f;
    return nullptr;
}

const Record* DatasetSnapshot::find_record(std::string_view id) const noexcept
{
    for (const auto& r : records)
        if (r.id() == id) return &r;
    return nullptr;
}

void DatasetSnapshot::validate() const
{
    std::unordered_set<std::string> names;
    for (const auto& f : schema)
        if (!names.insert(f.name).second)
            throw Error(ErrorCode::InvalidArgument, "duplicate field name '" + f.name + "'", f.name);
    std::unordered_set<std::string> ids;
    for (const auto& r : records) {
        if (!ids.insert(r.id()).second)
            throw Error(ErrorCode::DuplicateId, "duplicate record id '" + r.id() + "'", r.id());
        for (const auto& [name, value] : r.values())
            if (!names.count(name))
                throw Error(ErrorCode::UnknownField, "record '" + r.id() + "' has field '" + name + "' not in schema",
                            name);
    }
}

// ---------------------------------------------------------------- coerce

bool is_absolute_url(std::string_view raw) noexcept
{
    const auto sep = raw.find("://");
    if (sep == std::string_view::npos || sep == 0) return false;
    const auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
    if (!is_alpha(raw[0])) return false;
    for (std::size_t i = 1; i < sep; ++i) {
        const char c = raw[i];
        if (!is_alpha(c) && !(c >= '0' && c <= '9') && c != '+' && c != '-' && c != '.') return false;
    }
    if (sep + 3 >= raw.size()) return false;
    for (char c : raw)
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
    return true;
}

Value coerce(std::string_view raw, FieldType type, std::string_view field)
{
    if (text::is_blank(raw)) return {};

    const auto fail = [&](std::string_view what) -> Error {
        return Error(ErrorCode::CoercionError,
                     "field '" + std::string(field) + "': cannot read '" + std::string(raw) + "' as " + std::string(what),
                     std::string(field));
    };

    switch (type) {
    case FieldType::Text:
        return Value::text(std::string(raw));
    case FieldType::Number: {
        auto d = Decimal::parse(raw);
        if (!d) throw fail("number");
        return Value(std::move(*d));
    }
    case FieldType::DateTime:
        try {
            return Value(parse_datetime(raw));
        } catch (const Error&) {
            throw fail("date/time");
        }
    case FieldType::Location: {
        auto p = GeoPoint::parse(raw);
        if (!p) throw fail("location");
        return Value(*p);
    }
    case FieldType::Url: {
        const auto t = text::trim(raw);
        if (!is_absolute_url(t)) throw fail("url");
        return Value(UrlValue{std::string(t)});
    }
    case FieldType::List: {
        auto items = split_list(raw);
        if (items.empty()) return {};
        return Value::list(std::move(items));
    }
    }
    return {};
}

// ---------------------------------------------------------------- diff

ChangeSummary snapshot_diff(const DatasetSnapshot& before, const DatasetSnapshot& after)
{
    if (before.dataset_id != after.dataset_id)
        throw Error(ErrorCode::MismatchedDataset,
                    "cannot diff dataset '" + before.dataset_id + "' against '" + after.dataset_id + "'");

    std::unordered_map<std::string_view, const Record*> old_by_id;
    old_by_id.reserve(before.records.size());
    for (const auto& r : before.records) old_by_id.emplace(r.id(), &r);

    ChangeSummary out;
    std::unordered_set<std::string_view> seen;
    for (const auto& r : after.records) {
        seen.insert(r.id());
        const auto it = old_by_id.find(r.id());
        if (it == old_by_id.end())
            out.added.push_back(r.id());
        else if (!(it->second->values() == r.values()))
            out.modified.push_back(r.id());
    }
    for (const auto& r : before.records)
        if (!seen.count(r.id())) out.removed.push_back(r.id());

    std::sort(out.added.begin(), out.added.end());
    std::sort(out.removed.begin(), out.removed.end());
    std::sort(out.modified.begin(), out.modified.end());
    return out;
}

}  // namespace facetview
