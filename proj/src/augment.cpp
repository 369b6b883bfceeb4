#include "facetview/augment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "facetview/text.hpp"

namespace facetview {

// ---------------------------------------------------------------- gazetteer

Gazetteer Gazetteer::parse(std::string_view tsv)
{
    Gazetteer g;
    tsv = text::strip_bom(tsv);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= tsv.size()) {
        auto end = tsv.find('\n', pos);
        if (end == std::string_view::npos) end = tsv.size();
        std::string_view line = tsv.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::is_blank(line) || text::trim(line).front() == '#') {
            if (end == tsv.size()) break;
            continue;
        }
        const std::string locator = "line " + std::to_string(line_no);
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos)
            throw Error(ErrorCode::MalformedDocument, "gazetteer " + locator + ": expected aliases<TAB>lat<TAB>lon",
                        locator);
        Entry e;
        std::string_view aliases = line.substr(0, t1);
        std::size_t a = 0;
        while (a <= aliases.size()) {
            auto bar = aliases.find('|', a);
            if (bar == std::string_view::npos) bar = aliases.size();
            const auto alias = text::trim(aliases.substr(a, bar - a));
            if (!alias.empty()) e.aliases.emplace_back(alias);
            a = bar + 1;
        }
        if (e.aliases.empty())
            throw Error(ErrorCode::MalformedDocument, "gazetteer " + locator + ": no aliases", locator);
        const auto point = GeoPoint::from_degrees(line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1));
        if (!point)
            throw Error(ErrorCode::MalformedDocument, "gazetteer " + locator + ": bad coordinates", locator);
        e.point = *point;
        try {
            g.add(std::move(e));
        } catch (const Error& err) {
            throw Error(ErrorCode::MalformedDocument, "gazetteer " + locator + ": " + err.what(), locator);
        }
        if (end == tsv.size()) break;
    }
    return g;
}

Gazetteer Gazetteer::load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open gazetteer '" + path + "'", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Gazetteer::add(Entry entry)
{
    for (const auto& alias : entry.aliases) {
        const auto key = text::normalize_name(alias);
        if (by_alias_.count(key)) throw Error(ErrorCode::MalformedDocument, "duplicate alias '" + alias + "'", alias);
    }
    // aliases repeated within one entry are harmless
    for (const auto& alias : entry.aliases) by_alias_.emplace(text::normalize_name(alias), entries_.size());
    entries_.push_back(std::move(entry));
}

std::optional<GeoPoint> Gazetteer::lookup(std::string_view place) const
{
    const auto it = by_alias_.find(text::normalize_name(place));
    if (it == by_alias_.end()) return std::nullopt;
    return entries_[it->second].point;
}

std::vector<std::string> Gazetteer::aliases_at(const GeoPoint& p) const
{
    std::vector<std::string> out;
    for (const auto& e : entries_)
        if (e.point == p) out.insert(out.end(), e.aliases.begin(), e.aliases.end());
    return out;
}

// ---------------------------------------------------------------- single values

Value normalize_date(std::string_view raw)
{
    return Value(parse_datetime(raw));
}

Value geocode(std::string_view place, const Gazetteer& gazetteer)
{
    if (const auto p = gazetteer.lookup(place)) return Value(*p);
    // already a coordinate pair (our own output)
    if (const auto p = GeoPoint::parse(place)) return Value(*p);
    throw Error(ErrorCode::Unresolved, "place '" + std::string(place) + "' not in gazetteer", std::string(place));
}

const std::vector<DelimiterPattern>& default_delimiters()
{
    static const std::vector<DelimiterPattern> preset = {
        {"\xE2\x80\x94", "--"},  // em-dash
        {";"},
        {","},
    };
    return preset;
}

std::optional<std::size_t> detect_delimiter(std::string_view raw, const std::vector<DelimiterPattern>& patterns)
{
    for (std::size_t i = 0; i < patterns.size(); ++i)
        for (const auto& spelling : patterns[i])
            if (!spelling.empty() && raw.find(spelling) != std::string_view::npos) return i;
    return std::nullopt;
}

namespace {

std::vector<std::string> split_on(std::string_view raw, const DelimiterPattern& pattern)
{
    std::vector<std::string> out;
    const auto flush = [&](std::string_view seg) {
        const auto t = text::trim(seg);
        if (!t.empty()) out.emplace_back(t);
    };
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < raw.size()) {
        std::size_t matched = 0;
        for (const auto& spelling : pattern) {
            if (!spelling.empty() && raw.compare(i, spelling.size(), spelling) == 0) {
                matched = spelling.size();
                break;
            }
        }
        if (matched) {
            flush(raw.substr(start, i - start));
            i += matched;
            start = i;
        } else {
            ++i;
        }
    }
    flush(raw.substr(start));
    return out;
}

}  // namespace

std::vector<std::string> split_list(std::string_view raw, const std::vector<DelimiterPattern>& patterns)
{
    const auto which = detect_delimiter(raw, patterns);
    if (!which) {
        const auto t = text::trim(raw);
        if (t.empty()) return {};
        return {std::string(t)};
    }
    return split_on(raw, patterns[*which]);
}

std::vector<std::string> split_heading(std::string_view heading)
{
    return split_on(heading, default_delimiters().front());
}

Value merge_fields(const std::vector<const Value*>& values, std::string_view separator)
{
    std::vector<std::string> parts;
    for (const auto* v : values)
        if (v && !v->is_missing()) parts.push_back(v->display());
    if (parts.empty()) return {};
    return Value::text(text::join(parts, separator));
}

Value replace_values(const Value& value, const ReplacementMap& mapping, std::vector<std::size_t>* hits)
{
    const auto replace_one = [&](const std::string& s) -> const std::string* {
        for (std::size_t i = 0; i < mapping.size(); ++i) {
            if (mapping[i].first == s) {
                if (hits) ++(*hits)[i];
                return &mapping[i].second;
            }
        }
        return nullptr;
    };
    if (hits && hits->size() < mapping.size()) hits->resize(mapping.size());

    if (const auto* t = value.get_if<TextValue>()) {
        if (const auto* r = replace_one(t->text)) return Value::text(*r);
        return value;
    }
    if (const auto* l = value.get_if<ListValue>()) {
        ListValue out = *l;
        for (auto& item : out.items)
            if (const auto* r = replace_one(item)) item = *r;
        return Value(std::move(out));
    }
    return value;
}

ReplacementMap translation_status_preset()
{
    return {{"checked", "Translation Available"}, {"unchecked", "No Translation"}};
}

ReplacementMap translation_status_alt_preset()
{
    return {{"checked", "Translation Available"}, {"unchecked", "Not Translated"}};
}

// ---------------------------------------------------------------- pipeline

std::string_view to_string(AugmentKind kind) noexcept
{
    switch (kind) {
    case AugmentKind::NormalizeDate: return "normalize_date";
    case AugmentKind::Geocode: return "geocode";
    case AugmentKind::SplitList: return "split_list";
    case AugmentKind::SplitHeading: return "split_heading";
    case AugmentKind::MergeFields: return "merge_fields";
    case AugmentKind::ReplaceValues: return "replace_values";
    }
    return "normalize_date";
}

std::optional<AugmentKind> parse_augment_kind(std::string_view name) noexcept
{
    const std::string n = text::fold_case(name);
    if (n == "normalize_date" || n == "dates" || n == "date") return AugmentKind::NormalizeDate;
    if (n == "geocode" || n == "location") return AugmentKind::Geocode;
    if (n == "split_list" || n == "split" || n == "list") return AugmentKind::SplitList;
    if (n == "split_heading" || n == "heading" || n == "headings") return AugmentKind::SplitHeading;
    if (n == "merge_fields" || n == "merge") return AugmentKind::MergeFields;
    if (n == "replace_values" || n == "replace") return AugmentKind::ReplaceValues;
    return std::nullopt;
}

namespace {

void require_types(const AugmentationStep& step, const FieldSpec& field, std::initializer_list<FieldType> allowed)
{
    if (std::find(allowed.begin(), allowed.end(), field.type) != allowed.end()) return;
    throw Error(ErrorCode::TypeConflict,
                std::string(to_string(step.kind)) + " cannot read " + std::string(to_string(field.type)) +
                    " field '" + field.name + "'",
                field.name);
}

void require_source_count(const AugmentationStep& step, std::size_t min, std::size_t max)
{
    const auto n = step.source_fields.size();
    if (n < min || n > max)
        throw Error(ErrorCode::InvalidArgument,
                    std::string(to_string(step.kind)) + ": wrong number of source fields (" + std::to_string(n) + ")");
}

}  // namespace

AugmentResult apply_pipeline(const DatasetSnapshot& snapshot, const std::vector<AugmentationStep>& steps,
                             const Gazetteer* gazetteer)
{
    AugmentResult result{snapshot, {}};
    DatasetSnapshot& snap = result.snapshot;
    snap.version = snapshot.version + 1;

    for (std::size_t si = 0; si < steps.size(); ++si) {
        const auto& step = steps[si];
        if (step.source_fields.empty())
            throw Error(ErrorCode::InvalidArgument, std::string(to_string(step.kind)) + ": no source fields");

        std::vector<FieldSpec> sources;
        for (const auto& name : step.source_fields) {
            const auto* f = snap.field(name);
            if (!f) throw Error(ErrorCode::UnknownField, "unknown field '" + name + "'", name);
            sources.push_back(*f);
        }
        const std::string target = step.target();

        FieldSpec out_spec{target, FieldType::Text, true, false, false};
        if (const auto* existing = snap.field(target)) out_spec = *existing;
        out_spec.enabled = true;
        out_spec.multivalued = false;
        out_spec.fold_case = false;

        const auto warn = [&](const Record& r, std::string msg) {
            result.report.warnings.push_back({si, r.id(), std::move(msg)});
        };

        switch (step.kind) {
        case AugmentKind::NormalizeDate: {
            require_source_count(step, 1, 1);
            require_types(step, sources[0], {FieldType::Text, FieldType::Number, FieldType::DateTime});
            out_spec.type = FieldType::DateTime;
            for (auto& r : snap.records) {
                const Value& v = r.get(step.source_fields[0]);
                if (v.is_missing()) {
                    r.erase(target);
                } else if (v.get_if<DateTime>()) {
                    r.set(target, v);
                } else {
                    try {
                        r.set(target, normalize_date(v.display()));
                    } catch (const Error& e) {
                        warn(r, e.what());
                    }
                }
            }
            break;
        }
        case AugmentKind::Geocode: {
            require_source_count(step, 1, step.source_fields.size());
            for (const auto& s : sources) require_types(step, s, {FieldType::Text, FieldType::Location});
            if (!gazetteer) throw Error(ErrorCode::InvalidArgument, "geocode step needs a gazetteer");
            out_spec.type = FieldType::Location;
            for (auto& r : snap.records) {
                if (sources.size() == 1) {
                    const Value& v = r.get(step.source_fields[0]);
                    if (v.get_if<GeoPoint>()) {
                        r.set(target, v);
                        continue;
                    }
                }
                std::vector<std::string> parts;
                for (const auto& name : step.source_fields) {
                    const Value& v = r.get(name);
                    if (!v.is_missing()) parts.push_back(v.display());
                }
                if (parts.empty()) {
                    r.erase(target);
                    continue;
                }
                try {
                    r.set(target, geocode(text::join(parts, ", "), *gazetteer));
                } catch (const Error& e) {
                    warn(r, e.what());
                }
            }
            break;
        }
        case AugmentKind::SplitList:
        case AugmentKind::SplitHeading: {
            require_source_count(step, 1, 1);
            require_types(step, sources[0], {FieldType::Text, FieldType::List});
            const bool heading = step.kind == AugmentKind::SplitHeading;
            const auto& patterns = step.delimiters.empty() ? default_delimiters() : step.delimiters;
            out_spec.type = FieldType::List;
            out_spec.multivalued = true;
            out_spec.fold_case = heading;
            for (auto& r : snap.records) {
                const Value& v = r.get(step.source_fields[0]);
                std::vector<std::string> items;
                if (const auto* l = v.get_if<ListValue>()) {
                    if (!heading) {
                        r.set(target, v);
                        continue;
                    }
                    for (const auto& item : l->items) {
                        auto parts = split_heading(item);
                        items.insert(items.end(), parts.begin(), parts.end());
                    }
                } else if (!v.is_missing()) {
                    items = heading ? split_heading(v.display()) : split_list(v.display(), patterns);
                }
                if (items.empty())
                    r.erase(target);
                else
                    r.set(target, Value::list(std::move(items)));
            }
            break;
        }
        case AugmentKind::MergeFields: {
            require_source_count(step, 2, step.source_fields.size());
            out_spec.type = FieldType::Text;
            for (auto& r : snap.records) {
                std::vector<Value> copies;
                for (const auto& name : step.source_fields) copies.push_back(r.get(name));
                std::vector<const Value*> ptrs;
                for (const auto& c : copies) ptrs.push_back(&c);
                r.set(target, merge_fields(ptrs, step.separator));
            }
            break;
        }
        case AugmentKind::ReplaceValues: {
            require_source_count(step, 1, 1);
            require_types(step, sources[0], {FieldType::Text, FieldType::List});
            if (step.mapping.empty()) throw Error(ErrorCode::InvalidArgument, "replace_values: empty mapping");
            std::set<std::string> keys;
            for (const auto& [from, to] : step.mapping)
                if (!keys.insert(from).second)
                    throw Error(ErrorCode::InvalidArgument, "replace_values: duplicate key '" + from + "'", from);
            out_spec.type = sources[0].type;
            out_spec.multivalued = sources[0].multivalued;
            out_spec.fold_case = sources[0].fold_case;
            auto& hits = result.report.replacement_counts[si];
            hits.assign(step.mapping.size(), 0);
            for (auto& r : snap.records) {
                const Value& v = r.get(step.source_fields[0]);
                if (v.is_missing()) {
                    r.erase(target);
                    continue;
                }
                r.set(target, replace_values(v, step.mapping, &hits));
            }
            break;
        }
        }

        if (auto* existing = snap.field(target))
            *existing = out_spec;
        else
            snap.schema.push_back(out_spec);
    }
    return result;
}

}  // namespace facetview
