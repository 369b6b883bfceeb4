#include <unordered_set>

#include <json.hpp>

#include "facetview/ingest.hpp"
#include "facetview/text.hpp"

namespace facetview {

using ojson = nlohmann::ordered_json;

namespace {

std::optional<std::string> scalar_text(const ojson& v)
{
    switch (v.type()) {
    case ojson::value_t::null: return std::string{};
    case ojson::value_t::string: return v.get<std::string>();
    case ojson::value_t::boolean: return v.get<bool>() ? "true" : "false";
    case ojson::value_t::number_integer:
    case ojson::value_t::number_unsigned:
    case ojson::value_t::number_float: return v.dump();
    default: return std::nullopt;
    }
}

}  // namespace

Imported parse_record_list(std::string_view bytes, const RecordListOptions& options, const std::string& dataset_id)
{
    if (!text::is_valid_utf8(bytes)) throw Error(ErrorCode::InvalidEncoding, "input is not valid UTF-8");
    bytes = text::strip_bom(bytes);
    if (text::is_blank(bytes)) throw Error(ErrorCode::EmptyInput, "empty record-list document");

    ojson doc;
    try {
        doc = ojson::parse(bytes.begin(), bytes.end());
    } catch (const ojson::parse_error& e) {
        const std::string loc = "byte " + std::to_string(e.byte);
        throw Error(ErrorCode::MalformedDocument, "record list is not valid JSON: " + std::string(e.what()), loc);
    }
    if (!doc.is_array()) throw Error(ErrorCode::MalformedDocument, "record list must be a JSON array", "document");

    Imported out;
    out.snapshot.dataset_id = dataset_id;
    out.snapshot.version = 1;
    std::unordered_set<std::string> fields;
    std::unordered_set<std::string> ids;

    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& obj = doc[i];
        const std::string loc = "record " + std::to_string(i + 1);
        if (!obj.is_object()) throw Error(ErrorCode::MalformedDocument, loc + " is not an object", loc);
        ++out.report.rows_read;

        std::string id;
        if (options.id_key) {
            const auto it = obj.find(*options.id_key);
            std::optional<std::string> raw;
            if (it != obj.end()) raw = scalar_text(*it);
            if (!raw || text::is_blank(*raw)) {
                ++out.report.rows_skipped;
                out.report.warnings.push_back({loc, "missing record id '" + *options.id_key + "'"});
                continue;
            }
            id = std::string(text::trim(*raw));
        } else {
            id = "r" + std::to_string(i + 1);
        }
        if (!ids.insert(id).second) throw Error(ErrorCode::DuplicateId, loc + ": duplicate record id '" + id + "'", loc);

        Record rec(id);
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            const auto value = scalar_text(it.value());
            if (!value)
                throw Error(ErrorCode::NonScalarValue, loc + ", key '" + it.key() + "': nested values are not allowed",
                            loc + ", key '" + it.key() + "'");
            if (fields.insert(it.key()).second)
                out.snapshot.schema.push_back(FieldSpec{it.key(), FieldType::Text, true, false, false});
            rec.set(it.key(), coerce(*value, FieldType::Text, it.key()));
        }
        out.snapshot.records.push_back(std::move(rec));
        ++out.report.records_created;
    }
    return out;
}

std::string write_record_list(const DatasetSnapshot& snapshot, const std::vector<const Record*>* records)
{
    ojson arr = ojson::array();
    const auto id_key = export_id_column(snapshot);
    const auto add = [&](const Record& r) {
        ojson obj = ojson::object();
        obj[id_key] = r.id();
        for (const auto& f : snapshot.schema) {
            const Value& v = r.get(f.name);
            if (v.is_missing()) continue;
            if (const auto* l = v.get_if<ListValue>())
                obj[f.name] = l->items;
            else
                obj[f.name] = v.display();
        }
        arr.push_back(std::move(obj));
    };
    if (records) {
        for (const auto* r : *records) add(*r);
    } else {
        for (const auto& r : snapshot.records) add(r);
    }
    return arr.dump(2) + "\n";
}

}  // namespace facetview
