#include <set>
#include <unordered_set>

#include "facetview/ingest.hpp"
#include "facetview/text.hpp"

namespace facetview {

namespace {

struct RawRow {
    std::vector<std::string> cells;
    std::size_t line = 0;
    bool blank = false;
};

std::vector<RawRow> split_rows(std::string_view s, char delim)
{
    std::vector<RawRow> rows;
    RawRow row;
    std::string cell;
    bool cell_quoted = false;
    bool row_started = false;
    std::size_t line = 1;
    row.line = line;

    enum class State { FieldStart, Unquoted, Quoted, AfterQuote } state = State::FieldStart;

    const auto end_field = [&] {
        row.cells.push_back(std::move(cell));
        cell.clear();
        state = State::FieldStart;
    };
    const auto end_row = [&] {
        const bool had_quote = cell_quoted;
        end_field();
        row.blank = row.cells.size() == 1 && row.cells[0].empty() && !had_quote;
        rows.push_back(std::move(row));
        row = RawRow{};
        row.line = line;
        cell_quoted = false;
        row_started = false;
    };
    const auto newline = [&](std::size_t& i) {
        if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
        ++line;
    };

    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        row_started = true;
        switch (state) {
        case State::FieldStart:
            if (c == '"') {
                state = State::Quoted;
                cell_quoted = true;
                break;
            }
            cell_quoted = false;
            [[fallthrough]];
        case State::Unquoted:
            if (c == delim) {
                end_field();
            } else if (c == '\r' || c == '\n') {
                newline(i);
                end_row();
            } else {
                cell.push_back(c);
                state = State::Unquoted;
            }
            break;
        case State::Quoted:
            if (c == '"') {
                if (i + 1 < s.size() && s[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    state = State::AfterQuote;
                }
            } else {
                if (c == '\n' || (c == '\r' && !(i + 1 < s.size() && s[i + 1] == '\n'))) ++line;
                cell.push_back(c);
            }
            break;
        case State::AfterQuote:
            if (c == delim) {
                end_field();
            } else if (c == '\r' || c == '\n') {
                newline(i);
                end_row();
            } else {
                const std::string loc = "line " + std::to_string(line);
                throw Error(ErrorCode::MalformedDocument, loc + ": unexpected character after closing quote", loc);
            }
            break;
        }
    }
    if (state == State::Quoted) {
        const std::string loc = "line " + std::to_string(row.line);
        throw Error(ErrorCode::MalformedDocument, loc + ": unterminated quoted field", loc);
    }
    if (row_started) end_row();
    return rows;
}

std::string unique_name(const std::string& wanted, std::unordered_set<std::string>& taken)
{
    if (taken.insert(wanted).second) return wanted;
    for (int n = 2;; ++n) {
        std::string candidate = wanted + "_" + std::to_string(n);
        if (taken.insert(candidate).second) return candidate;
    }
}

bool needs_quotes(std::string_view s, char delim)
{
    for (char c : s)
        if (c == delim || c == '"' || c == '\r' || c == '\n') return true;
    return false;
}

void append_cell(std::string& out, std::string_view s, char delim)
{
    if (!needs_quotes(s, delim)) {
        out.append(s);
        return;
    }
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace

Imported parse_delimited(std::string_view bytes, const DelimitedOptions& options, const std::string& dataset_id)
{
    if (!text::is_valid_utf8(bytes)) throw Error(ErrorCode::InvalidEncoding, "input is not valid UTF-8");
    bytes = text::strip_bom(bytes);
    if (text::is_blank(bytes)) throw Error(ErrorCode::EmptyInput, "input contains no rows");

    std::vector<RawRow> rows = split_rows(bytes, options.delimiter);
    std::erase_if(rows, [](const RawRow& r) { return r.blank; });
    if (rows.empty())
        throw Error(ErrorCode::EmptyInput, "input contains no rows");

    Imported out;
    out.snapshot.dataset_id = dataset_id;
    out.snapshot.version = 1;
    ImportReport& report = out.report;

    std::vector<std::string> names;
    std::size_t first_data = 0;
    std::unordered_set<std::string> taken;
    if (options.header_row) {
        const auto& header = rows.front();
        for (std::size_t i = 0; i < header.cells.size(); ++i) {
            std::string wanted = header.cells[i];
            if (text::is_blank(wanted)) {
                wanted = "Column " + std::to_string(i + 1);
                report.warnings.push_back({"header", "empty column name replaced by '" + wanted + "'"});
            }
            std::string name = unique_name(wanted, taken);
            if (name != wanted)
                report.warnings.push_back({"header", "duplicate column '" + wanted + "' renamed to '" + name + "'"});
            names.push_back(std::move(name));
        }
        first_data = 1;
    } else {
        for (std::size_t i = 0; i < rows.front().cells.size(); ++i) names.push_back("Column " + std::to_string(i + 1));
    }

    std::optional<std::size_t> id_index;
    if (options.id_column) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == *options.id_column) id_index = i;
        if (!id_index)
            throw Error(ErrorCode::UnknownField, "id column '" + *options.id_column + "' not found", *options.id_column);
    }

    for (std::size_t i = 0; i < names.size(); ++i) {
        if (id_index && i == *id_index && !options.keep_id_column) continue;
        out.snapshot.schema.push_back(FieldSpec{names[i], FieldType::Text, true, false, false});
    }

    std::unordered_set<std::string> ids;
    for (std::size_t ri = first_data; ri < rows.size(); ++ri) {
        const auto& row = rows[ri];
        ++report.rows_read;
        const std::string loc = "row " + std::to_string(report.rows_read);
        if (row.cells.size() != names.size()) {
            ++report.rows_skipped;
            report.warnings.push_back({loc, "RaggedRow: expected " + std::to_string(names.size()) + " cells, found " +
                                                std::to_string(row.cells.size()) + " (line " +
                                                std::to_string(row.line) + ")"});
            continue;
        }
        std::string id;
        if (id_index) {
            id = std::string(text::trim(row.cells[*id_index]));
            if (id.empty()) {
                ++report.rows_skipped;
                report.warnings.push_back({loc, "empty record id"});
                continue;
            }
        } else {
            id = "r" + std::to_string(report.rows_read);
        }
        if (!ids.insert(id).second) throw Error(ErrorCode::DuplicateId, loc + ": duplicate record id '" + id + "'", loc);

        Record rec(id);
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (id_index && i == *id_index && !options.keep_id_column) continue;
            rec.set(names[i], coerce(row.cells[i], FieldType::Text, names[i]));
        }
        out.snapshot.records.push_back(std::move(rec));
        ++report.records_created;
    }
    return out;
}

std::string export_id_column(const DatasetSnapshot& snapshot)
{
    std::unordered_set<std::string> taken;
    for (const auto& f : snapshot.schema) taken.insert(f.name);
    return unique_name("record_id", taken);
}

std::string write_delimited(const DatasetSnapshot& snapshot, const std::vector<const Record*>* records, char delimiter)
{
    std::string out;
    append_cell(out, export_id_column(snapshot), delimiter);
    for (const auto& f : snapshot.schema) {
        out.push_back(delimiter);
        append_cell(out, f.name, delimiter);
    }
    out += "\r\n";

    const auto write_record = [&](const Record& r) {
        append_cell(out, r.id(), delimiter);
        for (const auto& f : snapshot.schema) {
            out.push_back(delimiter);
            append_cell(out, r.get(f.name).display(), delimiter);
        }
        out += "\r\n";
    };
    if (records) {
        for (const auto* r : *records) write_record(*r);
    } else {
        for (const auto& r : snapshot.records) write_record(r);
    }
    return out;
}

}  // namespace facetview
