#include "fixtures.hpp"

#include <algorithm>
#include <random>

namespace fixtures {

using namespace facetview;

const std::vector<std::pair<std::string, std::size_t>>& khrushchev_languages()
{
    static const std::vector<std::pair<std::string, std::size_t>> langs{
        {"Russian", 558}, {"German", 88},    {"Albanian", 55},   {"Polish", 55},
        {"Romanian", 50}, {"Czech", 39},     {"Chinese", 28},    {"Hungarian", 27},
        {"Bulgarian", 25}, {"Korean", 25},   {"Spanish", 25},    {"Vietnamese", 25},
    };
    return langs;
}

std::string khrushchev_csv()
{
    struct Row {
        std::string title, language, subjects, translation;
    };
    std::vector<Row> rows;
    const char* spellings[] = {"Khrushchev", "KHRUSHCHEV", "khrushchev"};
    std::size_t i = 0;
    for (const auto& [lang, n] : khrushchev_languages()) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            Row r;
            r.language = lang;
            r.translation = i % 3 == 0 ? "No Translation" : "Translation Available";
            if (i % 5 == 0) {
                r.title = "Record of conversation " + std::to_string(i);
                r.subjects = std::string(spellings[i % 3]) + ", Nikita Sergeevich";
            } else {
                r.title = "Letter from " + std::string(spellings[i % 3]) + " (" + std::to_string(i) + ")";
                r.subjects = "Cold War";
            }
            rows.push_back(std::move(r));
        }
    }
    const std::pair<const char*, std::size_t> others[] = {{"English", 150}, {"Russian", 100}, {"French", 50}};
    for (const auto& [lang, n] : others)
        for (std::size_t k = 0; k < n; ++k, ++i)
            rows.push_back({"Memorandum on Berlin " + std::to_string(i), lang, "Berlin crisis", "Translation Available"});

    std::mt19937_64 rng(1962);
    std::shuffle(rows.begin(), rows.end(), rng);

    std::string csv = "Title,Language,Subjects,Translation Needed\r\n";
    for (const auto& r : rows)
        csv += "\"" + r.title + "\"," + r.language + ",\"" + r.subjects + "\"," + r.translation + "\r\n";
    return csv;
}

DatasetSnapshot archives_snapshot()
{
    DatasetSnapshot s;
    s.dataset_id = "archives";
    s.version = 1;
    s.schema = {FieldSpec{"Subject", FieldType::Text, true, false, false},
                FieldSpec{"Linear Feet", FieldType::Number, true, false, false}};
    for (int i = 0; i < 30; ++i) {
        Record r("suffrage-" + std::to_string(i));
        r.set("Subject", Value::text("Women's suffrage"));
        r.set("Linear Feet", Value(*Decimal::parse(i < 20 ? "0.25" : "0.5")));
        s.records.push_back(std::move(r));
    }
    const char* feet[] = {"60", "40"};
    for (int i = 0; i < 2; ++i) {
        Record r("gender-" + std::to_string(i));
        r.set("Subject", Value::text("Gender studies"));
        r.set("Linear Feet", Value(*Decimal::parse(feet[i])));
        s.records.push_back(std::move(r));
    }
    return s;
}

}  // namespace fixtures
