#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "facetview/error.hpp"
#include "facetview/facet_index.hpp"
#include "support/corpus.hpp"
#include "support/oracle.hpp"

using namespace facetview;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

DatasetSnapshot make(std::vector<FieldSpec> schema,
                     const std::vector<std::pair<std::string, std::map<std::string, Value>>>& rows)
{
    DatasetSnapshot s;
    s.dataset_id = "t";
    s.version = 1;
    s.schema = std::move(schema);
    for (const auto& [id, values] : rows) {
        Record r(id);
        for (const auto& [k, v] : values) r.set(k, v);
        s.records.push_back(std::move(r));
    }
    return s;
}

std::vector<std::string> ids_of(const FacetIndex& index, const DocSet& docs)
{
    std::vector<std::string> out;
    for (auto d : docs.members()) out.push_back(index.record_ids()[d]);
    return out;
}

std::vector<std::pair<std::string, std::size_t>> pairs(const FacetCounts& c)
{
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& b : c.buckets) out.emplace_back(b.key, b.count);
    return out;
}

using Pairs = std::vector<std::pair<std::string, std::size_t>>;
using Strings = std::vector<std::string>;

FieldSpec text(std::string name)
{
    return FieldSpec{std::move(name), FieldType::Text, true, false, false};
}

FieldSpec list(std::string name)
{
    return FieldSpec{std::move(name), FieldType::List, true, true, false};
}

}  // namespace

TEST(DocSet, SetAlgebra)
{
    DocSet a(130), b(130);
    for (std::size_t i : {0, 5, 64, 129}) a.insert(i);
    for (std::size_t i : {5, 64, 100}) b.insert(i);
    EXPECT_EQ((a & b).members(), (std::vector<std::size_t>{5, 64}));
    EXPECT_EQ((a | b).count(), 5u);
    EXPECT_EQ(a.intersect_count(b), 2u);
    EXPECT_TRUE(a.contains(129));
    EXPECT_FALSE(a.contains(128));
    EXPECT_EQ(DocSet(130, true).count(), 130u);
    EXPECT_TRUE(DocSet(0, true).empty());
}

TEST(FilterState, Helpers)
{
    FilterState s;
    s = s.toggled("A", "x").toggled("B", "y");
    EXPECT_EQ(s.selections.size(), 2u);
    s = s.toggled("A", "x");
    EXPECT_EQ(s.selections.count("A"), 0u);
    EXPECT_EQ(s.without("B").selections.size(), 0u);
    FilterState e;
    e.selections["A"] = {};
    e.text_query = "  ";
    EXPECT_TRUE(e.normalized().empty());
}

TEST(FacetIndex, EmptySnapshot)
{
    const auto index = build_index(make({text("Language")}, {}));
    EXPECT_EQ(index.size(), 0u);
    EXPECT_TRUE(filtered_ids(index, {}).empty());
    EXPECT_TRUE(facet_counts(index, {}, "Language").buckets.empty());
}

TEST(FacetIndex, SingleBulgarianRecord)
{
    const auto index = build_index(make({text("Language")}, {{"r", {{"Language", Value::text("Bulgarian")}}}}));
    const auto& lang = index.require("Language");
    ASSERT_EQ(lang.buckets.size(), 1u);
    EXPECT_EQ(ids_of(index, lang.buckets.at("Bulgarian")), Strings{"r"});

    FilterState s;
    s.selections["Language"] = {"Bulgarian"};
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), Strings{"r"});
    EXPECT_EQ(pairs(facet_counts(index, s, "Language")), (Pairs{{"Bulgarian", 1}}));
}

TEST(FacetIndex, DisabledFieldsAreNotIndexed)
{
    auto spec = text("Hidden");
    spec.enabled = false;
    const auto index = build_index(make({text("A"), spec}, {{"r", {{"A", Value::text("x")}, {"Hidden", Value::text("secret")}}}}));
    EXPECT_EQ(index.field("Hidden"), nullptr);
    EXPECT_EQ(index.token("secret"), nullptr);
    FilterState s;
    s.selections["Hidden"] = {"secret"};
    EXPECT_EQ(code_of([&] { filtered_ids(index, s); }), ErrorCode::UnknownFacetField);
    EXPECT_EQ(code_of([&] { facet_counts(index, {}, "Hidden"); }), ErrorCode::UnknownFacetField);
    EXPECT_EQ(code_of([&] { zero_result_guard(index, {}, "Nope", "x"); }), ErrorCode::UnknownFacetField);
}

TEST(FacetIndex, OrWithinAndAcross)
{
    const auto index = build_index(make({text("Lang"), list("Subj")},
                                        {{"a", {{"Lang", Value::text("German")}, {"Subj", Value::list({"War", "Trade"})}}},
                                         {"b", {{"Lang", Value::text("Polish")}, {"Subj", Value::list({"Trade"})}}},
                                         {"c", {{"Lang", Value::text("Czech")}, {"Subj", Value::list({"War"})}}},
                                         {"d", {{"Lang", Value::text("German")}}}}));
    FilterState s;
    s.selections["Lang"] = {"German", "Polish"};
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), (Strings{"a", "b", "d"}));
    s.selections["Subj"] = {"Trade"};
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), (Strings{"a", "b"}));
    s.selections["Subj"] = {"Trade", "War"};
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), (Strings{"a", "b"}));
    s.selections["Subj"] = {"(no value)"};
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), (Strings{"d"}));
    s.selections["Subj"] = {"Unknown key"};
    EXPECT_TRUE(filtered_ids(index, s).empty());

    // Own selections ignored; the other facet applies.
    FilterState t;
    t.selections["Lang"] = {"German"};
    t.selections["Subj"] = {"War"};
    EXPECT_EQ(pairs(facet_counts(index, t, "Lang")), (Pairs{{"Czech", 1}, {"German", 1}, {"Polish", 0}}));
    EXPECT_EQ(pairs(facet_counts(index, t, "Subj")), (Pairs{{"(no value)", 1}, {"Trade", 1}, {"War", 1}}));
}

TEST(FacetIndex, TextSearchWholeTokensAnd)
{
    const auto index =
        build_index(make({text("Title"), list("Subj")},
                         {{"a", {{"Title", Value::text("Letter from KHRUSHCHEV")}, {"Subj", Value::list({"Cold War"})}}},
                          {"b", {{"Title", Value::text("Khrushchev's memo")}}},
                          {"c", {{"Title", Value::text("Khrushchevism")}, {"Subj", Value::list({"D\xC3\xA9tente"})}}}}));
    FilterState s;
    s.text_query = "khrushchev";
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), (Strings{"a", "b"}));
    s.text_query = "Khrushchev cold";
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), (Strings{"a"}));
    s.text_query = "d\xC3\xA9tente";
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), (Strings{"c"}));
    s.text_query = "khrush";
    EXPECT_TRUE(filtered_ids(index, s).empty());
    s.text_query = " ,, ";
    EXPECT_EQ(filtered_ids(index, s).count(), 3u);
}

TEST(FacetIndex, FoldCaseLabels)
{
    FieldSpec kind = text("Kind");
    kind.fold_case = true;
    const auto index = build_index(make({kind}, {{"a", {{"Kind", Value::text("letter")}}},
                                                 {"b", {{"Kind", Value::text("Letter")}}},
                                                 {"c", {{"Kind", Value::text("LETTER")}}},
                                                 {"d", {{"Kind", Value::text("Memo")}}}}));
    const auto counts = facet_counts(index, {}, "Kind");
    ASSERT_EQ(counts.buckets.size(), 2u);
    EXPECT_EQ(counts.buckets[0], (FacetBucket{"letter", "LETTER", 3}));
    EXPECT_EQ(counts.buckets[1], (FacetBucket{"memo", "Memo", 1}));
    FilterState s;
    s.selections["Kind"] = {"Letter"};
    EXPECT_EQ(filtered_ids(index, s).count(), 3u);
}

TEST(FacetIndex, GeoAncestorsCountOnce)
{
    const auto tree = corpus::geo_tree();
    IndexOptions o;
    o.geo_fields["Place"] = tree;
    const auto index = build_index(make({text("Place")}, {{"a", {{"Place", Value::text("Beijing")}}},
                                                          {"b", {{"Place", Value::text("North Korea")}}},
                                                          {"c", {{"Place", Value::text("Atlantis")}}},
                                                          {"d", {}}}),
                                   o);
    const auto counts = facet_counts(index, {}, "Place");
    std::map<std::string, std::size_t> got;
    for (const auto& b : counts.buckets) got[b.key] = b.count;
    EXPECT_EQ(got["East Asia"], 2u);
    EXPECT_EQ(got["China"], 1u);
    EXPECT_EQ(got["Beijing"], 1u);
    EXPECT_EQ(got["Pyongyang"], 0u);
    EXPECT_EQ(got["(unlocated)"], 1u);
    EXPECT_EQ(got["(no value)"], 1u);
    FilterState s;
    s.selections["Place"] = {"peking", "DPRK"};
    EXPECT_EQ(ids_of(index, filtered_ids(index, s)), (Strings{"a", "b"}));
}

TEST(FacetIndex, TranslationCountsSum)
{
    std::vector<std::pair<std::string, std::map<std::string, Value>>> rows;
    for (int i = 0; i < 6447; ++i)
        rows.push_back({"r" + std::to_string(i),
                        {{"Translation Needed", Value::text(i < 2293 ? "Not Translated" : "Translation Available")}}});
    const auto index = build_index(make({text("Translation Needed")}, rows));
    EXPECT_EQ(pairs(facet_counts(index, {}, "Translation Needed")),
              (Pairs{{"Translation Available", 4154}, {"Not Translated", 2293}}));
}

TEST(FacetIndex, ZeroResultGuard)
{
    const auto index = build_index(make({text("Lang"), text("Kind")},
                                        {{"a", {{"Lang", Value::text("German")}, {"Kind", Value::text("Memo")}}},
                                         {"b", {{"Lang", Value::text("Polish")}, {"Kind", Value::text("Letter")}}}}));
    FilterState s;
    s.selections["Lang"] = {"German"};
    EXPECT_EQ(zero_result_guard(index, s, "Lang", "German"), 2u);
    EXPECT_EQ(zero_result_guard(index, s, "Kind", "Letter"), 0u);
    EXPECT_EQ(zero_result_guard(index, s, "Kind", "Memo"), 1u);
    EXPECT_EQ(zero_result_guard(index, s, "Lang", "Polish"), 2u);
}

// Index answers equal a linear scan for random corpora and states.
TEST(FacetOracle, RandomCorpora)
{
    std::mt19937_64 rng(2000);
    for (int trial = 0; trial < 25; ++trial) {
        const auto c = corpus::random_corpus(rng, 2000);
        const auto index = build_index(c.snapshot, c.index_options());
        const oracle::Scan scan(c.snapshot, c.bindings());
        for (int q = 0; q < 40; ++q) {
            const auto state = q % 4 == 0 ? corpus::random_geo_state(rng, c) : corpus::random_state(rng, c);
            const auto docs = filtered_ids(index, state);
            ASSERT_EQ(docs.members(), scan.filter(state)) << "trial " << trial << " query " << q;
            for (const auto& field : c.facet_fields()) {
                const auto expected = scan.ordered(scan.filter(state.without(field)), field);
                ASSERT_EQ(pairs(facet_counts(index, state, field)), expected) << field;
            }
            // Toggling a random known key projects exactly the toggled filter.
            const auto fields = c.facet_fields();
            const auto& field = fields[static_cast<std::size_t>(q) % fields.size()];
            const auto counts = facet_counts(index, {}, field);
            if (counts.buckets.empty()) continue;
            const auto& key = counts.buckets[static_cast<std::size_t>(q) % counts.buckets.size()].key;
            EXPECT_EQ(zero_result_guard(index, state, field, key), scan.filter(state.toggled(field, key)).size());
        }
    }
}

TEST(FacetOracle, MonotonicityPartitionDeterminism)
{
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = corpus::random_corpus(rng, 800);
        const auto index = build_index(c.snapshot, c.index_options());
        const auto again = build_index(c.snapshot, c.index_options());
        for (int q = 0; q < 20; ++q) {
            const auto state = corpus::random_state(rng, c);
            const auto docs = filtered_ids(index, state);
            for (const auto& field : c.facet_fields()) {
                const auto counts = facet_counts(index, state, field);
                ASSERT_EQ(counts, facet_counts(again, state, field));
                if (counts.buckets.empty()) continue;
                const auto narrower = filtered_ids(index, state.toggled(field, counts.buckets.front().key));
                if (!state.selections.count(field)) EXPECT_LE(narrower.count(), docs.count());
            }
            for (const char* field : {"Language", "Kind", "Date", "Weight"}) {
                if (state.selections.count(field)) continue;
                std::size_t sum = 0;
                for (const auto& b : facet_counts(index, state, field).buckets) sum += b.count;
                EXPECT_EQ(sum, docs.count()) << field;
            }
        }
    }
}
