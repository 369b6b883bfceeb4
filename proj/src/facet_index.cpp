#include "facetview/facet_index.hpp"

#include <algorithm>
#include <bit>

#include "facetview/text.hpp"

namespace facetview {

// ---------------------------------------------------------------- DocSet

DocSet::DocSet(std::size_t universe, bool full) : universe_(universe), words_((universe + 63) / 64, 0)
{
    if (full && universe) {
        std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
        if (const auto tail = universe % 64) words_.back() = (std::uint64_t{1} << tail) - 1;
    }
}

void DocSet::insert(std::size_t doc)
{
    words_.at(doc / 64) |= std::uint64_t{1} << (doc % 64);
}

bool DocSet::contains(std::size_t doc) const noexcept
{
    return doc < universe_ && (words_[doc / 64] >> (doc % 64) & 1U);
}

std::size_t DocSet::count() const noexcept
{
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::size_t DocSet::intersect_count(const DocSet& other) const noexcept
{
    std::size_t n = 0;
    const auto len = std::min(words_.size(), other.words_.size());
    for (std::size_t i = 0; i < len; ++i) n += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
    return n;
}

std::vector<std::size_t> DocSet::members() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < words_.size(); ++i) {
        auto w = words_[i];
        while (w) {
            out.push_back(i * 64 + static_cast<std::size_t>(std::countr_zero(w)));
            w &= w - 1;
        }
    }
    return out;
}

DocSet& DocSet::operator&=(const DocSet& other)
{
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= i < other.words_.size() ? other.words_[i] : 0;
    return *this;
}

DocSet& DocSet::operator|=(const DocSet& other)
{
    if (other.universe_ > universe_) {
        universe_ = other.universe_;
        words_.resize(other.words_.size(), 0);
    }
    for (std::size_t i = 0; i < other.words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
}

// ---------------------------------------------------------------- FilterState

FilterState FilterState::normalized() const
{
    FilterState out;
    for (const auto& [field, keys] : selections)
        if (!keys.empty()) out.selections.emplace(field, keys);
    if (text_query && !text::is_blank(*text_query)) out.text_query = text_query;
    return out;
}

FilterState FilterState::without(const std::string& field) const
{
    FilterState out = *this;
    out.selections.erase(field);
    return out;
}

FilterState FilterState::toggled(const std::string& field, const std::string& key) const
{
    FilterState out = *this;
    auto& keys = out.selections[field];
    if (!keys.erase(key)) keys.insert(key);
    if (keys.empty()) out.selections.erase(field);
    return out;
}

// ---------------------------------------------------------------- FieldIndex

std::string FieldIndex::key_for(std::string_view raw) const
{
    if (geo) {
        if (const auto node = geo->find(raw)) return geo->node(*node).name;
        return std::string(raw);
    }
    return spec.fold_case ? text::fold_case(raw) : std::string(raw);
}

const DocSet* FieldIndex::lookup(std::string_view key) const
{
    if (key == kNoValue) return &no_value;
    if (geo && key == kUnlocated) return &unlocated;
    const auto it = buckets.find(key_for(key));
    return it == buckets.end() ? nullptr : &it->second;
}

std::string FieldIndex::label_for(const std::string& key) const
{
    const auto it = labels.find(key);
    return it == labels.end() ? key : it->second;
}

// ---------------------------------------------------------------- FacetIndex

const FieldIndex* FacetIndex::field(std::string_view name) const
{
    const auto it = fields_.find(name);
    return it == fields_.end() ? nullptr : &it->second;
}

const FieldIndex& FacetIndex::require(std::string_view name) const
{
    if (const auto* f = field(name)) return *f;
    throw Error(ErrorCode::UnknownFacetField, "'" + std::string(name) + "' is not an indexed field", std::string(name));
}

const DocSet* FacetIndex::token(std::string_view folded) const
{
    const auto it = tokens_.find(folded);
    return it == tokens_.end() ? nullptr : &it->second;
}

FacetIndex build_index(const DatasetSnapshot& snapshot, const IndexOptions& options)
{
    FacetIndex index;
    index.dataset_id_ = snapshot.dataset_id;
    index.version_ = snapshot.version;
    const std::size_t n = snapshot.records.size();
    index.record_ids_.reserve(n);
    for (const auto& r : snapshot.records) index.record_ids_.push_back(r.id());

    for (const auto& spec : snapshot.schema) {
        if (!spec.enabled) continue;
        FieldIndex fi;
        fi.spec = spec;
        fi.no_value = DocSet(n);
        fi.unlocated = DocSet(n);
        fi.undated = DocSet(n);
        if (const auto it = options.geo_fields.find(spec.name); it != options.geo_fields.end() && it->second) {
            fi.geo = it->second;
            for (const auto& node : fi.geo->nodes()) fi.buckets.emplace(node.name, DocSet(n));
        }
        const bool tokenized = spec.type == FieldType::Text || spec.type == FieldType::List;

        for (std::size_t doc = 0; doc < n; ++doc) {
            const Value& v = snapshot.records[doc].get(spec.name);
            if (spec.type == FieldType::DateTime) {
                if (const auto* dt = v.get_if<DateTime>()) {
                    auto [it, inserted] = fi.years.try_emplace(dt->year(), n);
                    it->second.insert(doc);
                } else {
                    fi.undated.insert(doc);
                }
            }
            if (v.is_missing()) {
                fi.no_value.insert(doc);
                continue;
            }
            const auto keys = v.facet_keys();
            if (tokenized) {
                for (const auto& k : keys)
                    for (auto& tok : text::tokenize(k)) {
                        auto [it, inserted] = index.tokens_.try_emplace(std::move(tok), n);
                        it->second.insert(doc);
                    }
            }
            if (fi.geo) {
                for (const auto& k : keys) {
                    std::vector<std::string> candidates{k};
                    if (const auto* p = v.get_if<GeoPoint>(); p && options.gazetteer) {
                        const auto more = options.gazetteer->aliases_at(*p);
                        candidates.insert(candidates.end(), more.begin(), more.end());
                    }
                    std::optional<std::size_t> node;
                    for (const auto& c : candidates)
                        if ((node = fi.geo->find(c))) break;
                    if (!node) {
                        fi.unlocated.insert(doc);
                        continue;
                    }
                    for (auto id : fi.geo->lineage(*node)) fi.buckets.at(fi.geo->node(id).name).insert(doc);
                }
                continue;
            }
            for (const auto& k : keys) {
                const std::string key = spec.fold_case ? text::fold_case(k) : k;
                auto [it, inserted] = fi.buckets.try_emplace(key, n);
                it->second.insert(doc);
                if (spec.fold_case) {
                    auto [lit, fresh] = fi.labels.try_emplace(key, k);
                    if (!fresh && k < lit->second) lit->second = k;
                }
            }
        }
        index.fields_.emplace(spec.name, std::move(fi));
    }
    return index;
}

// ---------------------------------------------------------------- queries

DocSet filtered_ids(const FacetIndex& index, const FilterState& state)
{
    DocSet result = index.all();
    for (const auto& [field, keys] : state.selections) {
        const FieldIndex& fi = index.require(field);
        if (keys.empty()) continue;
        DocSet clause(index.size());
        for (const auto& key : keys)
            if (const auto* docs = fi.lookup(key)) clause |= *docs;
        result &= clause;
    }
    if (state.text_query) {
        for (const auto& tok : text::tokenize(*state.text_query)) {
            if (const auto* docs = index.token(tok))
                result &= *docs;
            else
                return DocSet(index.size());
        }
    }
    return result;
}

FacetCounts counts_over(const FieldIndex& field, const DocSet& docs)
{
    FacetCounts out;
    out.field = field.spec.name;
    for (const auto& [key, set] : field.buckets)
        out.buckets.push_back({key, field.label_for(key), set.intersect_count(docs)});
    if (const auto c = field.no_value.intersect_count(docs))
        out.buckets.push_back({std::string(kNoValue), std::string(kNoValue), c});
    if (field.geo)
        if (const auto c = field.unlocated.intersect_count(docs))
            out.buckets.push_back({std::string(kUnlocated), std::string(kUnlocated), c});
    std::sort(out.buckets.begin(), out.buckets.end(), [](const FacetBucket& a, const FacetBucket& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.key < b.key;
    });
    return out;
}

FacetCounts facet_counts(const FacetIndex& index, const FilterState& state, const std::string& field)
{
    const FieldIndex& fi = index.require(field);
    return counts_over(fi, filtered_ids(index, state.without(field)));
}

std::size_t zero_result_guard(const FacetIndex& index, const FilterState& state, const std::string& field,
                              const std::string& key)
{
    index.require(field);
    return filtered_ids(index, state.toggled(field, key)).count();
}

}  // namespace facetview
