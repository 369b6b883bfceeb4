#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "facetview/schema.hpp"

namespace facetview {

// ---------------------------------------------------------------- gazetteer

/// Offline place-name table. Aliases are matched after text::normalize_name.
class Gazetteer {
public:
    struct Entry {
        std::vector<std::string> aliases;
        GeoPoint point;
    };

    Gazetteer() = default;

    /// Tab-separated lines: `alias1|alias2|...<TAB>lat<TAB>lon`. Blank lines
    /// and lines starting with '#' are ignored. Throws MalformedDocument
    /// (locator "line N") on bad lines or duplicate aliases.
    static Gazetteer parse(std::string_view tsv);
    static Gazetteer load(const std::string& path);

    void add(Entry entry);

    std::optional<GeoPoint> lookup(std::string_view place) const;
    /// Aliases of every entry sitting exactly at `p`.
    std::vector<std::string> aliases_at(const GeoPoint& p) const;

    const std::vector<Entry>& entries() const noexcept { return entries_; }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, std::size_t> by_alias_;
};

// ---------------------------------------------------------------- single-value augmentations

/// Normalized instant for a date string. Throws UnparseableDate or ImpossibleDate.
Value normalize_date(std::string_view raw);

/// Throws Unresolved (locator = place) when no alias matches.
Value geocode(std::string_view place, const Gazetteer& gazetteer);

/// One delimiter pattern: any of its spellings separates segments.
using DelimiterPattern = std::vector<std::string>;

/// em-dash or "--", then ";", then ",".
const std::vector<DelimiterPattern>& default_delimiters();

/// The first pattern (in order) with a spelling present in `raw`, or nullopt.
std::optional<std::size_t> detect_delimiter(std::string_view raw, const std::vector<DelimiterPattern>& patterns);

/// Splits on the first pattern that occurs; trims segments and drops empty
/// ones. Input with no delimiter yields one segment (none if blank).
std::vector<std::string> split_list(std::string_view raw,
                                    const std::vector<DelimiterPattern>& patterns = default_delimiters());

/// Subject-heading decomposition: splits on em-dash or "--" only.
std::vector<std::string> split_heading(std::string_view heading);

/// Joins the display form of non-missing values; all missing gives missing.
Value merge_fields(const std::vector<const Value*>& values, std::string_view separator);

using ReplacementMap = std::vector<std::pair<std::string, std::string>>;

/// Whole-value replacement; list items are replaced individually. `hits`
/// (same length as mapping) is incremented per replaced item.
Value replace_values(const Value& value, const ReplacementMap& mapping, std::vector<std::size_t>* hits = nullptr);

/// checked -> Translation Available, unchecked -> No Translation.
ReplacementMap translation_status_preset();
/// Same, with "Not Translated" as the negative label.
ReplacementMap translation_status_alt_preset();

// ---------------------------------------------------------------- pipeline

enum class AugmentKind { NormalizeDate, Geocode, SplitList, SplitHeading, MergeFields, ReplaceValues };

std::string_view to_string(AugmentKind kind) noexcept;
std::optional<AugmentKind> parse_augment_kind(std::string_view name) noexcept;

struct AugmentationStep {
    AugmentKind kind = AugmentKind::NormalizeDate;
    std::vector<std::string> source_fields;
    std::string target_field;  // empty: same as the first source

    // kind-specific parameters
    std::vector<DelimiterPattern> delimiters;  // SplitList; empty = default preset
    std::string separator = " ";               // MergeFields
    ReplacementMap mapping;                    // ReplaceValues

    const std::string& target() const { return target_field.empty() ? source_fields.front() : target_field; }

    friend bool operator==(const AugmentationStep&, const AugmentationStep&) = default;
};

struct AugmentWarning {
    std::size_t step = 0;
    std::string record_id;
    std::string message;
};

struct AugmentReport {
    std::vector<AugmentWarning> warnings;
    /// Per ReplaceValues step (keyed by step index): hits per mapping entry.
    std::map<std::size_t, std::vector<std::size_t>> replacement_counts;
};

struct AugmentResult {
    DatasetSnapshot snapshot;
    AugmentReport report;
};

/// Applies `steps` in order to a copy of `snapshot` and bumps the version.
/// Values a step cannot convert are left untouched and reported. Throws
/// UnknownField, TypeConflict, or InvalidArgument for malformed steps.
/// `gazetteer` is required only by Geocode steps.
AugmentResult apply_pipeline(const DatasetSnapshot& snapshot, const std::vector<AugmentationStep>& steps,
                             const Gazetteer* gazetteer = nullptr);

}  // namespace facetview
