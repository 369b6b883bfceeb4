#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace facetview {

enum class GeoLevel { Region, Country, City };

std::string_view to_string(GeoLevel level) noexcept;

struct GeoNode {
    std::string name;
    GeoLevel level = GeoLevel::Region;
    std::optional<std::size_t> parent;
    std::vector<std::string> aliases;
    std::vector<std::size_t> children;
};

/// Region > country > city hierarchy. Names and aliases are looked up
/// case-insensitively and must be unique across the whole tree.
class GeoTree {
public:
    /// Indented outline, one node per line: `Name | alias | alias`.
    /// Top level is a region; each further indent (consistent width, spaces
    /// only) descends one level. '#' lines and blank lines are ignored.
    /// Throws MalformedTree (locator "line N").
    static GeoTree parse_outline(std::string_view outline);
    static GeoTree load(const std::string& path);

    /// Throws MalformedTree on level/parent mismatches or duplicate names.
    std::size_t add(std::string name, GeoLevel level, std::optional<std::size_t> parent,
                    std::vector<std::string> aliases = {});

    const std::vector<GeoNode>& nodes() const noexcept { return nodes_; }
    const GeoNode& node(std::size_t i) const { return nodes_.at(i); }
    std::vector<std::size_t> roots() const;

    /// Node whose name or alias matches `name`.
    std::optional<std::size_t> find(std::string_view name) const;

    /// `i` followed by its ancestors up to the region.
    std::vector<std::size_t> lineage(std::size_t i) const;

    bool empty() const noexcept { return nodes_.empty(); }

private:
    std::vector<GeoNode> nodes_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

}  // namespace facetview
