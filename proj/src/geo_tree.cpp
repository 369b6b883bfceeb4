#include "facetview/geo_tree.hpp"

#include <fstream>
#include <sstream>

#include "facetview/error.hpp"
#include "facetview/text.hpp"

namespace facetview {

std::string_view to_string(GeoLevel level) noexcept
{
    switch (level) {
    case GeoLevel::Region: return "region";
    case GeoLevel::Country: return "country";
    case GeoLevel::City: return "city";
    }
    return "region";
}

std::size_t GeoTree::add(std::string name, GeoLevel level, std::optional<std::size_t> parent,
                         std::vector<std::string> aliases)
{
    if (text::is_blank(name)) throw Error(ErrorCode::MalformedTree, "node without a name");
    if (level == GeoLevel::Region && parent)
        throw Error(ErrorCode::MalformedTree, "region '" + name + "' cannot have a parent", name);
    if (level != GeoLevel::Region) {
        if (!parent || *parent >= nodes_.size())
            throw Error(ErrorCode::MalformedTree, "node '" + name + "' needs a parent", name);
        const auto expected = level == GeoLevel::Country ? GeoLevel::Region : GeoLevel::Country;
        if (nodes_[*parent].level != expected)
            throw Error(ErrorCode::MalformedTree,
                        "'" + name + "' (" + std::string(to_string(level)) + ") cannot sit under " +
                            std::string(to_string(nodes_[*parent].level)) + " '" + nodes_[*parent].name + "'",
                        name);
    }
    std::vector<std::string> keys{text::normalize_name(name)};
    for (const auto& a : aliases) keys.push_back(text::normalize_name(a));
    for (std::size_t k = 0; k < keys.size(); ++k) {
        if (lookup_.count(keys[k]))
            throw Error(ErrorCode::MalformedTree, "duplicate geography name '" + keys[k] + "'", keys[k]);
        for (std::size_t j = 0; j < k; ++j)
            if (keys[j] == keys[k])
                throw Error(ErrorCode::MalformedTree, "duplicate geography name '" + keys[k] + "'", keys[k]);
    }

    const std::size_t id = nodes_.size();
    for (const auto& key : keys) lookup_.emplace(key, id);
    nodes_.push_back(GeoNode{std::move(name), level, parent, std::move(aliases), {}});
    if (parent) nodes_[*parent].children.push_back(id);
    return id;
}

GeoTree GeoTree::parse_outline(std::string_view outline)
{
    GeoTree tree;
    outline = text::strip_bom(outline);
    std::istringstream in{std::string(outline)};
    std::string line;
    std::size_t line_no = 0;
    std::size_t unit = 0;
    std::vector<std::size_t> stack;  // node id per depth

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string locator = "line " + std::to_string(line_no);
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;

        std::size_t indent = 0;
        while (indent < line.size() && (line[indent] == ' ' || line[indent] == '\t')) {
            if (line[indent] == '\t')
                throw Error(ErrorCode::MalformedTree, locator + ": tabs are not allowed in indentation", locator);
            ++indent;
        }
        if (indent > 0 && unit == 0) unit = indent;
        if (unit && indent % unit != 0)
            throw Error(ErrorCode::MalformedTree, locator + ": inconsistent indentation", locator);
        const std::size_t depth = unit ? indent / unit : 0;
        if (depth > 2) throw Error(ErrorCode::MalformedTree, locator + ": nesting deeper than city", locator);
        if (depth > stack.size())
            throw Error(ErrorCode::MalformedTree, locator + ": indentation skips a level", locator);

        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= body.size()) {
            auto bar = body.find('|', start);
            if (bar == std::string_view::npos) bar = body.size();
            const auto part = text::trim(body.substr(start, bar - start));
            if (!part.empty()) parts.emplace_back(part);
            start = bar + 1;
        }
        if (parts.empty()) throw Error(ErrorCode::MalformedTree, locator + ": empty node name", locator);

        stack.resize(depth);
        const auto level = static_cast<GeoLevel>(depth);
        std::optional<std::size_t> parent;
        if (depth > 0) parent = stack.back();
        std::string name = parts.front();
        parts.erase(parts.begin());
        try {
            stack.push_back(tree.add(std::move(name), level, parent, std::move(parts)));
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedTree, locator + ": " + e.what(), locator);
        }
    }
    return tree;
}

GeoTree GeoTree::load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open geography tree '" + path + "'", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_outline(ss.str());
}

std::vector<std::size_t> GeoTree::roots() const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (!nodes_[i].parent) out.push_back(i);
    return out;
}

std::optional<std::size_t> GeoTree::find(std::string_view name) const
{
    const auto it = lookup_.find(text::normalize_name(name));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> GeoTree::lineage(std::size_t i) const
{
    std::vector<std::size_t> out{i};
    while (nodes_.at(out.back()).parent) out.push_back(*nodes_[out.back()].parent);
    return out;
}

}  // namespace facetview
