#include "facetview/filter_url.hpp"

#include "facetview/ingest.hpp"

namespace facetview {

std::string encode_filter_state(const FilterState& state)
{
    std::string out;
    const auto append = [&](std::string_view name, std::string_view value) {
        if (!out.empty()) out.push_back('&');
        out += name;
        out.push_back('=');
        out += percent_encode(value);
    };
    for (const auto& [field, keys] : state.selections)
        for (const auto& key : keys) append("f." + percent_encode(field), key);
    if (state.text_query) append("q", *state.text_query);
    return out;
}

std::multimap<std::string, std::string> parse_query_string(std::string_view query)
{
    std::multimap<std::string, std::string> out;
    if (!query.empty() && query.front() == '?') query.remove_prefix(1);
    std::size_t start = 0;
    while (start <= query.size()) {
        auto amp = query.find('&', start);
        if (amp == std::string_view::npos) amp = query.size();
        const auto part = query.substr(start, amp - start);
        if (!part.empty()) {
            const auto eq = part.find('=');
            if (eq == std::string_view::npos)
                out.emplace(percent_decode(part), std::string{});
            else
                out.emplace(percent_decode(part.substr(0, eq)), percent_decode(part.substr(eq + 1)));
        }
        start = amp + 1;
    }
    return out;
}

FilterState decode_filter_params(const std::multimap<std::string, std::string>& params)
{
    FilterState state;
    for (const auto& [name, value] : params) {
        if (name.size() > 2 && name.compare(0, 2, "f.") == 0) {
            if (!value.empty()) state.selections[name.substr(2)].insert(value);
        } else if (name == "q") {
            if (!value.empty()) state.text_query = value;
        }
    }
    return state.normalized();
}

FilterState decode_filter_state(std::string_view query)
{
    return decode_filter_params(parse_query_string(query));
}

}  // namespace facetview
