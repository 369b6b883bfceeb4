#pragma once

#include <json.hpp>

#include "facetview/augment.hpp"
#include "facetview/facet_index.hpp"
#include "facetview/ingest.hpp"
#include "facetview/views.hpp"

namespace facetview {

/// Insertion-ordered JSON; keeps output byte-stable.
using Json = nlohmann::ordered_json;

// Storage form: text is a bare string, lists are arrays, every other kind
// is a one-member object naming its type, e.g. {"number": "1.5"}.
Json value_to_json(const Value& v);
Value value_from_json(const Json& j);

/// Presentation form used by API responses: string, or array for lists.
Json value_to_plain_json(const Value& v);

Json to_json(const FieldSpec& f);
FieldSpec field_spec_from_json(const Json& j);

Json to_json(const SourceDescriptor& s);
SourceDescriptor source_from_json(const Json& j);

/// On-disk snapshot document.
Json to_json(const DatasetSnapshot& s);
DatasetSnapshot snapshot_from_json(const Json& j);

Json to_json(const ImportReport& r);
Json to_json(const ChangeSummary& c);
Json to_json(const AugmentReport& r, const std::vector<AugmentationStep>& steps);

Json to_json(const AugmentationStep& s);
/// Accepts {"kind", "source_fields" | "field", "target_field", "delimiters",
/// "separator", "mapping" (object or [[from,to],...]), "preset"}.
/// Throws InvalidArgument.
AugmentationStep step_from_json(const Json& j);
/// A pipeline document: an array of steps or {"steps": [...]}.
std::vector<AugmentationStep> pipeline_from_json(const Json& j);

Json to_json(const HarvestConfig& c);
HarvestConfig harvest_config_from_json(const Json& j);

Json to_json(const Widget& w);
Json to_json(const ViewConfig& v);
ViewConfig view_config_from_json(const Json& j);

Json to_json(const FilterState& s);
FilterState filter_state_from_json(const Json& j);

Json to_json(const FacetCounts& c);
Json to_json(const ViewResult& r);

Json error_json(const Error& e);

/// Parses JSON text, mapping parse failures to MalformedDocument.
Json parse_json(std::string_view text);

}  // namespace facetview
