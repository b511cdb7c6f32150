#pragma once

// JSON encoding shared by the store files, exports and the HTTP API.

#include <json.hpp>

#include "rallyanchor/anchors.hpp"
#include "rallyanchor/events.hpp"
#include "rallyanchor/score.hpp"

namespace rallyanchor {

using Json = nlohmann::json;

Json to_json(const RallySpan& rally);
RallySpan rally_from_json(const Json& j);

Json to_json(const EventAnchor& anchor);
EventAnchor anchor_from_json(const Json& j);

Json to_json(const ContextAnnotation& annotation);
ContextAnnotation annotation_from_json(const Json& j);

Json to_json(const MatchInfo& info);
MatchInfo match_info_from_json(const Json& j);

Json to_json(const MutationRecord& record);
MutationRecord mutation_from_json(const Json& j);

Json to_json(const QueryRule& rule);
QueryRule query_rule_from_json(const Json& j);

Json to_json(const RawEvent& event);

}  // namespace rallyanchor
