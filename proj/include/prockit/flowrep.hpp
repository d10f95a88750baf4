#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prockit/corpus.hpp"

namespace prockit {

// Slots of a single instruction. Every span is a verbatim substring of the
// step text.
struct FlowStep {
  std::string action_verb;
  std::optional<std::string> actee;
  std::optional<std::string> temporal;
  std::optional<std::string> spatial;
  std::optional<std::string> quantitative;
  std::vector<std::string> preconditions;
  std::vector<std::string> postconditions;
  std::vector<std::string> instruments;
  std::optional<std::string> purpose;

  bool operator==(const FlowStep&) const = default;
};

// Rule-based slot filling for an imperative sentence. Throws
// Error{kNotImperative} when the sentence opens with a non-verb and no later
// clause starts with a known verb, and Error{kValidation} for empty input.
FlowStep extract_flow_step(std::string_view step_text);

enum class VertexKind { kAction, kEntity };
enum class Relation { kEquality, kSubset, kApplication, kOther };

std::string_view relation_name(Relation relation);

struct GraphVertex {
  std::string id;  // "a<step>" for actions, "e<n>" for entities
  VertexKind kind = VertexKind::kAction;
  std::string label;
  std::optional<std::size_t> step_index;  // actions only

  bool operator==(const GraphVertex&) const = default;
};

struct GraphEdge {
  std::string from;
  std::string to;
  Relation relation = Relation::kOther;
  bool inferred = false;  // carried-forward reference to an earlier product

  bool operator==(const GraphEdge&) const = default;
};

struct EntityGraph {
  std::vector<GraphVertex> vertices;
  std::vector<GraphEdge> edges;
};

// One action vertex per step chained by `other` edges, entity vertices for
// actees and instruments (identity by case-folded label), `application`
// edges from actions to their entities, and `equality`/`subset` edges from a
// new entity to earlier ones whose labels match after dropping determiners.
// A step without an actee is linked to the most recent product: the
// destination of the last "to/into/onto/in" phrase, or else the last actee.
EntityGraph build_entity_graph(const std::vector<std::string>& steps);
EntityGraph build_entity_graph(const Procedure& procedure);

// "V<TAB>id<TAB>kind<TAB>step|-<TAB>label" and
// "E<TAB>from<TAB>to<TAB>relation[<TAB>inferred]" lines.
std::string entity_graph_to_edge_list(const EntityGraph& graph);
std::string entity_graph_to_json(const EntityGraph& graph);
std::string flow_step_to_json(const FlowStep& step);

}  // namespace prockit
