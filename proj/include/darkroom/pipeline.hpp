#pragma once

#include "darkroom/registry.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace darkroom {

struct Endpoint {
  std::string node;
  std::string port;
  auto operator<=>(const Endpoint&) const = default;
};

struct Edge {
  Endpoint from;  // output port
  Endpoint to;    // input port
  bool operator==(const Edge&) const = default;
};

struct Node {
  std::string id;
  std::string type;
  Params params;
};

// Parses "node:port". Throws Error(Parse).
Endpoint parse_endpoint(const std::string& text);

// DAG of filter nodes. Edits mark the edited node and everything downstream
// dirty; execute() evaluates only dirty ancestors of the sink and serves the
// rest from the cache. A failed edit leaves the graph and cache unchanged.
//
// Not thread-safe; use one instance per request.
class PipelineGraph {
 public:
  explicit PipelineGraph(const FilterRegistry& registry = default_registry()) : registry_(&registry) {}

  // Throws Error(InvalidArgument) for a duplicate id, Error(UnknownFilter).
  void add_node(const std::string& id, const std::string& type, const Params& params = {});
  void remove_node(const std::string& id);

  // Replaces any edge already feeding `to`. Throws Error(NotFound) for a
  // missing node or port, Error(TypeMismatch), Error(Cycle).
  void connect(const Endpoint& from, const Endpoint& to);
  void disconnect(const Endpoint& to);

  // Validates against the schema; always marks dirty, even for an unchanged value.
  void set_param(const std::string& node, const std::string& name, const ParamValue& value);

  // Throws Error(UnconnectedInput) naming node and port if any ancestor of
  // the sink misses a required input.
  ValuePtr execute(const Endpoint& sink, const ExecutionContext& ctx);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(const std::string& id) const;
  bool has_node(const std::string& id) const;
  bool is_dirty(const std::string& id) const { return dirty_.contains(id); }
  const std::set<std::string>& dirty() const { return dirty_; }

  // The node and everything reachable from it.
  std::set<std::string> descendants(const std::string& id) const;
  // The node and everything that reaches it.
  std::set<std::string> ancestors(const std::string& id) const;

  // Instrumentation: kernel calls since construction and the order of the
  // most recent execute().
  std::uint64_t kernel_evaluations() const { return kernel_evaluations_; }
  const std::vector<std::string>& last_evaluated() const { return last_evaluated_; }

  // {"schema": 1, "nodes": [...], "edges": [...]}
  nlohmann::ordered_json to_json() const;
  // Throws Error(Schema) with a JSON pointer in details.path,
  // Error(UnknownFilter), Error(TypeMismatch) or Error(Cycle).
  static PipelineGraph from_json(const nlohmann::json& doc, const FilterRegistry& registry = default_registry());
  static PipelineGraph from_json_text(const std::string& text, const FilterRegistry& registry = default_registry());

  // Same nodes, params and edges, independent of insertion order.
  bool structurally_equal(const PipelineGraph& other) const;

 private:
  Node* find(const std::string& id);
  const FilterDef& def(const Node& node) const { return registry_->get(node.type); }
  void mark_dirty(const std::string& id);
  bool reaches(const std::string& from, const std::string& to) const;
  std::vector<std::string> topo_order(const std::set<std::string>& subset) const;

  const FilterRegistry* registry_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::set<std::string> dirty_;
  std::map<std::string, PortValues> cache_;
  std::vector<const GBuffer*> cached_inputs_;
  std::uint64_t kernel_evaluations_ = 0;
  std::vector<std::string> last_evaluated_;
};

}  // namespace darkroom
