#include "darkroom/pipeline.hpp"

#include "darkroom/error.hpp"

#include <algorithm>
#include <deque>

namespace darkroom {

namespace {

nlohmann::json endpoint_json(const Endpoint& e) { return nlohmann::json::array({e.node, e.port}); }

Error with_path(const Error& e, const std::string& path) {
  nlohmann::json details = e.details().is_object() ? e.details() : nlohmann::json::object();
  if (!details.contains("path")) details["path"] = path;
  return Error(e.code(), e.what(), std::move(details));
}

Error schema_error(const std::string& path, const std::string& message) {
  return Error(ErrorCode::Schema, path + ": " + message, {{"path", path}});
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(ErrorCode::Parse, "expected node:port, got '" + text + "'", {{"value", text}});
  }
  return {text.substr(0, colon), text.substr(colon + 1)};
}

Node* PipelineGraph::find(const std::string& id) {
  for (auto& n : nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

bool PipelineGraph::has_node(const std::string& id) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.id == id; });
}

const Node& PipelineGraph::node(const std::string& id) const {
  for (const auto& n : nodes_) {
    if (n.id == id) return n;
  }
  throw Error(ErrorCode::NotFound, "no node '" + id + "'", {{"node", id}});
}

void PipelineGraph::add_node(const std::string& id, const std::string& type, const Params& params) {
  if (id.empty()) throw Error(ErrorCode::InvalidArgument, "node id must not be empty");
  if (has_node(id)) throw Error(ErrorCode::InvalidArgument, "duplicate node id '" + id + "'", {{"node", id}});
  const FilterDef& filter = registry_->get(type);
  Params merged = filter.default_params();
  for (const auto& [name, value] : params) {
    const ParamSpec* spec = filter.param(name);
    if (!spec) {
      throw Error(ErrorCode::Schema, "filter '" + type + "' has no parameter '" + name + "'",
                  {{"node", id}, {"param", name}});
    }
    spec->validate(value);
    merged[name] = value;
  }
  nodes_.push_back({id, type, std::move(merged)});
  dirty_.insert(id);
}

void PipelineGraph::remove_node(const std::string& id) {
  node(id);
  const auto downstream = descendants(id);
  std::erase_if(edges_, [&](const Edge& e) { return e.from.node == id || e.to.node == id; });
  for (const auto& d : downstream) {
    dirty_.insert(d);
    cache_.erase(d);
  }
  std::erase_if(nodes_, [&](const Node& n) { return n.id == id; });
  dirty_.erase(id);
}

bool PipelineGraph::reaches(const std::string& from, const std::string& to) const {
  return descendants(from).contains(to);
}

std::set<std::string> PipelineGraph::descendants(const std::string& id) const {
  std::set<std::string> seen{id};
  std::deque<std::string> queue{id};
  while (!queue.empty()) {
    const std::string current = queue.front();
    queue.pop_front();
    for (const auto& e : edges_) {
      if (e.from.node == current && seen.insert(e.to.node).second) queue.push_back(e.to.node);
    }
  }
  return seen;
}

std::set<std::string> PipelineGraph::ancestors(const std::string& id) const {
  std::set<std::string> seen{id};
  std::deque<std::string> queue{id};
  while (!queue.empty()) {
    const std::string current = queue.front();
    queue.pop_front();
    for (const auto& e : edges_) {
      if (e.to.node == current && seen.insert(e.from.node).second) queue.push_back(e.from.node);
    }
  }
  return seen;
}

void PipelineGraph::mark_dirty(const std::string& id) {
  for (const auto& d : descendants(id)) {
    dirty_.insert(d);
    cache_.erase(d);
  }
}

void PipelineGraph::connect(const Endpoint& from, const Endpoint& to) {
  const Node& src = node(from.node);
  const Node& dst = node(to.node);
  const auto out = def(src).output_port(from.port);
  if (!out) {
    throw Error(ErrorCode::NotFound, "node '" + from.node + "' has no output port '" + from.port + "'",
                {{"node", from.node}, {"port", from.port}});
  }
  const auto in = def(dst).input_port(to.port);
  if (!in) {
    throw Error(ErrorCode::NotFound, "node '" + to.node + "' has no input port '" + to.port + "'",
                {{"node", to.node}, {"port", to.port}});
  }
  if (out->type != in->type) {
    throw Error(ErrorCode::TypeMismatch,
                "cannot connect " + from.node + ":" + from.port + " (" + std::string(to_string(out->type)) + ") to " +
                    to.node + ":" + to.port + " (" + std::string(to_string(in->type)) + ")",
                {{"from", endpoint_json(from)},
                 {"to", endpoint_json(to)},
                 {"from_type", to_string(out->type)},
                 {"to_type", to_string(in->type)}});
  }
  if (from.node == to.node || reaches(to.node, from.node)) {
    throw Error(ErrorCode::Cycle,
                "connecting " + from.node + ":" + from.port + " to " + to.node + ":" + to.port + " creates a cycle",
                {{"from", endpoint_json(from)}, {"to", endpoint_json(to)}});
  }
  std::erase_if(edges_, [&](const Edge& e) { return e.to == to; });
  edges_.push_back({from, to});
  mark_dirty(to.node);
}

void PipelineGraph::disconnect(const Endpoint& to) {
  const auto before = edges_.size();
  std::erase_if(edges_, [&](const Edge& e) { return e.to == to; });
  if (edges_.size() != before) mark_dirty(to.node);
}

void PipelineGraph::set_param(const std::string& id, const std::string& name, const ParamValue& value) {
  Node* n = find(id);
  if (!n) throw Error(ErrorCode::NotFound, "no node '" + id + "'", {{"node", id}});
  const ParamSpec* spec = def(*n).param(name);
  if (!spec) {
    throw Error(ErrorCode::Schema, "filter '" + n->type + "' has no parameter '" + name + "'",
                {{"node", id}, {"param", name}});
  }
  try {
    spec->validate(value);
  } catch (const Error& e) {
    auto details = e.details();
    details["node"] = id;
    throw Error(e.code(), "node '" + id + "': " + e.what(), std::move(details));
  }
  n->params[name] = value;
  mark_dirty(id);
}

std::vector<std::string> PipelineGraph::topo_order(const std::set<std::string>& subset) const {
  // Kahn's algorithm; ties resolve in node insertion order.
  std::map<std::string, int> pending;
  for (const auto& id : subset) pending[id] = 0;
  for (const auto& e : edges_) {
    if (subset.contains(e.from.node) && subset.contains(e.to.node)) ++pending[e.to.node];
  }
  std::vector<std::string> order;
  std::set<std::string> done;
  while (order.size() < subset.size()) {
    bool progressed = false;
    for (const auto& n : nodes_) {
      if (!subset.contains(n.id) || done.contains(n.id) || pending[n.id] != 0) continue;
      order.push_back(n.id);
      done.insert(n.id);
      for (const auto& e : edges_) {
        if (e.from.node == n.id && subset.contains(e.to.node)) --pending[e.to.node];
      }
      progressed = true;
      break;
    }
    if (!progressed) throw Error(ErrorCode::Cycle, "pipeline graph contains a cycle");
  }
  return order;
}

ValuePtr PipelineGraph::execute(const Endpoint& sink, const ExecutionContext& ctx) {
  const Node& sink_node = node(sink.node);
  if (!def(sink_node).output_port(sink.port)) {
    throw Error(ErrorCode::NotFound, "node '" + sink.node + "' has no output port '" + sink.port + "'",
                {{"node", sink.node}, {"port", sink.port}});
  }

  std::vector<const GBuffer*> inputs;
  for (const auto& g : ctx.gbuffers) inputs.push_back(g.get());
  if (inputs != cached_inputs_) {
    for (const auto& n : nodes_) {
      if (n.type == "Source") mark_dirty(n.id);
    }
    cached_inputs_ = inputs;
  }

  const auto needed = ancestors(sink.node);
  const auto order = topo_order(needed);
  for (const auto& id : order) {
    const Node& n = node(id);
    for (const auto& port : def(n).inputs) {
      if (!port.required) continue;
      const bool connected =
          std::any_of(edges_.begin(), edges_.end(), [&](const Edge& e) { return e.to.node == id && e.to.port == port.name; });
      if (!connected) {
        throw Error(ErrorCode::UnconnectedInput, "node '" + id + "' input '" + port.name + "' is not connected",
                    {{"node", id}, {"port", port.name}});
      }
    }
  }

  last_evaluated_.clear();
  for (const auto& id : order) {
    if (!dirty_.contains(id)) continue;
    const Node& n = node(id);
    PortValues in;
    for (const auto& e : edges_) {
      if (e.to.node != id) continue;
      const auto& upstream = cache_.at(e.from.node);
      auto it = upstream.find(e.from.port);
      if (it == upstream.end()) {
        throw Error(ErrorCode::InvalidArgument, "node '" + e.from.node + "' produced no '" + e.from.port + "'",
                    {{"node", e.from.node}, {"port", e.from.port}});
      }
      in[e.to.port] = it->second;
    }
    KernelArgs args(n.id, in, n.params, ctx);
    PortValues out = def(n).kernel(args);
    ++kernel_evaluations_;
    last_evaluated_.push_back(id);
    cache_[id] = std::move(out);
    dirty_.erase(id);
  }
  const auto& values = cache_.at(sink.node);
  auto it = values.find(sink.port);
  if (it == values.end()) {
    throw Error(ErrorCode::InvalidArgument, "node '" + sink.node + "' produced no '" + sink.port + "'",
                {{"node", sink.node}, {"port", sink.port}});
  }
  return it->second;
}

nlohmann::ordered_json PipelineGraph::to_json() const {
  nlohmann::ordered_json doc;
  doc["schema"] = 1;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : nodes_) {
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [name, value] : n.params) params[name] = param_to_json(value);
    doc["nodes"].push_back({{"id", n.id}, {"type", n.type}, {"params", params}});
  }
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : edges_) {
    doc["edges"].push_back({{"from", {e.from.node, e.from.port}}, {"to", {e.to.node, e.to.port}}});
  }
  return doc;
}

PipelineGraph PipelineGraph::from_json_text(const std::string& text, const FilterRegistry& registry) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Schema, std::string("pipeline is not valid JSON: ") + e.what(), {{"path", ""}});
  }
  return from_json(doc, registry);
}

PipelineGraph PipelineGraph::from_json(const nlohmann::json& doc, const FilterRegistry& registry) {
  if (!doc.is_object()) throw schema_error("", "pipeline must be an object");
  if (!doc.contains("schema")) throw schema_error("/schema", "missing");
  if (!doc["schema"].is_number_integer() || doc["schema"].get<int>() != 1) {
    throw schema_error("/schema", "unsupported schema version " + doc["schema"].dump());
  }
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) throw schema_error("/nodes", "expected an array");
  if (doc.contains("edges") && !doc["edges"].is_array()) throw schema_error("/edges", "expected an array");

  PipelineGraph g(registry);
  const auto& nodes = doc["nodes"];
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "/nodes/" + std::to_string(i);
    const auto& n = nodes[i];
    if (!n.is_object()) throw schema_error(path, "expected an object");
    if (!n.contains("id") || !n["id"].is_string()) throw schema_error(path + "/id", "expected a string");
    if (!n.contains("type") || !n["type"].is_string()) throw schema_error(path + "/type", "expected a string");
    Params params;
    if (n.contains("params")) {
      if (!n["params"].is_object()) throw schema_error(path + "/params", "expected an object");
      for (const auto& [name, value] : n["params"].items()) {
        if (value.is_number()) {
          params[name] = value.get<double>();
        } else if (value.is_string()) {
          params[name] = value.get<std::string>();
        } else {
          throw schema_error(path + "/params/" + name, "expected a number or a string");
        }
      }
    }
    const std::string id = n["id"].get<std::string>();
    try {
      g.add_node(id, n["type"].get<std::string>(), params);
    } catch (const Error& e) {
      std::string where = path;
      if (e.code() == ErrorCode::UnknownFilter) where += "/type";
      if (e.details().contains("param")) where += "/params/" + e.details()["param"].get<std::string>();
      if (e.code() == ErrorCode::InvalidArgument) throw with_path(Error(ErrorCode::Schema, e.what(), e.details()), path + "/id");
      throw with_path(e, where);
    }
  }

  if (doc.contains("edges")) {
    const auto& edges = doc["edges"];
    std::set<Endpoint> fed;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const std::string path = "/edges/" + std::to_string(i);
      const auto& e = edges[i];
      if (!e.is_object()) throw schema_error(path, "expected an object");
      auto endpoint = [&](const char* key) {
        const std::string p = path + "/" + key;
        if (!e.contains(key) || !e[key].is_array() || e[key].size() != 2 || !e[key][0].is_string() ||
            !e[key][1].is_string()) {
          throw schema_error(p, "expected [node, port]");
        }
        return Endpoint{e[key][0].get<std::string>(), e[key][1].get<std::string>()};
      };
      const Endpoint from = endpoint("from");
      const Endpoint to = endpoint("to");
      if (!fed.insert(to).second) throw schema_error(path + "/to", "input " + to.node + ":" + to.port + " is fed twice");
      try {
        g.connect(from, to);
      } catch (const Error& err) {
        if (err.code() == ErrorCode::NotFound) throw with_path(Error(ErrorCode::Schema, err.what(), err.details()), path);
        throw with_path(err, path);
      }
    }
  }
  return g;
}

bool PipelineGraph::structurally_equal(const PipelineGraph& other) const {
  if (nodes_.size() != other.nodes_.size() || edges_.size() != other.edges_.size()) return false;
  for (const auto& n : nodes_) {
    if (!other.has_node(n.id)) return false;
    const Node& o = other.node(n.id);
    if (o.type != n.type || o.params != n.params) return false;
  }
  auto key = [](const Edge& e) { return std::pair(e.from, e.to); };
  std::set<std::pair<Endpoint, Endpoint>> mine, theirs;
  for (const auto& e : edges_) mine.insert(key(e));
  for (const auto& e : other.edges_) theirs.insert(key(e));
  return mine == theirs;
}

}  // namespace darkroom
