#include "darkroom/registry.hpp"

#include "darkroom/error.hpp"

#include <cmath>
#include <limits>

namespace darkroom {

std::string_view to_string(PortType type) {
  switch (type) {
    case PortType::GBuffer: return "gbuffer";
    case PortType::Channel: return "channel";
    case PortType::Image: return "image";
    case PortType::ColorMap: return "colormap";
    case PortType::Number: return "number";
  }
  return "unknown";
}

PortType type_of(const Value& value) {
  switch (value.index()) {
    case 0: return PortType::GBuffer;
    case 1: return PortType::Channel;
    case 2: return PortType::Image;
    case 3: return PortType::ColorMap;
    default: return PortType::Number;
  }
}

nlohmann::json param_to_json(const ParamValue& value) {
  if (const auto* d = std::get_if<double>(&value)) {
    if (std::nearbyint(*d) == *d && std::abs(*d) < 9.0e15) return static_cast<std::int64_t>(*d);
    return *d;
  }
  return std::get<std::string>(value);
}

void ParamSpec::validate(const ParamValue& value) const {
  const bool is_number = std::holds_alternative<double>(value);
  if (kind == Kind::Enum || kind == Kind::Text) {
    if (is_number) throw Error(ErrorCode::Schema, "parameter '" + name + "' expects a string", {{"param", name}});
    if (kind == Kind::Enum) {
      const auto& s = std::get<std::string>(value);
      if (std::find(choices.begin(), choices.end(), s) == choices.end()) {
        throw Error(ErrorCode::OutOfRange, "parameter '" + name + "' does not accept '" + s + "'",
                    {{"param", name}, {"value", s}, {"choices", choices}});
      }
    }
    return;
  }
  if (!is_number) throw Error(ErrorCode::Schema, "parameter '" + name + "' expects a number", {{"param", name}});
  const double v = std::get<double>(value);
  if (!std::isfinite(v)) throw Error(ErrorCode::OutOfRange, "parameter '" + name + "' must be finite", {{"param", name}});
  if (kind == Kind::Int && std::nearbyint(v) != v) {
    throw Error(ErrorCode::OutOfRange, "parameter '" + name + "' must be an integer", {{"param", name}, {"value", v}});
  }
  const bool below = min_exclusive ? !(v > min) : v < min;
  if (below || v > max) {
    throw Error(ErrorCode::OutOfRange,
                "parameter '" + name + "' = " + std::to_string(v) + " outside " + (min_exclusive ? "(" : "[") +
                    std::to_string(min) + ", " + std::to_string(max) + "]",
                {{"param", name}, {"value", v}, {"min", min}, {"max", max}, {"min_exclusive", min_exclusive}});
  }
}

double KernelArgs::number(const std::string& name) const {
  if (auto it = inputs_.find(name); it != inputs_.end()) return std::get<double>(*it->second);
  return std::get<double>(params_.at(name));
}

const std::string& KernelArgs::text(const std::string& name) const { return std::get<std::string>(params_.at(name)); }

const Value& KernelArgs::value(const std::string& port) const {
  auto it = inputs_.find(port);
  if (it == inputs_.end()) {
    throw Error(ErrorCode::UnconnectedInput, "node '" + node_ + "' input '" + port + "' is not connected",
                {{"node", node_}, {"port", port}});
  }
  return *it->second;
}

const ChannelValue& KernelArgs::channel(const std::string& port) const { return std::get<ChannelValue>(value(port)); }

const RgbaImage& KernelArgs::image(const std::string& port) const { return std::get<RgbaImage>(value(port)); }

const ColorMap* KernelArgs::colormap(const std::string& port) const {
  auto it = inputs_.find(port);
  return it == inputs_.end() ? nullptr : &std::get<ColorMap>(*it->second);
}

const ParamSpec* FilterDef::param(const std::string& param_name) const {
  for (const auto& p : params) {
    if (p.name == param_name) return &p;
  }
  return nullptr;
}

std::optional<PortSpec> FilterDef::input_port(const std::string& port) const {
  for (const auto& p : inputs) {
    if (p.name == port) return p;
  }
  for (const auto& p : params) {
    if (p.name == port && p.port) return PortSpec{p.name, *p.port, false};
  }
  return std::nullopt;
}

std::optional<PortSpec> FilterDef::output_port(const std::string& port) const {
  for (const auto& p : outputs) {
    if (p.name == port) return p;
  }
  return std::nullopt;
}

Params FilterDef::default_params() const {
  Params out;
  for (const auto& p : params) out[p.name] = p.default_value;
  return out;
}

nlohmann::json FilterDef::describe() const {
  auto kind_name = [](ParamSpec::Kind k) {
    switch (k) {
      case ParamSpec::Kind::Float: return "float";
      case ParamSpec::Kind::Int: return "int";
      case ParamSpec::Kind::Enum: return "enum";
      case ParamSpec::Kind::Text: return "text";
    }
    return "float";
  };
  nlohmann::json j;
  j["name"] = name;
  j["description"] = description;
  j["params"] = nlohmann::json::array();
  for (const auto& p : params) {
    nlohmann::json pj{{"name", p.name}, {"kind", kind_name(p.kind)}, {"default", param_to_json(p.default_value)}};
    if (p.kind == ParamSpec::Kind::Float || p.kind == ParamSpec::Kind::Int) {
      pj["range"] = {{"min", p.min}, {"max", p.max}, {"min_exclusive", p.min_exclusive}};
      if (p.step > 0.0) pj["step"] = p.step;
    }
    if (p.kind == ParamSpec::Kind::Enum) pj["choices"] = p.choices;
    pj["port"] = p.port ? nlohmann::json(std::string(to_string(*p.port))) : nlohmann::json(nullptr);
    if (!p.description.empty()) pj["description"] = p.description;
    j["params"].push_back(std::move(pj));
  }
  auto ports = [](const std::vector<PortSpec>& list) {
    auto arr = nlohmann::json::array();
    for (const auto& p : list) {
      arr.push_back({{"name", p.name}, {"type", std::string(to_string(p.type))}, {"required", p.required}});
    }
    return arr;
  };
  j["inputs"] = ports(inputs);
  j["outputs"] = ports(outputs);
  return j;
}

void FilterRegistry::add(FilterDef def) {
  if (contains(def.name)) throw Error(ErrorCode::InvalidArgument, "filter '" + def.name + "' already registered");
  filters_.push_back(std::move(def));
}

bool FilterRegistry::contains(const std::string& name) const {
  return std::any_of(filters_.begin(), filters_.end(), [&](const FilterDef& f) { return f.name == name; });
}

const FilterDef& FilterRegistry::get(const std::string& name) const {
  for (const auto& f : filters_) {
    if (f.name == name) return f;
  }
  throw Error(ErrorCode::UnknownFilter, "unknown filter type '" + name + "'", {{"type", name}});
}

nlohmann::json FilterRegistry::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& f : filters_) j.push_back(f.describe());
  return {{"schema", 1}, {"filters", j}};
}

}  // namespace darkroom
