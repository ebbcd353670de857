#pragma once

#include "darkroom/imaging.hpp"
#include "darkroom/parallel.hpp"
#include "darkroom/passes.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace darkroom {

enum class PortType { GBuffer, Channel, Image, ColorMap, Number };

std::string_view to_string(PortType type);

// A single-plane channel travelling through the graph. Depth channels carry
// the camera that produced them so downstream passes can reconstruct
// geometry.
struct ChannelValue {
  Plane plane;
  std::optional<Camera> camera;
};

using Value = std::variant<std::shared_ptr<const GBuffer>, ChannelValue, RgbaImage, ColorMap, double>;
using ValuePtr = std::shared_ptr<const Value>;

PortType type_of(const Value& value);

using ParamValue = std::variant<double, std::string>;

struct ParamSpec {
  enum class Kind { Float, Int, Enum, Text };
  std::string name;
  Kind kind = Kind::Float;
  ParamValue default_value = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool min_exclusive = false;
  double step = 0.0;
  std::vector<std::string> choices;  // Enum only
  std::optional<PortType> port;      // exposed as a connectable input port
  std::string description;

  // Throws Error(OutOfRange) or Error(Schema).
  void validate(const ParamValue& value) const;
};

struct PortSpec {
  std::string name;
  PortType type;
  bool required = true;
};

struct ExecutionContext {
  std::vector<std::shared_ptr<const GBuffer>> gbuffers;
  Exec exec = Exec::Parallel;
};

using Params = std::map<std::string, ParamValue>;
using PortValues = std::map<std::string, ValuePtr>;

class KernelArgs {
 public:
  KernelArgs(const std::string& node, const PortValues& inputs, const Params& params, const ExecutionContext& ctx)
      : node_(node), inputs_(inputs), params_(params), ctx_(ctx) {}

  const std::string& node() const { return node_; }
  const ExecutionContext& context() const { return ctx_; }
  bool has(const std::string& port) const { return inputs_.contains(port); }

  // A connected parameter port overrides the stored value.
  double number(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  const ChannelValue& channel(const std::string& port) const;
  const RgbaImage& image(const std::string& port) const;
  const ColorMap* colormap(const std::string& port) const;
  const Value& value(const std::string& port) const;

 private:
  const std::string& node_;
  const PortValues& inputs_;
  const Params& params_;
  const ExecutionContext& ctx_;
};

using Kernel = std::function<PortValues(const KernelArgs&)>;

// A filter declares its parameters and ports and provides the kernel that maps
// inputs to outputs.
struct FilterDef {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  std::vector<PortSpec> inputs;   // data ports; parameter ports are derived
  std::vector<PortSpec> outputs;
  Kernel kernel;

  const ParamSpec* param(const std::string& name) const;
  // Data inputs followed by parameter ports.
  std::optional<PortSpec> input_port(const std::string& name) const;
  std::optional<PortSpec> output_port(const std::string& name) const;
  Params default_params() const;
  nlohmann::json describe() const;
};

class FilterRegistry {
 public:
  // Throws Error(InvalidArgument) on a duplicate name.
  void add(FilterDef def);
  // Throws Error(UnknownFilter).
  const FilterDef& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<FilterDef>& filters() const { return filters_; }
  nlohmann::json to_json() const;

 private:
  std::vector<FilterDef> filters_;
};

// Source, the seven shading filters, and Modulate.
const FilterRegistry& default_registry();

nlohmann::json param_to_json(const ParamValue& value);

}  // namespace darkroom
