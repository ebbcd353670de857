#include "darkroom/error.hpp"
#include "darkroom/pipeline.hpp"
#include "darkroom/primitives.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

using namespace darkroom;

namespace {

// Numeric toy filters: Const emits its value, Add sums two optional inputs
// and its own offset.
FilterRegistry toy_registry() {
  FilterRegistry r;
  FilterDef c;
  c.name = "Const";
  c.params = {{.name = "v", .default_value = 1.0, .min = -1e6, .max = 1e6, .port = PortType::Number}};
  c.outputs = {{"out", PortType::Number}};
  c.kernel = [](const KernelArgs& a) {
    return PortValues{{"out", std::make_shared<const Value>(a.number("v"))}};
  };
  r.add(c);

  FilterDef add;
  add.name = "Add";
  add.params = {{.name = "k", .default_value = 0.0, .min = -1e6, .max = 1e6}};
  add.inputs = {{"a", PortType::Number, false}, {"b", PortType::Number, false}};
  add.outputs = {{"out", PortType::Number}};
  add.kernel = [](const KernelArgs& a) {
    double sum = a.number("k");
    for (const char* port : {"a", "b"}) {
      if (a.has(port)) sum += std::get<double>(a.value(port));
    }
    return PortValues{{"out", std::make_shared<const Value>(sum)}};
  };
  r.add(add);

  FilterDef img;
  img.name = "Image";
  img.outputs = {{"image", PortType::Image}};
  img.kernel = [](const KernelArgs&) {
    return PortValues{{"image", std::make_shared<const Value>(RgbaImage(1, 1))}};
  };
  r.add(img);
  return r;
}

const FilterRegistry& toys() {
  static const FilterRegistry r = toy_registry();
  return r;
}

double number(const ValuePtr& v) { return std::get<double>(*v); }

std::shared_ptr<const GBuffer> torus_gbuffer(int size = 48) {
  const auto mesh = make_torus(1.0, 0.35, 24, 12);
  const auto cam = test::look_at({0, 3.5, 1.5}, {0, 0, 0}, {0, 0, 1}, size, size);
  return std::make_shared<const GBuffer>(render_gbuffer(mesh, build_bvh(mesh), cam, {"height"}));
}

ExecutionContext context_of(std::shared_ptr<const GBuffer> g) {
  ExecutionContext ctx;
  ctx.gbuffers.push_back(std::move(g));
  return ctx;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
Error error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorCode::InvalidArgument, "");
}

// Forward reachability over the edge list, independent of the graph class.
std::set<std::string> reach(const std::vector<Edge>& edges, const std::string& start, bool forward) {
  std::set<std::string> seen{start};
  std::deque<std::string> queue{start};
  while (!queue.empty()) {
    const auto id = queue.front();
    queue.pop_front();
    for (const auto& e : edges) {
      const auto& a = forward ? e.from.node : e.to.node;
      const auto& b = forward ? e.to.node : e.from.node;
      if (a == id && seen.insert(b).second) queue.push_back(b);
    }
  }
  return seen;
}

void check_topological(const PipelineGraph& g) {
  const auto& order = g.last_evaluated();
  for (const auto& e : g.edges()) {
    const auto from = std::find(order.begin(), order.end(), e.from.node);
    const auto to = std::find(order.begin(), order.end(), e.to.node);
    if (to != order.end() && from != order.end()) CHECK(from < to);
  }
}

}  // namespace

TEST_CASE("connect marks the target dirty and replaces an occupied input") {
  PipelineGraph g(toys());
  g.add_node("a", "Const", {{"v", 2.0}});
  g.add_node("b", "Add");
  g.add_node("c", "Const", {{"v", 5.0}});
  ExecutionContext ctx;
  g.execute({"a", "out"}, ctx);
  g.execute({"b", "out"}, ctx);
  g.execute({"c", "out"}, ctx);
  CHECK(g.dirty().empty());

  g.connect({"a", "out"}, {"b", "a"});
  CHECK(g.edges().size() == 1);
  CHECK(g.is_dirty("b"));
  CHECK_FALSE(g.is_dirty("a"));
  CHECK(number(g.execute({"b", "out"}, ctx)) == 2.0);

  g.connect({"c", "out"}, {"b", "a"});
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].from == Endpoint{"c", "out"});
  CHECK(number(g.execute({"b", "out"}, ctx)) == 5.0);

  g.disconnect({"b", "a"});
  CHECK(g.edges().empty());
  CHECK(number(g.execute({"b", "out"}, ctx)) == 0.0);
}

TEST_CASE("a cycle is rejected and leaves the graph unchanged") {
  PipelineGraph g(toys());
  g.add_node("a", "Add");
  g.add_node("b", "Add");
  g.connect({"a", "out"}, {"b", "a"});
  ExecutionContext ctx;
  g.execute({"b", "out"}, ctx);
  const auto edges = g.edges();
  const auto evaluations = g.kernel_evaluations();

  const auto e = error_of([&] { g.connect({"b", "out"}, {"a", "a"}); });
  CHECK(e.code() == ErrorCode::Cycle);
  CHECK(e.details()["from"] == nlohmann::json({"b", "out"}));
  CHECK(e.details()["to"] == nlohmann::json({"a", "a"}));
  CHECK(g.edges() == edges);
  CHECK(g.dirty().empty());
  g.execute({"b", "out"}, ctx);
  CHECK(g.kernel_evaluations() == evaluations);

  CHECK(error_of([&] { g.connect({"a", "out"}, {"a", "b"}); }).code() == ErrorCode::Cycle);
}

TEST_CASE("port types must match") {
  PipelineGraph g(toys());
  g.add_node("i", "Image");
  g.add_node("s", "Add");
  const auto e = error_of([&] { g.connect({"i", "image"}, {"s", "a"}); });
  CHECK(e.code() == ErrorCode::TypeMismatch);
  CHECK(e.details()["from_type"] == "image");
  CHECK(e.details()["to_type"] == "number");
  CHECK(g.edges().empty());
  CHECK(error_of([&] { g.connect({"i", "nope"}, {"s", "a"}); }).code() == ErrorCode::NotFound);
  CHECK(error_of([&] { g.connect({"x", "out"}, {"s", "a"}); }).code() == ErrorCode::NotFound);
}

TEST_CASE("node and parameter validation") {
  PipelineGraph g(toys());
  g.add_node("a", "Const");
  CHECK(error_of([&] { g.add_node("a", "Const"); }).code() == ErrorCode::InvalidArgument);
  CHECK(error_of([&] { g.add_node("f", "Foo"); }).code() == ErrorCode::UnknownFilter);
  CHECK(error_of([&] { g.add_node("p", "Const", {{"w", 1.0}}); }).code() == ErrorCode::Schema);
  CHECK(error_of([&] { g.set_param("a", "v", 1e9); }).code() == ErrorCode::OutOfRange);
  CHECK(error_of([&] { g.set_param("a", "v", std::string("x")); }).code() == ErrorCode::Schema);
  CHECK(error_of([&] { g.set_param("zz", "v", 1.0); }).code() == ErrorCode::NotFound);
  CHECK(g.node("a").params.at("v") == ParamValue{1.0});
}

TEST_CASE("SSAO parameter edits dirty only the downstream nodes") {
  PipelineGraph g;
  g.add_node("src", "Source", {{"channel", std::string("scalar:height")}});
  g.add_node("color", "ColorMapping", {{"lo", -0.35}, {"hi", 0.35}});
  g.add_node("ao", "SSAO");
  g.add_node("shade", "Modulate");
  g.add_node("aa", "FXAA");
  g.connect({"src", "channel"}, {"color", "scalar"});
  g.connect({"src", "depth"}, {"ao", "depth"});
  g.connect({"color", "image"}, {"shade", "image"});
  g.connect({"ao", "occlusion"}, {"shade", "mask"});
  g.connect({"shade", "image"}, {"aa", "image"});
  const auto ctx = context_of(torus_gbuffer());
  g.execute({"aa", "image"}, ctx);
  CHECK(g.kernel_evaluations() == 5);
  check_topological(g);

  g.set_param("ao", "radius_pct", 3.0);
  CHECK(g.dirty() == std::set<std::string>{"ao", "shade", "aa"});
  g.execute({"aa", "image"}, ctx);
  CHECK(g.kernel_evaluations() == 8);
  CHECK(g.last_evaluated() == std::vector<std::string>{"ao", "shade", "aa"});

  g.execute({"aa", "image"}, ctx);
  CHECK(g.kernel_evaluations() == 8);
  CHECK(g.last_evaluated().empty());

  g.set_param("ao", "radius_pct", 3.0);
  CHECK(g.is_dirty("ao"));
  CHECK(error_of([&] { g.set_param("ao", "samples", 0.0); }).code() == ErrorCode::OutOfRange);
  CHECK(g.node("ao").params.at("samples") == ParamValue{16.0});
}

TEST_CASE("a diamond evaluates its shared source once") {
  PipelineGraph g;
  g.add_node("src", "Source");
  g.add_node("warm", "ColorMapping", {{"lo", 2.0}, {"hi", 5.0}, {"colormap", std::string("inferno")}});
  g.add_node("cool", "ColorMapping", {{"lo", 2.0}, {"hi", 5.0}, {"colormap", std::string("cool_warm")}});
  g.add_node("mix", "Compositing");
  g.connect({"src", "channel"}, {"warm", "scalar"});
  g.connect({"src", "channel"}, {"cool", "scalar"});
  g.connect({"src", "depth"}, {"mix", "depth_a"});
  g.connect({"warm", "image"}, {"mix", "image_a"});
  g.connect({"src", "depth"}, {"mix", "depth_b"});
  g.connect({"cool", "image"}, {"mix", "image_b"});
  const auto ctx = context_of(torus_gbuffer(24));
  const auto out = g.execute({"mix", "image"}, ctx);
  CHECK(g.kernel_evaluations() == 4);
  CHECK(std::count(g.last_evaluated().begin(), g.last_evaluated().end(), "src") == 1);
  CHECK(g.last_evaluated().front() == "src");
  CHECK(g.last_evaluated().back() == "mix");
  // Equal depths: the first pair wins; background turns transparent.
  const auto& warm = std::get<RgbaImage>(*g.execute({"warm", "image"}, ctx));
  const auto& mixed = std::get<RgbaImage>(*out);
  const auto& depth = ctx.gbuffers[0]->plane("depth");
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    CHECK(mixed.pixels[i] == (std::isfinite(depth.data[i]) ? warm.pixels[i] : Rgba{}));
  }
}

TEST_CASE("re-evaluated nodes equal the reachability closure of an edit") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    PipelineGraph g(toys());
    const int n = 12;
    for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i), i < 3 ? "Const" : "Add");
    // Edges only go from lower to higher index, so the graph stays acyclic.
    for (int i = 3; i < n; ++i) {
      for (const char* port : {"a", "b"}) {
        if (rng() % 3 == 0) continue;
        const int from = static_cast<int>(rng() % i);
        g.connect({"n" + std::to_string(from), "out"}, {"n" + std::to_string(i), port});
      }
    }
    const Endpoint sink{"n" + std::to_string(n - 1), "out"};
    ExecutionContext ctx;
    const double before = number(g.execute(sink, ctx));
    check_topological(g);
    for (const auto& node : g.nodes()) g.execute({node.id, "out"}, ctx);
    REQUIRE(g.dirty().empty());

    const int edited = static_cast<int>(rng() % n);
    const std::string id = "n" + std::to_string(edited);
    g.set_param(id, edited < 3 ? "v" : "k", 10.0);
    const auto closure = reach(g.edges(), id, true);
    CHECK(g.dirty() == closure);

    const auto upstream = reach(g.edges(), sink.node, false);
    std::set<std::string> expected;
    for (const auto& s : closure) {
      if (upstream.contains(s)) expected.insert(s);
    }
    const auto after = number(g.execute(sink, ctx));
    const std::set<std::string> evaluated(g.last_evaluated().begin(), g.last_evaluated().end());
    CHECK(evaluated == expected);
    CHECK(g.last_evaluated().size() == expected.size());
    check_topological(g);
    if (!upstream.contains(id)) CHECK(after == before);

    // A fresh graph with the same structure agrees with the incremental result.
    auto fresh = PipelineGraph::from_json(g.to_json(), toys());
    CHECK(number(fresh.execute(sink, ctx)) == after);
  }
}

TEST_CASE("unconnected required inputs are named") {
  PipelineGraph g;
  g.add_node("src", "Source");
  g.add_node("ao", "SSAO");
  g.add_node("shade", "Modulate");
  g.connect({"src", "depth"}, {"ao", "depth"});
  g.connect({"ao", "occlusion"}, {"shade", "mask"});
  const auto ctx = context_of(torus_gbuffer(16));
  const auto e = error_of([&] { g.execute({"shade", "image"}, ctx); });
  CHECK(e.code() == ErrorCode::UnconnectedInput);
  CHECK(e.details()["node"] == "shade");
  CHECK(e.details()["port"] == "image");
  CHECK(g.kernel_evaluations() == 0);
}

TEST_CASE("a missing channel names the source node") {
  PipelineGraph g;
  g.add_node("src", "Source", {{"channel", std::string("scalar:nope")}});
  const auto ctx = context_of(torus_gbuffer(16));
  const auto e = error_of([&] { g.execute({"src", "channel"}, ctx); });
  CHECK(e.code() == ErrorCode::MissingChannel);
  CHECK(std::string(e.what()).find("src") != std::string::npos);

  g.set_param("src", "channel", std::string("depth"));
  g.set_param("src", "input", 3.0);
  CHECK(error_of([&] { g.execute({"src", "channel"}, ctx); }).code() == ErrorCode::MissingChannel);
}

TEST_CASE("a new G-buffer re-runs the sources") {
  PipelineGraph g;
  g.add_node("src", "Source");
  g.add_node("color", "ColorMapping", {{"lo", 2.0}, {"hi", 5.0}});
  g.connect({"src", "channel"}, {"color", "scalar"});
  g.execute({"color", "image"}, context_of(torus_gbuffer(16)));
  g.execute({"color", "image"}, context_of(torus_gbuffer(20)));
  CHECK(g.last_evaluated().size() == 2);
}

TEST_CASE("the demo pipeline round-trips through JSON") {
  const auto text = read_text(std::string(DARKROOM_SOURCE_DIR) + "/docs/demo_pipeline.json");
  const auto doc = nlohmann::json::parse(text);
  auto g = PipelineGraph::from_json(doc);
  CHECK(g.nodes().size() == 7);
  const auto json = g.to_json();
  CHECK(json["schema"] == 1);
  CHECK(json["edges"][0]["from"].is_array());
  auto back = PipelineGraph::from_json_text(json.dump());
  CHECK(back.structurally_equal(g));
  CHECK(back.to_json() == json);

  back.set_param("ao", "radius_pct", 2.5);
  CHECK_FALSE(back.structurally_equal(g));

  // Insertion order does not matter.
  nlohmann::json shuffled = json;
  std::reverse(shuffled["nodes"].begin(), shuffled["nodes"].end());
  std::reverse(shuffled["edges"].begin(), shuffled["edges"].end());
  CHECK(PipelineGraph::from_json(shuffled).structurally_equal(g));

  const auto ctx = context_of(torus_gbuffer(32));
  const auto a = g.execute({"aa", "image"}, ctx);
  auto fresh = PipelineGraph::from_json(doc);
  const auto b = fresh.execute({"aa", "image"}, ctx);
  CHECK(std::get<RgbaImage>(*a).pixels == std::get<RgbaImage>(*b).pixels);
}

TEST_CASE("invalid pipeline payloads") {
  auto code_and_path = [](const std::string& text) {
    const auto e = error_of([&] { PipelineGraph::from_json_text(text); });
    return std::make_pair(e.code(), e.details().value("path", std::string("?")));
  };
  const auto foo = error_of([] { PipelineGraph::from_json_text(R"({"schema":1,"nodes":[{"id":"x","type":"Foo"}]})"); });
  CHECK(foo.code() == ErrorCode::UnknownFilter);
  CHECK(std::string(foo.what()).find("Foo") != std::string::npos);
  CHECK(foo.details()["path"] == "/nodes/0/type");

  const auto cycle = error_of([] {
    PipelineGraph::from_json_text(R"({"schema":1,"nodes":[{"id":"a","type":"FXAA"},{"id":"b","type":"FXAA"}],
      "edges":[{"from":["a","image"],"to":["b","image"]},{"from":["b","image"],"to":["a","image"]}]})");
  });
  CHECK(cycle.code() == ErrorCode::Cycle);
  CHECK(cycle.details()["path"] == "/edges/1");

  CHECK(code_and_path("[1]") == std::make_pair(ErrorCode::Schema, std::string("")));
  CHECK(code_and_path("{").first == ErrorCode::Schema);
  CHECK(code_and_path(R"({"nodes":[]})") == std::make_pair(ErrorCode::Schema, std::string("/schema")));
  CHECK(code_and_path(R"({"schema":2,"nodes":[]})") == std::make_pair(ErrorCode::Schema, std::string("/schema")));
  CHECK(code_and_path(R"({"schema":1})") == std::make_pair(ErrorCode::Schema, std::string("/nodes")));
  CHECK(code_and_path(R"({"schema":1,"nodes":[{"id":3,"type":"FXAA"}]})") ==
        std::make_pair(ErrorCode::Schema, std::string("/nodes/0/id")));
  CHECK(code_and_path(R"({"schema":1,"nodes":[{"id":"a","type":"FXAA","params":{"subpixel":[1]}}]})") ==
        std::make_pair(ErrorCode::Schema, std::string("/nodes/0/params/subpixel")));
  CHECK(code_and_path(R"({"schema":1,"nodes":[{"id":"a","type":"FXAA","params":{"subpixel":9}}]})") ==
        std::make_pair(ErrorCode::OutOfRange, std::string("/nodes/0/params/subpixel")));
  CHECK(code_and_path(R"({"schema":1,"nodes":[{"id":"a","type":"FXAA"},{"id":"a","type":"FXAA"}]})") ==
        std::make_pair(ErrorCode::Schema, std::string("/nodes/1/id")));
  CHECK(code_and_path(R"({"schema":1,"nodes":[{"id":"a","type":"FXAA"}],"edges":[{"from":["a"],"to":["a","image"]}]})") ==
        std::make_pair(ErrorCode::Schema, std::string("/edges/0/from")));
  CHECK(code_and_path(R"({"schema":1,"nodes":[{"id":"a","type":"FXAA"}],"edges":[{"from":["z","image"],"to":["a","image"]}]})") ==
        std::make_pair(ErrorCode::Schema, std::string("/edges/0")));
  CHECK(code_and_path(R"({"schema":1,"nodes":[{"id":"a","type":"FXAA"},{"id":"s","type":"Source"}],
      "edges":[{"from":["s","depth"],"to":["a","image"]}]})")
            .first == ErrorCode::TypeMismatch);
  CHECK(code_and_path(R"({"schema":1,"nodes":[{"id":"a","type":"FXAA"},{"id":"b","type":"FXAA"},{"id":"c","type":"FXAA"}],
      "edges":[{"from":["a","image"],"to":["c","image"]},{"from":["b","image"],"to":["c","image"]}]})") ==
        std::make_pair(ErrorCode::Schema, std::string("/edges/1/to")));
}

TEST_CASE("endpoint parsing") {
  CHECK(parse_endpoint("ao:occlusion") == Endpoint{"ao", "occlusion"});
  CHECK_THROWS_AS(parse_endpoint("ao"), Error);
  CHECK_THROWS_AS(parse_endpoint(":x"), Error);
  CHECK_THROWS_AS(parse_endpoint("x:"), Error);
}

TEST_CASE("registry description") {
  const auto json = default_registry().to_json();
  CHECK(json["schema"] == 1);
  REQUIRE(json["filters"].size() == 9);
  std::vector<std::string> names;
  for (const auto& f : json["filters"]) names.push_back(f["name"]);
  CHECK(names == std::vector<std::string>{"Source", "ColorMapping", "Compositing", "SSAO", "SSDD", "SSDoF", "IBS",
                                          "FXAA", "Modulate"});
  const auto& ssao = json["filters"][3];
  const auto radius = std::find_if(ssao["params"].begin(), ssao["params"].end(),
                                   [](const auto& p) { return p["name"] == "radius_pct"; });
  REQUIRE(radius != ssao["params"].end());
  CHECK((*radius)["default"] == 1);
  CHECK((*radius)["range"]["min"] == 0);
  CHECK((*radius)["range"]["max"] == 100);
  CHECK((*radius)["range"]["min_exclusive"] == true);
  CHECK((*radius)["port"] == "number");
  CHECK(ssao["inputs"][0]["type"] == "channel");
}
