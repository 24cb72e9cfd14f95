#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "lddmm/error.hpp"
#include "lddmm/experiments.hpp"
#include "lddmm/io.hpp"
#include "lddmm/shapes.hpp"
#include "oracles.hpp"

using namespace lddmm;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"({
  "fields": [{"name": "f", "kernel": {"family": "gaussian", "sigma": 1.0}, "groups": ["shape"]}],
  "q0": {"groups": [{"name": "shape", "shape": {"type": "circle", "n": 6, "center": [0, 0], "radius": 1}}]},
  "target": {"groups": [{"name": "shape", "shape": {"type": "circle", "n": 6, "center": [0.5, 0], "radius": 1}}]}
})";

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lddmm_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config defaults and round trip") {
  const ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.dim == 2);
  CHECK(c.attachment_weight == 1.0);
  CHECK(c.solver == "shooting");
  CHECK(c.constraints.empty());
  CHECK(c.initial_momentum.kind == "zero");

  for (const auto& name : builtin_example_names()) {
    const ExperimentConfig e = builtin_example(name);
    const std::string text = config_to_string(e);
    CHECK(config_to_string(parse_config(text)) == text);
  }
  CHECK_THROWS_AS(builtin_example("nope"), InvalidInput);
}

TEST_CASE("schema errors name the offending field") {
  std::string bad = kMinimal;
  bad.replace(bad.find("\"sigma\": 1.0"), 12, "\"sigma\": -1");
  CHECK(message_of(bad).find("fields[0].kernel.sigma") != std::string::npos);

  bad = kMinimal;
  bad.replace(bad.find("gaussian"), 8, "laplace");
  CHECK(message_of(bad).find("fields[0].kernel.family") != std::string::npos);

  bad = kMinimal;
  bad.replace(bad.find("\"n\": 6"), 6, "\"n\": \"six\"");
  CHECK(message_of(bad).find("q0.groups[0].shape.n") != std::string::npos);

  bad = kMinimal;
  bad.insert(bad.rfind('}'), ", \"colour\": 1");
  CHECK(message_of(bad).find("colour") != std::string::npos);

  bad = kMinimal;
  bad.insert(bad.rfind('}'), ", \"constraints\": [{\"type\": \"area\"}]");
  CHECK(message_of(bad).find("constraints[0].type") != std::string::npos);

  CHECK(message_of(R"({"q0": {}})").find("fields") != std::string::npos);
  CHECK(message_of("{ broken").find("config") != std::string::npos);
  CHECK_THROWS_AS(read_config("/nonexistent/config.json"), InvalidInput);
}

TEST_CASE("shape files") {
  oracle::Rng rng(31);
  const LandmarkState s(2, rng.normal_vector(10), {{"a", {0, 1, 2}}, {"b", {3, 4}}});
  const std::string text = shape_to_string(s);
  CHECK(parse_shape(text) == s);  // shortest round-trip doubles restore bits

  const auto dir = scratch("shape");
  write_shape(s, dir / "s.json");
  CHECK(read_shape(dir / "s.json") == s);

  CHECK_THROWS_AS(parse_shape(R"({"dim": 2, "groups": [{"name": "a", "points": [[0, 0, 0]]}]})"), SchemaError);
  CHECK_THROWS_AS(parse_shape(R"({"dim": 2})"), SchemaError);
  // interleaved groups cannot be written as consecutive ranges
  const LandmarkState mixed(1, Vector::Zero(2), {{"a", {1}}, {"b", {0}}});
  CHECK_THROWS_AS(shape_to_string(mixed), InvalidInput);
}

TEST_CASE("trajectory files") {
  oracle::Rng rng(32);
  const LandmarkState s = circle_shape(5, {0, 0}, 1);
  const ShapeModel plain = ShapeModel::single({KernelFamily::Gaussian, 1.0}, s);
  const ShapeModel vol = ShapeModel::single({KernelFamily::Gaussian, 1.0}, s, ConstraintSet({volume_constraint("shape")}));

  for (const ShapeModel* m : {&plain, &vol}) {
    const int steps = 7;
    const Trajectory t = integrate_geodesic(*m, s.coords(), rng.normal_vector(10, 0.3), steps);
    const std::string text = trajectory_to_string(t);
    const Trajectory back = parse_trajectory(text);
    CHECK(trajectory_to_string(back) == text);
    CHECK(back.q.size() == static_cast<std::size_t>(steps + 1));
    for (int i = 0; i <= steps; ++i) CHECK(back.q[i] == t.q[i]);
    for (std::size_t i = 0; i < t.lambda.size(); ++i) CHECK(back.lambda[i] == t.lambda[i]);

    // (N + 1) n landmark rows, N + 1 node rows
    int rows = 0;
    bool in_landmarks = false;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      if (line == "[landmarks]") in_landmarks = true;
      else if (line == "[nodes]") in_landmarks = false;
      else if (in_landmarks && !line.empty() && line[0] != '#') ++rows;
    }
    CHECK(rows == (steps + 1) * 5);
  }

  Controls u(4, rng.normal_vector(10, 0.3));
  const Trajectory c = flow_controlled(plain, s.coords(), u);
  const Trajectory back = parse_trajectory(trajectory_to_string(c));
  CHECK(back.kind == Trajectory::Kind::Controlled);
  CHECK(back.m.size() == 4);
  CHECK(back.m[2] == c.m[2]);

  std::string broken = trajectory_to_string(c);
  broken.replace(broken.find("[nodes]"), 7, "[points]");
  CHECK_THROWS_AS(parse_trajectory(broken), SchemaError);
  CHECK_THROWS_AS(parse_trajectory("lddmm-trajectory 2\n"), SchemaError);
}

TEST_CASE("runs are deterministic and write every output") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.options.steps = 8;
  cfg.options.max_inner_iters = 5;
  cfg.initial_momentum = {"random", 0.1, {}};
  cfg.seed = 9;
  const auto a = scratch("run_a"), b = scratch("run_b");
  run_experiment(cfg, {}, a);
  run_experiment(cfg, {}, b);
  for (const char* f : {"config.json", "trajectory.txt", "report.json", "final_shape.json", "target_shape.json", "grid.txt"}) {
    REQUIRE(std::filesystem::exists(a / f));
    CHECK(read_text(a / f) == read_text(b / f));
  }
  CHECK(read_config(a / "config.json").seed == 9);

  ExperimentConfig other = cfg;
  other.seed = 10;
  CHECK(initial_momentum(other, build_problem(other)) != initial_momentum(cfg, build_problem(cfg)));
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
}
