#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>

#include "lddmm/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string("\"") + LDDMM_CLI_PATH + "\" " + args + " 2>&1";
  Outcome r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("lddmm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSmall = R"({
  "fields": [{"name": "f", "kernel": {"family": "gaussian", "sigma": 1.0}, "groups": ["shape"]}],
  "q0": {"groups": [{"name": "shape", "shape": {"type": "circle", "n": 6, "center": [0, 0], "radius": 1}}]},
  "target": {"groups": [{"name": "shape", "shape": {"type": "circle", "n": 6, "center": [0.4, 0], "radius": 1}}]},
  "attachment_weight": 5,
  "constraints": [{"type": "volume", "group": "shape"}],
  "options": {"steps": 10, "max_inner_iters": 5},
  "initial_momentum": {"kind": "random", "scale": 0.1},
  "grid": {"resolution": 5, "margin": 0.5}
})";

}  // namespace

TEST_CASE("example prints a config that runs") {
  const Outcome e = run("example volume-circle --steps 12");
  CHECK(e.status == 0);
  CHECK(e.out.find("\"volume-circle\"") != std::string::npos);
  CHECK(e.out.find("\"steps\": 12") != std::string::npos);
  CHECK(run("example no-such-example").status != 0);
}

TEST_CASE("same seed gives identical files") {
  const fs::path dir = scratch("seed");
  lddmm::write_text(dir / "small.json", kSmall);
  const fs::path cfg = dir / "small.json";
  REQUIRE(run("run \"" + cfg.string() + "\" --seed 4 --out \"" + (dir / "a").string() + "\"").status == 0);
  REQUIRE(run("run \"" + cfg.string() + "\" --seed 4 --out \"" + (dir / "b").string() + "\"").status == 0);
  for (const char* f : {"trajectory.txt", "report.json", "final_shape.json", "grid.txt", "config.json"})
    CHECK(lddmm::read_text(dir / "a" / f) == lddmm::read_text(dir / "b" / f));

  const Outcome s = run("shoot \"" + cfg.string() + "\" --out \"" + (dir / "s").string() + "\"");
  CHECK(s.status == 0);
  CHECK(s.out.find("energy_drift") != std::string::npos);

  const Outcome g = run("check-grad \"" + cfg.string() + "\"");
  CHECK(g.status == 0);
  CHECK(g.out.find("relative error") != std::string::npos);
}

TEST_CASE("gradient check at a vanishing gradient") {
  const fs::path dir = scratch("zero");
  std::string text = kSmall;
  text.replace(text.find("[0.4, 0]"), 8, "[0, 0]");
  text.replace(text.find("{\"kind\": \"random\", \"scale\": 0.1}"), 32, "{\"kind\": \"zero\"}");
  lddmm::write_text(dir / "zero.json", text);
  const Outcome g = run("check-grad \"" + (dir / "zero.json").string() + "\"");
  CHECK(g.status == 0);
  CHECK(g.out.find("n/a") != std::string::npos);
}

TEST_CASE("bad input fails with a message") {
  const fs::path dir = scratch("bad");
  lddmm::write_text(dir / "bad.json", R"({"fields": []})");
  const Outcome b = run("run \"" + (dir / "bad.json").string() + "\"");
  CHECK(b.status == 2);
  CHECK(b.out.find("fields") != std::string::npos);
  CHECK(run("run \"" + (dir / "missing.json").string() + "\"").status != 0);
  CHECK(run("").status != 0);
}
