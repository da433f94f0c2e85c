#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "run_config.hpp"
#include "topoflow/errors.hpp"
#include "topoflow/verify.hpp"

using namespace topoflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const int rc = std::system((std::string(TOPOFLOW_BIN) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("topoflow_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(); }

}  // namespace

TEST_CASE("config parsing") {
  const auto c = cli::parse_config(json::object());
  CHECK(c.params.f() == 1.0);
  CHECK(c.params.nu() == 0.2);
  CHECK(c.backend == flow::Backend::SemiAnalytic);
  const auto d = cli::parse_config(json::parse(R"({"backend": "fd", "fd": {"n": 2000},
    "loops": [{"kind": "circle", "R": 2}, {"kind": "gamma", "delta": 0.9}],
    "perturbation": {"kind": "exponential_identity", "c": 0.1}})"));
  CHECK(d.backend == flow::Backend::FdOracle);
  CHECK(cli::cylinder_loops(d).size() == 1);
  CHECK(cli::scatter_loops(d).size() == 1);
  CHECK(d.flow_context().pert.sup_norm(d.fd) == doctest::Approx(0.1));
}

TEST_CASE("config rejects violated invariants") {
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"params": {"f": 1.3, "nu": 0.2}})")), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"params": {"f": -1}})")), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"colour": 1})")), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"backend": "dense"})")), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"loops": [{"kind": "circle", "samples": 10}]})")), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"loops": [{"kind": "fixed_kx", "kx": 0}]})")), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"perturbation": {"kind": "exponential_identity", "c": 0.1}})")),
                  ConfigError);
  CHECK_THROWS_AS(cli::parse_config(json::parse(R"({"backend": "fd", "fd": {"n": 100}})")), ConfigError);
}

TEST_CASE("exit codes") {
  const auto d = scratch("exit");
  write(d / "bad.json", json::parse(R"({"params": {"f": 1.3, "nu": 0.2}})"));
  CHECK(run("bulk --config " + (d / "bad.json").string() + " --out " + (d / "out").string()) == 2);
  CHECK_FALSE(fs::exists(d / "out" / "chern.json"));
  CHECK(run("edge-spectrum --out " + (d / "out").string()) == 2);  // no loops
  CHECK(run("frobnicate") == 2);
  CHECK(run("bulk --backend dense") == 2);
  // a trace that cannot be resolved at a tiny refinement budget is not reachable from
  // the CLI; an open scattering polyline instead fails validation
  write(d / "open.json", json::parse(R"({"loops": [{"kind": "scatter_polyline", "points": [[1, 0.5, 1], [2, 0.5, 1], [2, 1, 1]]}]})"));
  CHECK(run("scattering --config " + (d / "open.json").string()) == 2);
}

TEST_CASE("bulk and edge-spectrum outputs") {
  const auto d = scratch("outputs");
  write(d / "c.json", json::parse(R"({"bulk": {"chern_grid": 50, "band_grid": 11},
    "loops": [{"kind": "circle", "R": 1}, {"kind": "fixed_kx", "kx": 1, "samples": 128}]})"));
  const std::string args = " --config " + (d / "c.json").string() + " --out " + (d / "out").string();
  REQUIRE(run("bulk" + args) == 0);
  const auto chern = json::parse(slurp(d / "out" / "chern.json"));
  CHECK(chern["plus"] == 2);
  CHECK(chern["zero"] == 0);
  CHECK(chern["minus"] == -2);
  const auto bands = slurp(d / "out" / "bands.csv");
  CHECK(bands.rfind("kx,ky,omega_minus,omega_zero,omega_plus\n", 0) == 0);
  CHECK(std::count(bands.begin(), bands.end(), '\n') == 1 + 11 * 11);

  REQUIRE(run("edge-spectrum" + args) == 0);
  const auto idx = json::parse(slurp(d / "out" / "edge_index.json"));
  for (const auto& c : idx[0]["crossings"]) CHECK(c["value"] == 2);
  CHECK(slurp(d / "out" / "branches.csv").rfind("theta,omega,branch_id,backend\n", 0) == 0);

  REQUIRE(run("spectral-flow" + args) == 0);
  const auto flow = json::parse(slurp(d / "out" / "flow.json"));
  CHECK(flow[0]["value"] == -2);
  CHECK(flow[1]["value"] == -1);
  for (const auto& key : {"loop", "value", "method", "crossings"}) CHECK(flow[0].contains(key));
}

TEST_CASE("outputs are byte-identical across runs") {
  const auto d = scratch("determinism");
  write(d / "c.json", json::parse(R"({"loops": [{"kind": "c_r_eps", "R": 2}, {"kind": "gamma"}, {"kind": "around_puncture", "samples": 128}]})"));
  for (const char* out : {"a", "b"}) {
    const std::string args = " --config " + (d / "c.json").string() + " --out " + (d / out).string();
    REQUIRE(run("scattering" + args) == 0);
    REQUIRE(run("spectral-flow" + args) == 0);
  }
  for (const char* f : {"scattering.csv", "winding.json", "flow.json"}) CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
  const auto w = json::parse(slurp(d / "a" / "winding.json"));
  CHECK(w[0]["winding"] == 2);
  CHECK(w[1]["winding"] == 2);
}

TEST_CASE("robin demo") {
  const auto d = scratch("robin");
  REQUIRE(run("robin-demo --out " + (d / "out").string()) == 0);
  const auto r = json::parse(slurp(d / "out" / "robin_flow.json"));
  CHECK(r[0]["value"] == -1);
  CHECK(r[0]["reversed"] == 1);
  CHECK(r[1]["value"] == -1);
}

TEST_CASE("a second admissible parameter set keeps the integers") {
  // f nu = 0.15
  verify::Options o;
  o.params = model::ModelParams(0.5, 0.3);
  for (int id : {1, 3, 4, 6, 8, 11}) {
    const auto r = verify::run_criterion(id, o);
    INFO(verify::format_line(r));
    CHECK(r.pass);
  }
}
