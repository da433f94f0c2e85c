#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "topoflow/fd_oracle.hpp"
#include "topoflow/flow.hpp"
#include "topoflow/loops.hpp"
#include "topoflow/model.hpp"
#include "topoflow/scatter.hpp"

namespace topoflow::cli {

using AnyLoop = std::variant<LoopSpec, scatter::ScatterLoop>;

struct PerturbationConfig {
  std::string kind = "none";  // none | exponential_identity
  double c = 0.0;
  fd::PerturbationSpec spec() const;
};

struct BulkConfig {
  int chern_grid = 100;
  int band_grid = 101;  // points per axis of bands.csv
  double k_max = 3.0;
};

struct RobinConfig {
  fd::FdConfig fd{30.0, 3000};
  int samples = 256;
  std::vector<double> mu{-1.0, -2.0};
  int curve_points = 401;
};

struct RunConfig {
  model::ModelParams params{1.0, 0.2};
  flow::Backend backend = flow::Backend::SemiAnalytic;
  fd::FdConfig fd;
  std::vector<AnyLoop> loops;
  flow::Gap gap = flow::Gap::Upper;
  flow::Fiducial fiducial;
  PerturbationConfig perturbation;
  BulkConfig bulk;
  RobinConfig robin;
  std::filesystem::path outputs = "out";
  std::uint64_t seed = 20240601;
  int workers = 1;

  // every module invariant that can be checked without computing; ConfigError otherwise
  void validate() const;
  flow::FlowContext flow_context() const;
};

// Unknown keys are rejected so typos do not silently fall back to defaults.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

std::vector<LoopSpec> cylinder_loops(const RunConfig& c);
std::vector<scatter::ScatterLoop> scatter_loops(const RunConfig& c);

}  // namespace topoflow::cli
