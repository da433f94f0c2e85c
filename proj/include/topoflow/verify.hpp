#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "topoflow/model.hpp"

namespace topoflow::verify {

struct Options {
  model::ModelParams params{1.0, 0.2};
  int workers = 1;
  std::uint64_t seed = 20240601;
  int fd_trace_n = 2000;       // FD grid for branch tracing (L = 40)
  int fd_trace_samples = 512;  // loop samples for FD branch tracing
  int semi_samples = 512;      // loop samples for semi-analytic tracing
  int flow_samples = 512;      // coarse samples for Phillips flows (refined on demand)
  int fd_flow_samples = 512;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  std::string timing;  // wall-clock checks, kept apart so detail is reproducible
  double seconds = 0.0;
};

using Reporter = std::function<void(const CriterionResult&)>;

// Individual acceptance criteria 1..12; none of them throws, failures are reported.
CriterionResult run_criterion(int id, const Options& opt);
// All twelve in order; criterion 12 also checks the total wall time.
std::vector<CriterionResult> run_all(const Options& opt, const Reporter& report = {});
std::string format_line(const CriterionResult& r);

}  // namespace topoflow::verify
