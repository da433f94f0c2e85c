#pragma once

#include <functional>
#include <string>
#include <vector>

#include "topoflow/fd_oracle.hpp"
#include "topoflow/halfline.hpp"
#include "topoflow/loops.hpp"

namespace topoflow::flow {

using model::ModelParams;

enum class Backend { SemiAnalytic, FdOracle };
enum class Gap { Upper, Lower };
enum class BandEdge { UpperBand, FlatBand };

const char* backend_name(Backend b);

struct FlowContext {
  ModelParams params;
  Backend backend = Backend::SemiAnalytic;
  fd::FdConfig fd;
  fd::PerturbationSpec pert;
  halfline::SearchOptions search;
  int workers = 1;
  // FD eigenvalues below this share of f are dropped when tracing branches: the
  // discrete flat band leaves an O(h) spurious level there.
  double fd_floor = 0.05;

  explicit FlowContext(ModelParams p) : params(p) {}
};

// Endpoint labels. For the lower gap "UpperBand" means the outer band edge -omega_theta.
enum class BranchEnd { MergesUpperBand, MergesFlatBand, ClosesLoop };
const char* branch_end_name(BranchEnd e);

struct EdgeBranch {
  std::vector<std::pair<double, double>> points;  // (traversal parameter, omega)
  BranchEnd start = BranchEnd::ClosesLoop;
  BranchEnd end = BranchEnd::ClosesLoop;
};

struct Crossing {
  double theta = 0.0;
  double omega = 0.0;
  int sign = 0;
};

struct FlowResult {
  enum class Method { CrossingCount, PhillipsRank, MergeCount };
  int value = 0;
  std::vector<Crossing> crossings;
  Method method = Method::CrossingCount;
};
const char* method_name(FlowResult::Method m);

// In-gap eigenvalues at one loop point for the given backend, sorted.
std::vector<double> gap_eigenvalues(const FlowContext& ctx, const CylinderPoint& pt, Gap gap);

std::vector<EdgeBranch> trace_branches(const FlowContext& ctx, const LoopSpec& loop, Gap gap);

FlowResult edge_index_crossings(const std::vector<EdgeBranch>& branches, double mu, double f = 1.0);
FlowResult edge_index_merges(const std::vector<EdgeBranch>& branches, BandEdge band);

// Fiducial energy curve mu(t) inside the gap; Default is +-(1/2) min(f, gap edge).
struct Fiducial {
  enum class Kind { Default, Constant, Sinusoid };
  Kind kind = Kind::Default;
  double value = 0.5;      // Constant: mu in units of f (sign taken from the gap)
  double amplitude = 0.2;  // Sinusoid: mu = f (1/2 + amplitude sin(2 pi t))

  static Fiducial constant(double v) { return {Kind::Constant, v, 0.0}; }
  static Fiducial sinusoid(double amp) { return {Kind::Sinusoid, 0.5, amp}; }
  double at(const ModelParams& p, double t, double gap_edge, Gap gap) const;
};

FlowResult spectral_flow(const FlowContext& ctx, const LoopSpec& loop, Gap gap, const Fiducial& fid = {});
int spectral_flow_plus(const FlowContext& ctx, const LoopSpec& loop, const Fiducial& fid = {});
int spectral_flow_minus(const FlowContext& ctx, const LoopSpec& loop, const Fiducial& fid = {});

struct Pi1Report {
  int sf_plus = 0;       // l_+ at kx = 1
  int sf_minus = 0;      // l_- at kx = -1
  int sf_minus_op = 0;   // l_- reversed
  int sf_zero = 0;       // l_0
  int sf_plus_half = 0;  // l_+ at kx = 0.5
  int sf_plus_three = 0; // l_+ at kx = 3
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};
Pi1Report pi1_decomposition_check(const FlowContext& ctx, int samples = 256);

}  // namespace topoflow::flow
