#pragma once

#include <vector>

#include "topoflow/fd_oracle.hpp"
#include "topoflow/halfline.hpp"
#include "topoflow/loops.hpp"

namespace topoflow::fd {

// In-gap FD spectra along a loop. Levels within twice the discretization error
// estimate of 0 or of the gap edge are dropped, as are far-end and flat-band levels.
std::vector<halfline::SpectrumSample> loop_spectra(const ModelParams& p, const LoopSpec& loop, const FdConfig& cfg,
                                                   const PerturbationSpec& pert = PerturbationSpec::none(),
                                                   int workers = 1);
double discretization_error_estimate(const FdConfig& cfg);

// Lowest eigenvalue of the discretized Robin Laplacian; +inf when there is none below 0.
double robin_lowest_eigenvalue(const BoundaryParam& bc, const FdConfig& cfg);

// Phillips flow of the Robin family a -> -d^2/dx^2 across mu < 0 along the loop
// phi in [-pi/2, pi/2], (p, q) = (cos phi, sin phi), i.e. increasing a through infinity.
int robin_spectral_flow(double mu, const FdConfig& cfg, int samples = 256,
                        Orientation orientation = Orientation::Positive);

}  // namespace topoflow::fd

namespace topoflow::fd {

// Semi-analytic edge eigenvalues against Richardson-extrapolated FD eigenvalues from
// n and 2n grid points. Compared are semi-analytic levels above the flat-band floor
// whose slower decay rate is at least kappa_cut.
struct OracleComparison {
  std::vector<double> semi;      // compared semi-analytic levels
  std::vector<double> fd;        // extrapolated FD levels in the same window
  double max_diff = 0.0;         // worst |semi - fd| over compared levels
  int unmatched_fd = 0;          // FD levels more than 1e-3 away from every semi-analytic level
  int compared() const { return static_cast<int>(semi.size()); }
};
OracleComparison compare_with_semi(const ModelParams& p, const CylinderPoint& pt, const FdConfig& cfg,
                                   double kappa_cut = 0.25);

}  // namespace topoflow::fd
