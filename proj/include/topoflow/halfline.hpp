#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "topoflow/cylinder.hpp"
#include "topoflow/model.hpp"

namespace topoflow::halfline {

using model::cplx;
using model::cvec3;
using model::ModelParams;

struct ComplexMode {
  cplx ky;
  cvec3 vec;  // (eta, u, v)
  bool decaying = false;
};

struct SpectrumSample {
  double loop_param = 0.0;
  double gap_edge = 0.0;
  std::vector<double> eigenvalues_upper;  // sorted, in (0, gap_edge)
  std::vector<double> eigenvalues_lower;  // sorted, in (-gap_edge, 0)
};

struct SearchOptions {
  int grid_points = 2000;
  int max_doublings = 3;
  double det_tol = 1e-6;
  double omega_tol = 1e-12;
  double dedup_tol = 1e-8;
};

double essential_gap_edge(const ModelParams& p, double kx);
inline double gap_margin(const ModelParams& p) { return 1e-3 * p.f(); }

// Roots ky of nu^2 K^2 + (1 - 2 nu c) K + (kx^2 + c^2 - omega^2) = 0 with K = ky^2,
// c = f - nu kx^2. Ordered (+sqrt K1, -sqrt K1, +sqrt K2, -sqrt K2), principal branch.
std::array<cplx, 4> transverse_roots(const ModelParams& p, double kx, double omega);
// The two K = ky^2 values (real for real omega).
std::pair<double, double> transverse_K(const ModelParams& p, double kx, double omega);

// Eigenvector (eta, u, v) of H(kx, ky) at frequency omega for ky = i kappa. This is
// section_inf continued to imaginary ky with its removable zero of kx + kappa cancelled.
cvec3 imaginary_mode_vector(const ModelParams& p, double kx, double kappa, double omega);

std::vector<ComplexMode> decaying_modes(const ModelParams& p, double kx, double omega);

// 2x2 boundary determinant over the two decaying modes; rows are v(0) and
// p i kx u(0) + q i ky v(0).
cplx boundary_determinant(const ModelParams& p, const CylinderPoint& pt, double omega);
// Same determinant divided by the two column norms, rotated to a real (signed) value.
double normalized_determinant(const ModelParams& p, const CylinderPoint& pt, double omega);

// True when omega = -kx is an eigenvalue for every boundary parameter: both decaying
// modes then have v identically zero. Happens for -sqrt(f/nu) < kx < 0.
bool has_kelvin_mode(const ModelParams& p, double kx);

// Eigenvalues in the window. Upper gap: 0 < lo < hi < edge - margin; lower gap is
// mirrored through the spectral symmetry sigma(kx, a) = -sigma(-kx, a).
std::vector<double> edge_eigenvalues(const ModelParams& p, const CylinderPoint& pt, std::pair<double, double> window,
                                     const SearchOptions& opt = {});

SpectrumSample spectrum_sample(const ModelParams& p, const CylinderPoint& pt, double loop_param,
                               const SearchOptions& opt = {});

// Bound state of -d^2/dx^2 with psi'(0) + a psi(0) = 0.
std::optional<double> robin_laplacian_bound_state(double a);

}  // namespace topoflow::halfline
