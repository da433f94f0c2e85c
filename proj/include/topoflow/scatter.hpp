#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "topoflow/model.hpp"

namespace topoflow::scatter {

using model::cplx;
using model::ModelParams;

struct ScatterPoint {
  double kx = 0.0;
  double kappa = 1.0;
  double a = 0.0;
  cplx zeta{0.0, 1.0};

  // DomainError unless kappa > 0 and the point keeps `margin` from both exclusion lines
  void validate(double margin = 1e-9) const;
};

// Evanescent transverse momentum +i sqrt(kappa^2 + 2 kx^2 + (1 - 2 nu f)/nu^2).
cplx kappa_ev(const ModelParams& p, double kx, double kappa);

// Boundary determinant g(kx, s, a) for s = +-kappa; omega = omega_+(kx, kappa).
cplx g_determinant(const ModelParams& p, const ScatterPoint& pt, double s);
cplx scattering_amplitude(const ModelParams& p, const ScatterPoint& pt);

struct ScatterLoop {
  enum class Kind { CREpsilon, Gamma, EllAlpha, Polyline };
  Kind kind = Kind::CREpsilon;
  double R = 1.0, eps = 0.05;     // CREpsilon: (R cos t, eps, R sin t)
  double delta = 0.5, a0 = -1.0;  // Gamma: (delta cos t, delta sin t + 1, a0)
  double alpha = 0.1;             // EllAlpha: (alpha cos t, 1 - alpha sin t, alpha sin t)
  std::vector<std::array<double, 3>> points;  // Polyline (kx, kappa, a), first == last
  int samples = 512;
  cplx zeta{0.0, 1.0};

  static ScatterLoop c_r_eps(double R, double eps, int samples = 512);
  static ScatterLoop gamma(double delta, double a0, int samples = 512);
  static ScatterLoop ell_alpha(double alpha, int samples = 512);
  static ScatterLoop polyline(std::vector<std::array<double, 3>> pts, int samples = 512);

  ScatterPoint point(double t) const;  // t in [0, 1]
  double param(double t) const;        // theta or alpha
  void validate() const;               // ConfigError / DomainError
  std::string name() const;
};

struct WindingSample {
  double t;
  ScatterPoint pt;
  cplx S;
  double arg_unwrapped;
};

struct WindingResult {
  int value = 0;
  double total_phase = 0.0;
  double max_step = 0.0;
  std::vector<WindingSample> trace;
};

// Winding of a closed unit-modulus curve S(t), t in [0, 1]; unresolved steps are
// bisected up to depth 14.
WindingResult winding_of(const std::function<cplx(double)>& S, int samples, int workers = 1);
WindingResult winding_number(const ModelParams& p, const ScatterLoop& loop, int workers = 1);

struct LevinsonReport {
  int value = 0;       // at eps
  int value_half = 0;  // at eps / 2
  double total_phase = 0.0;
  bool converged() const { return value == value_half; }
};
LevinsonReport levinson_edge_count(const ModelParams& p, double R, double eps, int samples = 512, int workers = 1);

struct AlphaLimit {
  double alpha = 0.0;
  int winding = 0;
  double v_error = 0.0;  // max over theta of |v^zeta - i e^{2 i theta}|
  double u_error = 0.0;  // same for u^zeta against its quoted limit
};
struct AlphaReport {
  std::vector<AlphaLimit> rows;
  double fitted_C = 0.0;  // max v_error / alpha
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};
AlphaReport ell_alpha_limit_check(const ModelParams& p, const std::vector<double>& alphas, int samples = 512,
                                  int workers = 1);

// Windings on the square loops deformed from C_R^eps and Gamma and on a loop in the
// plane kappa + a = 1 around (0, 1, 0).
struct SquareReport {
  int c_square = 0;
  int gamma_square = 0;
  int l_loop = 0;
  bool ok() const { return c_square - gamma_square == l_loop && l_loop == 0; }
};
SquareReport square_loop_check(const ModelParams& p, double eps = 0.05, int samples = 512, int workers = 1);

}  // namespace topoflow::scatter
