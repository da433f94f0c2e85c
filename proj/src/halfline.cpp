#include "topoflow/halfline.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "topoflow/errors.hpp"

namespace topoflow::halfline {

namespace {
constexpr cplx I{0.0, 1.0};

// Null vector of a rank-2 3x3 matrix from its largest adjugate column.
cvec3 adjugate_null_vector(const model::cmat3& m) {
  model::cmat3 adj;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
    }
  int best = 0;
  for (int j = 1; j < 3; ++j)
    if (adj.col(j).norm() > adj.col(best).norm()) best = j;
  cvec3 v = adj.col(best);
  // fix the phase so that (eta, u) are real and v imaginary, like the closed form
  const int k = std::abs(v(0)) > std::abs(v(1)) ? 0 : 1;
  return v * std::conj(v(k)) / std::abs(v(k));
}
}  // namespace

double essential_gap_edge(const ModelParams& p, double kx) {
  const double c = p.f() - p.nu() * kx * kx;
  return std::sqrt(kx * kx + c * c);
}

std::pair<double, double> transverse_K(const ModelParams& p, double kx, double omega) {
  const double nu = p.nu();
  const double c = p.f() - nu * kx * kx;
  const double qa = nu * nu;
  const double qb = 1.0 - 2.0 * nu * c;
  const double qc = kx * kx + c * c - omega * omega;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) throw DegenerateRoots(fmt::format("negative discriminant {} at omega {}", disc, omega));
  const double sq = std::sqrt(disc);
  const double k1 = (-qb - std::copysign(sq, qb)) / (2.0 * qa);
  const double k2 = (k1 != 0.0) ? qc / (qa * k1) : -qb / qa;
  const double lo = std::min(k1, k2), hi = std::max(k1, k2);
  if (std::abs(hi - lo) < 1e-8 * std::max({1.0, std::abs(lo), std::abs(hi)}))
    throw DegenerateRoots(fmt::format("double root K = {} at kx = {}, omega = {}", lo, kx, omega));
  return {lo, hi};
}

std::array<cplx, 4> transverse_roots(const ModelParams& p, double kx, double omega) {
  if (omega == 0.0) throw DomainError("transverse_roots needs omega != 0");
  const auto [k1, k2] = transverse_K(p, kx, omega);
  const cplx s1 = std::sqrt(cplx(k1, 0.0)), s2 = std::sqrt(cplx(k2, 0.0));
  return {s1, -s1, s2, -s2};
}

cvec3 imaginary_mode_vector(const ModelParams& p, double kx, double kappa, double omega) {
  const double C = p.f() - p.nu() * (kx * kx - kappa * kappa);
  cvec3 v;
  if (std::abs(C + omega) > 1e-8 * (std::abs(C) + std::abs(omega))) {
    const double r = (kappa - kx) / (omega * (C + omega));
    v << (kx - kappa) / omega, 1.0 + kappa * r, I * (1.0 + kx * r);
    return v;
  }
  if (std::abs(kx + kappa) > 1e-8 * (std::abs(kx) + kappa))
    return model::section_inf(p, omega, kx, cplx(0.0, kappa));
  return adjugate_null_vector(model::bulk_hamiltonian(p, kx, cplx(0.0, kappa)) - omega * model::cmat3::Identity());
}

std::vector<ComplexMode> decaying_modes(const ModelParams& p, double kx, double omega) {
  const auto roots = transverse_roots(p, kx, omega);
  const double tol_im = 1e-12;
  std::vector<ComplexMode> out;
  for (const cplx& ky : roots) {
    if (ky.imag() <= tol_im) continue;
    ComplexMode m;
    m.ky = ky;
    m.decaying = true;
    if (std::abs(ky.real()) <= 1e-14 * std::abs(ky))
      m.vec = imaginary_mode_vector(p, kx, ky.imag(), omega);
    else
      m.vec = model::section_inf(p, omega, kx, ky);
    out.push_back(m);
  }
  if (out.size() != 2)
    throw MultiplicityError(fmt::format("{} decaying modes at kx = {}, omega = {} (expected 2)", out.size(), kx, omega));
  return out;
}

namespace {
struct Columns {
  Eigen::Vector2cd c1, c2;
};

Columns boundary_columns(const ModelParams& p, const CylinderPoint& pt, double omega) {
  const auto modes = decaying_modes(p, pt.kx(), omega);
  const auto& bc = pt.bc();
  auto col = [&](const ComplexMode& m) {
    Eigen::Vector2cd c;
    c << m.vec(2), bc.p * I * pt.kx() * m.vec(1) + bc.q * I * m.ky * m.vec(2);
    return c;
  };
  return {col(modes[0]), col(modes[1])};
}
}  // namespace

cplx boundary_determinant(const ModelParams& p, const CylinderPoint& pt, double omega) {
  const auto c = boundary_columns(p, pt, omega);
  return c.c1(0) * c.c2(1) - c.c2(0) * c.c1(1);
}

double normalized_determinant(const ModelParams& p, const CylinderPoint& pt, double omega) {
  const auto c = boundary_columns(p, pt, omega);
  const cplx det = c.c1(0) * c.c2(1) - c.c2(0) * c.c1(1);
  const double n = c.c1.norm() * c.c2.norm();
  // with the closed-form mode vectors the determinant is real up to rounding
  return n > 0.0 ? -det.real() / n : 0.0;
}

bool has_kelvin_mode(const ModelParams& p, double kx) {
  return kx < 0.0 && kx > -std::sqrt(p.f() / p.nu());
}

namespace {

// Real secular function whose sign changes are the eigenvalues. The omega-independent
// Kelvin root at -kx is divided out so that a second branch through it stays visible.
struct Secular {
  const ModelParams& p;
  const CylinderPoint& pt;
  bool kelvin;

  double operator()(double omega) const {
    const double s = normalized_determinant(p, pt, omega);
    return kelvin ? s / (omega + pt.kx()) : s;
  }
};

double eval_nudged(const Secular& s, double omega, double& used) {
  used = omega;
  if (s.kelvin && omega == -s.pt.kx()) used = omega + 1e-9;
  try {
    return s(used);
  } catch (const DegenerateRoots&) {
    spdlog::debug("degenerate transverse roots at omega = {}, nudging by 1e-9", used);
    used += 1e-9;
    return s(used);
  }
}

std::vector<double> scan_upper(const ModelParams& p, const CylinderPoint& pt, double lo, double hi,
                               const SearchOptions& opt) {
  const Secular sec{p, pt, has_kelvin_mode(p, pt.kx())};
  int npts = opt.grid_points;
  std::vector<double> roots;
  for (int attempt = 0; attempt <= opt.max_doublings; ++attempt) {
    roots.clear();
    std::vector<double> w(npts), s(npts);
    for (int i = 0; i < npts; ++i) s[i] = eval_nudged(sec, lo + (hi - lo) * i / (npts - 1), w[i]);
    const double step = (hi - lo) / (npts - 1);

    for (int i = 0; i + 1 < npts; ++i) {
      if (s[i] == 0.0) {
        roots.push_back(w[i]);
        continue;
      }
      if (s[i] * s[i + 1] < 0.0) {
        boost::uintmax_t iters = 100;
        auto tol = [&](double a, double b) { return std::abs(b - a) <= opt.omega_tol; };
        const auto r = boost::math::tools::toms748_solve(sec, w[i], w[i + 1], s[i], s[i + 1], tol, iters);
        roots.push_back(0.5 * (r.first + r.second));
      }
    }
    // tangential zeros: local minima of |s| without a sign change
    for (int i = 1; i + 1 < npts; ++i) {
      const double a = std::abs(s[i]);
      if (!(a < std::abs(s[i - 1]) && a < std::abs(s[i + 1]))) continue;
      if (s[i - 1] * s[i] < 0.0 || s[i] * s[i + 1] < 0.0) continue;
      if (a > 100.0 * opt.det_tol) continue;
      auto f = [&](double x) { return std::abs(sec(x)); };
      const auto m = boost::math::tools::brent_find_minima(f, w[i - 1], w[i + 1], 40);
      if (m.second < opt.det_tol) roots.push_back(m.first);
    }
    std::sort(roots.begin(), roots.end());
    bool crowded = false;
    for (size_t i = 1; i < roots.size(); ++i)
      if (roots[i] - roots[i - 1] < 4.0 * step) crowded = true;
    if (!crowded) break;
    npts *= 2;
  }
  return roots;
}

}  // namespace

std::vector<double> edge_eigenvalues(const ModelParams& p, const CylinderPoint& pt, std::pair<double, double> window,
                                     const SearchOptions& opt) {
  auto [lo, hi] = window;
  if (!(lo < hi)) throw DomainError("edge_eigenvalues: empty window");
  const double edge = essential_gap_edge(p, pt.kx());
  const double margin = gap_margin(p);
  if (hi < 0.0) {
    auto mirrored = edge_eigenvalues(p, CylinderPoint(-pt.kx(), pt.bc()), {-hi, -lo}, opt);
    std::vector<double> out;
    for (auto it = mirrored.rbegin(); it != mirrored.rend(); ++it) out.push_back(-*it);
    return out;
  }
  if (!(lo > 0.0) || hi > edge - margin + 1e-15)
    throw DomainError(fmt::format("window ({}, {}) not inside the upper gap (0, {})", lo, hi, edge - margin));

  std::vector<double> roots = scan_upper(p, pt, lo, hi, opt);
  std::vector<double> out;
  for (double r : roots) {
    if (!(r > lo && r < hi)) continue;
    if (!out.empty() && r - out.back() < opt.dedup_tol) continue;
    out.push_back(r);
  }
  if (has_kelvin_mode(p, pt.kx())) {
    const double k = -pt.kx();
    if (k > lo && k < hi) out.insert(std::upper_bound(out.begin(), out.end(), k), k);
  }
  return out;
}

SpectrumSample spectrum_sample(const ModelParams& p, const CylinderPoint& pt, double loop_param,
                               const SearchOptions& opt) {
  SpectrumSample s;
  s.loop_param = loop_param;
  s.gap_edge = essential_gap_edge(p, pt.kx());
  const double m = gap_margin(p);
  s.eigenvalues_upper = edge_eigenvalues(p, pt, {m, s.gap_edge - m}, opt);
  s.eigenvalues_lower = edge_eigenvalues(p, pt, {-(s.gap_edge - m), -m}, opt);
  return s;
}

std::optional<double> robin_laplacian_bound_state(double a) {
  if (!std::isfinite(a)) throw DomainError("robin_laplacian_bound_state needs finite a");
  if (a > 0.0) return -a * a;
  return std::nullopt;
}

}  // namespace topoflow::halfline
