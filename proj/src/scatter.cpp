#include "topoflow/scatter.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>

#include "topoflow/errors.hpp"
#include "topoflow/parallel.hpp"

namespace topoflow::scatter {

void ScatterPoint::validate(double margin) const {
  if (!(kappa > 0)) throw DomainError(fmt::format("kappa must be positive (got {})", kappa));
  if (!(zeta.imag() > 0)) throw DomainError("zeta needs a positive imaginary part");
  if (std::hypot(kx, a) < margin)
    throw DomainError(fmt::format("({}, {}, {}) lies on the line kx = a = 0", kx, kappa, a));
  if (std::hypot(kx - zeta.real(), kappa - zeta.imag()) < margin)
    throw DomainError(fmt::format("({}, {}, {}) lies on the line z = zeta", kx, kappa, a));
}

cplx kappa_ev(const ModelParams& p, double kx, double kappa) {
  const double nu = p.nu(), f = p.f();
  const double rad = kappa * kappa + 2.0 * kx * kx + (1.0 - 2.0 * nu * f) / (nu * nu);
  if (!(rad > 0)) throw RadicandError(fmt::format("kappa_ev radicand {} is not positive", rad));
  return {0.0, std::sqrt(rad)};
}

cplx g_determinant(const ModelParams& p, const ScatterPoint& pt, double s) {
  const double w = model::omega_plus(p, pt.kx, pt.kappa);
  const auto psi = model::section_zeta(p, w, pt.kx, s, pt.zeta);
  const cplx kev = kappa_ev(p, pt.kx, pt.kappa);
  const auto ev = model::section_inf(p, w, pt.kx, kev);
  const cplx top1 = pt.kx * psi(1) + pt.a * s * psi(2);
  const cplx top2 = pt.kx * ev(1) + pt.a * kev * ev(2);
  const cplx g = top1 * ev(2) - psi(2) * top2;
  const double scale = std::hypot(std::abs(top1), std::abs(psi(2))) * std::hypot(std::abs(top2), std::abs(ev(2)));
  if (!(std::abs(g) > 1e-12 * scale))
    throw SingularG(fmt::format("g vanishes at ({}, {}, {})", pt.kx, s, pt.a));
  return g;
}

cplx scattering_amplitude(const ModelParams& p, const ScatterPoint& pt) {
  pt.validate();
  return -g_determinant(p, pt, -pt.kappa) / g_determinant(p, pt, pt.kappa);
}

ScatterLoop ScatterLoop::c_r_eps(double R, double eps, int samples) {
  ScatterLoop l;
  l.kind = Kind::CREpsilon;
  l.R = R;
  l.eps = eps;
  l.samples = samples;
  return l;
}

ScatterLoop ScatterLoop::gamma(double delta, double a0, int samples) {
  ScatterLoop l;
  l.kind = Kind::Gamma;
  l.delta = delta;
  l.a0 = a0;
  l.samples = samples;
  return l;
}

ScatterLoop ScatterLoop::ell_alpha(double alpha, int samples) {
  ScatterLoop l;
  l.kind = Kind::EllAlpha;
  l.alpha = alpha;
  l.samples = samples;
  return l;
}

ScatterLoop ScatterLoop::polyline(std::vector<std::array<double, 3>> pts, int samples) {
  ScatterLoop l;
  l.kind = Kind::Polyline;
  l.points = std::move(pts);
  l.samples = samples;
  return l;
}

double ScatterLoop::param(double t) const {
  switch (kind) {
    case Kind::CREpsilon:
    case Kind::Gamma: return -M_PI + 2.0 * M_PI * t;
    case Kind::EllAlpha: return 2.0 * M_PI * t;
    case Kind::Polyline: return t;
  }
  return t;
}

ScatterPoint ScatterLoop::point(double t) const {
  const double th = param(t);
  ScatterPoint q;
  q.zeta = zeta;
  switch (kind) {
    case Kind::CREpsilon:
      q.kx = R * std::cos(th);
      q.kappa = eps;
      q.a = R * std::sin(th);
      break;
    case Kind::Gamma:
      q.kx = delta * std::cos(th);
      q.kappa = delta * std::sin(th) + 1.0;
      q.a = a0;
      break;
    case Kind::EllAlpha:
      q.kx = alpha * std::cos(th);
      q.kappa = 1.0 - alpha * std::sin(th);
      q.a = alpha * std::sin(th);
      break;
    case Kind::Polyline: {
      const int segs = static_cast<int>(points.size()) - 1;
      const double x = t * segs;
      const int i = std::min(segs - 1, static_cast<int>(std::floor(x)));
      const double u = x - i;
      q.kx = (1 - u) * points[i][0] + u * points[i + 1][0];
      q.kappa = (1 - u) * points[i][1] + u * points[i + 1][1];
      q.a = (1 - u) * points[i][2] + u * points[i + 1][2];
      break;
    }
  }
  return q;
}

std::string ScatterLoop::name() const {
  switch (kind) {
    case Kind::CREpsilon: return fmt::format("C_R^eps(R={}, eps={})", R, eps);
    case Kind::Gamma: return fmt::format("Gamma(delta={}, a0={})", delta, a0);
    case Kind::EllAlpha: return fmt::format("ell_alpha(alpha={})", alpha);
    case Kind::Polyline: return "polyline";
  }
  return "?";
}

void ScatterLoop::validate() const {
  if (samples < 16) throw ConfigError(fmt::format("scattering loop needs at least 16 samples (got {})", samples));
  switch (kind) {
    case Kind::CREpsilon:
      if (!(eps > 0 && eps < zeta.imag()))
        throw ConfigError(fmt::format("C_R^eps needs 0 < eps < Im zeta (eps = {})", eps));
      if (!(R > 0)) throw ConfigError("C_R^eps needs R > 0");
      break;
    case Kind::Gamma:
      if (!(delta > 0 && delta < 1)) throw ConfigError(fmt::format("Gamma needs 0 < delta < 1 (delta = {})", delta));
      if (a0 == 0.0) throw ConfigError("Gamma needs a0 != 0");
      if (!(std::hypot(zeta.real(), zeta.imag() - 1.0) < delta))
        throw ConfigError("zeta must lie inside Gamma for the winding to give the Chern number");
      break;
    case Kind::EllAlpha:
      if (!(alpha > 0 && alpha < 1)) throw ConfigError(fmt::format("ell_alpha needs 0 < alpha < 1 (alpha = {})", alpha));
      break;
    case Kind::Polyline: {
      if (points.size() < 3) throw ConfigError("polyline needs at least 3 vertices");
      if (points.front() != points.back()) throw ConfigError("polyline loop is not closed");
      break;
    }
  }
  for (int k = 0; k <= 4 * samples; ++k) point(static_cast<double>(k) / (4 * samples)).validate(1e-6);
}

WindingResult winding_of(const std::function<cplx(double)>& S, int samples, int workers) {
  const int max_depth = 14;
  struct Node {
    double t;
    cplx s;
  };
  auto coarse = parallel_map(samples + 1, workers, [&](int k) {
    const double t = static_cast<double>(k) / samples;
    return Node{t, S(t)};
  });
  WindingResult r;
  std::vector<Node> nodes{coarse.front()};
  // A step is accepted when it and both half steps through the midpoint stay below
  // pi/8, the half steps add up to it, and the phase is close to linear across it
  // (|d1 - d2| <= |d|/4). Rotations hidden inside a coarse step fail one of these.
  std::function<void(const Node&, const Node&, int)> walk = [&](const Node& a, const Node& b, int depth) {
    const double tm = 0.5 * (a.t + b.t);
    const Node m{tm, S(tm)};
    const double d = std::arg(b.s / a.s);
    const double d1 = std::arg(m.s / a.s);
    const double d2 = std::arg(b.s / m.s);
    const double lim = M_PI / 8;
    if (std::abs(d) < lim && std::abs(d1) < lim && std::abs(d2) < lim && std::abs(d1 + d2 - d) < 1e-9 &&
        std::abs(d1 - d2) <= 0.25 * std::abs(d) + 1e-6) {
      nodes.push_back(m);
      nodes.push_back(b);
      return;
    }
    if (depth >= max_depth)
      throw UnwrapFailure(fmt::format("phase step {:.3f} between t = {:.10g} and {:.10g} does not resolve", d, a.t, b.t));
    walk(a, m, depth + 1);
    walk(m, b, depth + 1);
  };
  for (int k = 0; k < samples; ++k) walk(coarse[k], coarse[k + 1], 0);

  double phase = std::arg(nodes.front().s);
  r.trace.reserve(nodes.size());
  r.trace.push_back({nodes.front().t, {}, nodes.front().s, phase});
  for (size_t k = 1; k < nodes.size(); ++k) {
    const double d = std::arg(nodes[k].s / nodes[k - 1].s);
    r.max_step = std::max(r.max_step, std::abs(d));
    r.total_phase += d;
    phase += d;
    r.trace.push_back({nodes[k].t, {}, nodes[k].s, phase});
  }
  const double turns = r.total_phase / (2.0 * M_PI);
  r.value = static_cast<int>(std::lround(turns));
  if (std::abs(turns - r.value) > 1e-3)
    throw UnwrapFailure(fmt::format("winding {} is not within 1e-3 of an integer", turns));
  return r;
}

WindingResult winding_number(const ModelParams& p, const ScatterLoop& loop, int workers) {
  loop.validate();
  auto r = winding_of([&](double t) { return scattering_amplitude(p, loop.point(t)); }, loop.samples, workers);
  for (auto& s : r.trace) s.pt = loop.point(s.t);
  return r;
}

LevinsonReport levinson_edge_count(const ModelParams& p, double R, double eps, int samples, int workers) {
  LevinsonReport r;
  const auto w = winding_number(p, ScatterLoop::c_r_eps(R, eps, samples), workers);
  r.value = w.value;
  r.total_phase = w.total_phase;
  r.value_half = winding_number(p, ScatterLoop::c_r_eps(R, 0.5 * eps, samples), workers).value;
  return r;
}

AlphaReport ell_alpha_limit_check(const ModelParams& p, const std::vector<double>& alphas, int samples, int workers) {
  AlphaReport rep;
  const double fn = p.f() - p.nu();
  const double u_amp = fn / std::sqrt(1.0 + fn * fn);
  const cplx I(0.0, 1.0);
  for (double al : alphas) {
    if (!(al > 0 && al <= 0.3)) throw ConfigError(fmt::format("alpha {} outside (0, 0.3]", al));
    AlphaLimit row;
    row.alpha = al;
    row.winding = winding_number(p, ScatterLoop::ell_alpha(al, samples), workers).value;
    for (int k = 0; k < samples; ++k) {
      const double th = 2.0 * M_PI * k / samples;
      const double kx = al * std::cos(th), ky = 1.0 - al * std::sin(th);
      const double w = model::omega_plus(p, kx, ky);
      const auto psi = model::section_zeta(p, w, kx, ky, I);
      const cplx e2 = std::exp(2.0 * I * th);
      row.v_error = std::max(row.v_error, std::abs(psi(2) - I * e2));
      row.u_error = std::max(row.u_error, std::abs(psi(1) - u_amp * e2));
    }
    rep.fitted_C = std::max(rep.fitted_C, row.v_error / al);
    if (row.winding != 0) rep.violations.push_back(fmt::format("winding along ell_alpha({}) is {}", al, row.winding));
    rep.rows.push_back(row);
  }
  // the section errors must shrink at least linearly in alpha
  for (size_t i = 0; i + 1 < rep.rows.size(); ++i)
    for (size_t j = i + 1; j < rep.rows.size(); ++j) {
      const auto& A = rep.rows[i];
      const auto& B = rep.rows[j];
      if (A.alpha == B.alpha) continue;
      const double order = std::log(A.v_error / B.v_error) / std::log(A.alpha / B.alpha);
      if (!(order > 0.8))
        rep.violations.push_back(fmt::format("v^zeta error order {:.3f} between alpha {} and {}", order, A.alpha, B.alpha));
    }
  return rep;
}

SquareReport square_loop_check(const ModelParams& p, double eps, int samples, int workers) {
  using P = std::array<double, 3>;
  SquareReport r;
  // square of side 1 around (0, eps, 0) in the plane kappa = eps, counterclockwise in (kx, a)
  r.c_square = winding_number(p,
                              ScatterLoop::polyline({P{-0.5, eps, 0.0}, P{-0.5, eps, -0.5}, P{0.5, eps, -0.5},
                                                     P{0.5, eps, 0.5}, P{-0.5, eps, 0.5}, P{-0.5, eps, 0.0}},
                                                    samples),
                              workers)
                   .value;
  // square of side 1 around (0, 1, -1) in the plane a = -1, counterclockwise in (kx, kappa)
  r.gamma_square = winding_number(p,
                                  ScatterLoop::polyline({P{0.5, 1.0, -1.0}, P{0.5, 1.5, -1.0}, P{-0.5, 1.5, -1.0},
                                                         P{-0.5, 0.5, -1.0}, P{0.5, 0.5, -1.0}, P{0.5, 1.0, -1.0}},
                                                        samples),
                                  workers)
                       .value;
  // square around (0, 1, 0) in the plane kappa + a = 1
  auto pl = [](double kx, double kappa) { return P{kx, kappa, 1.0 - kappa}; };
  r.l_loop = winding_number(p,
                            ScatterLoop::polyline({pl(0.5, 1.0), pl(0.5, 1.5), pl(-0.5, 1.5), pl(-0.5, 0.5),
                                                   pl(0.5, 0.5), pl(0.5, 1.0)},
                                                  samples),
                            workers)
                 .value;
  return r;
}

}  // namespace topoflow::scatter
