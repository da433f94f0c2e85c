#include "topoflow/model.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <vector>

#include "topoflow/errors.hpp"

namespace topoflow::model {

namespace {
constexpr cplx I{0.0, 1.0};
}

ModelParams::ModelParams(double f, double nu) : f_(f), nu_(nu) {
  if (!(f > 0.0)) throw ConfigError(fmt::format("model invariant f > 0 violated (f = {})", f));
  if (!(nu > 0.0)) throw ConfigError(fmt::format("model invariant nu > 0 violated (nu = {})", nu));
  if (!(1.0 - 4.0 * f * nu > 0.0))
    throw ConfigError(fmt::format("model invariant 1 - 4 f nu > 0 violated (f nu = {})", f * nu));
}

BulkMomentum BulkMomentum::from_finite_to_infinity(double kx, double ky) {
  const double k2 = kx * kx + ky * ky;
  if (k2 == 0.0) throw DomainError("k = 0 has no image in the infinity chart");
  return {kx / k2, -ky / k2, Chart::InfinityChart};
}

BulkMomentum BulkMomentum::to_finite() const {
  if (chart == Chart::FinitePlane) return *this;
  const double w2 = kx * kx + ky * ky;
  if (w2 == 0.0) throw DomainError("the point at infinity has no finite coordinates");
  return {kx / w2, -ky / w2, Chart::FinitePlane};
}

cmat3 bulk_hamiltonian(const ModelParams& p, double kx, cplx ky) {
  const cplx k2 = kx * kx + ky * ky;
  const cplx c = p.f() - p.nu() * k2;
  cmat3 h;
  h << 0.0, kx, ky,
       kx, 0.0, -I * c,
       ky, I * c, 0.0;
  return h;
}

cmat3 bulk_hamiltonian(const ModelParams& p, const BulkMomentum& k) {
  if (k.chart != Chart::FinitePlane) throw DomainError("bulk_hamiltonian needs a finite-chart momentum");
  return bulk_hamiltonian(p, k.kx, cplx(k.ky, 0.0));
}

double omega_plus(const ModelParams& p, double kx, double ky) {
  const double k2 = kx * kx + ky * ky;
  const double c = p.f() - p.nu() * k2;
  return std::sqrt(k2 + c * c);
}

Bands bulk_bands(const ModelParams& p, const BulkMomentum& k) {
  if (k.is_infinity_point()) {
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, 0.0, inf};
  }
  const BulkMomentum kf = k.to_finite();
  const double w = omega_plus(p, kf.kx, kf.ky);
  return {-w, 0.0, w};
}

cvec3 section_inf(const ModelParams& p, double omega, double kx, cplx ky) {
  if (omega == 0.0) throw DivisionByZero("section_inf called with omega = 0");
  const cplx den = kx - I * ky;
  if (std::abs(den) <= 1e-300) throw SingularSection("section_inf: kx - i ky vanishes");
  const cplx k2 = kx * kx + ky * ky;
  const cplx q = (p.f() - p.nu() * k2) / omega;
  cvec3 psi;
  psi << k2 / omega, kx - I * ky * q, ky + I * kx * q;
  return psi / den;
}

cplx transition_zeta(double kx, double ky, cplx zeta) {
  const cplx z(kx, ky);
  if (z == zeta) throw SingularSection("section_zeta evaluated at z = zeta");
  return (std::conj(z) - std::conj(zeta)) / (z - zeta);
}

cvec3 section_zeta(const ModelParams& p, double omega, double kx, cplx ky, cplx zeta) {
  // conj(z) is not analytic, so only real momenta are accepted
  if (ky.imag() != 0.0) throw DomainError("section_zeta is only defined at real ky");
  return transition_zeta(kx, ky.real(), zeta) * section_inf(p, omega, kx, ky);
}

cplx beta_map(const CylinderPoint& pt) {
  const double kx = pt.kx();
  const auto& bc = pt.bc();
  if (kx == 0.0) {
    if (bc.q == 0.0) throw PunctureError("beta is undefined at the puncture");
    return 1.0;
  }
  const cplx num(bc.q, std::sqrt(2.0) * kx * bc.p);
  return num / std::conj(num);
}

// ---------------------------------------------------------------- Chern number

namespace {

using Solver = Eigen::SelfAdjointEigenSolver<cmat3>;

// H scaled by |w|^2 in the chart w = 1/z; same eigenvectors, smooth at w = 0.
cmat3 hamiltonian_inverted(const ModelParams& p, double wx, double wy) {
  const double w2 = wx * wx + wy * wy;
  const double c = p.f() * w2 - p.nu();
  cmat3 h;
  h << 0.0, wx, -wy,
       wx, 0.0, -I * c,
       -wy, I * c, 0.0;
  return h;
}

cvec3 band_vector(const cmat3& h, int band) {
  Solver es;
  es.computeDirect(h);
  const auto& ev = es.eigenvalues();
  const double sep = std::min(ev(1) - ev(0), ev(2) - ev(1));
  if (sep < 1e-9) throw GapClosure(fmt::format("band separation {} below 1e-9", sep));
  return es.eigenvectors().col(band);
}

// One chart: disk of radius rho meshed by equal-area rings. Vertex 0 is the center,
// ring i (1..n) has n vertices; ring n is the shared gluing circle.
struct ChartMesh {
  std::vector<cvec3> vecs;  // index 1 + (i-1)*n + j
  int n;
  const cvec3& at(int i, int j) const {
    if (i == 0) return vecs[0];
    return vecs[1 + (i - 1) * n + ((j % n) + n) % n];
  }
};

cplx link(const cvec3& a, const cvec3& b) {
  const cplx u = a.dot(b);  // conj(a) . b
  const double m = std::abs(u);
  if (m < 1e-14) throw GapClosure("vanishing link variable; grid too coarse");
  return u / m;
}

double chart_flux(const ChartMesh& m) {
  const int n = m.n;
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const auto& c = m.at(0, 0);
    const auto& a = m.at(1, j);
    const auto& b = m.at(1, j + 1);
    total += std::arg(link(c, a) * link(a, b) * link(b, c));
  }
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& v00 = m.at(i, j);
      const auto& v10 = m.at(i + 1, j);
      const auto& v11 = m.at(i + 1, j + 1);
      const auto& v01 = m.at(i, j + 1);
      total += std::arg(link(v00, v10) * link(v10, v11) * link(v11, v01) * link(v01, v00));
    }
  return total;
}

}  // namespace

int chern_number(const ModelParams& p, BandIndex band, int grid_n) {
  if (grid_n < 24) throw ConfigError("chern_number needs grid_n >= 24");
  const int n = grid_n;
  const int b = static_cast<int>(band);
  const double k0 = std::sqrt(p.f() / p.nu());
  const double w0 = 1.0 / k0;

  ChartMesh inner{std::vector<cvec3>(1 + n * n), n};
  ChartMesh outer{std::vector<cvec3>(1 + n * n), n};
  inner.vecs[0] = band_vector(bulk_hamiltonian(p, 0.0, 0.0), b);
  outer.vecs[0] = band_vector(hamiltonian_inverted(p, 0.0, 0.0), b);
  for (int i = 1; i <= n; ++i) {
    const double s = std::sqrt(static_cast<double>(i) / n);
    for (int j = 0; j < n; ++j) {
      const double phi = 2.0 * M_PI * j / n;
      const int idx = 1 + (i - 1) * n + j;
      inner.vecs[idx] = band_vector(bulk_hamiltonian(p, k0 * s * std::cos(phi), k0 * s * std::sin(phi)), b);
      if (i < n)
        outer.vecs[idx] = band_vector(hamiltonian_inverted(p, w0 * s * std::cos(phi), w0 * s * std::sin(phi)), b);
    }
  }
  // Shared ring: w = 1/z maps angle phi to -phi, so outer vertex j is inner vertex -j.
  for (int j = 0; j < n; ++j) outer.vecs[1 + (n - 1) * n + j] = inner.at(n, -j);

  const double total = chart_flux(inner) + chart_flux(outer);
  // orientation fixed once so that the upper band of the reference model gives +2
  const double c = total / (2.0 * M_PI);
  const double r = std::round(c);
  if (std::abs(c - r) > 1e-6) throw GapClosure(fmt::format("non-integer plaquette flux sum {}", c));
  return static_cast<int>(r);
}

// ---------------------------------------------------------------- deficiency basis

cvec3 deficiency_vector(DeficiencyVector which, double t) {
  const double s2 = std::sqrt(2.0);
  const double e = std::exp(-s2 * t);
  cvec3 v;
  switch (which) {
    case DeficiencyVector::OnePlus: v << s2 * t - 1.0, s2 - t, t; break;
    case DeficiencyVector::OneMinus: v << s2 * t - 1.0, s2 - t, -t; break;
    case DeficiencyVector::TwoPlus: v << s2 * t + 1.0, -t, t + s2; break;
    case DeficiencyVector::TwoMinus: v << s2 * t + 1.0, -t, -(t + s2); break;
  }
  return v * e;
}

cvec3 deficiency_vector_derivative(DeficiencyVector which, double t) {
  // d/dt [P(t) e^{-sqrt2 t}] = (P' - sqrt2 P) e^{-sqrt2 t}
  const double s2 = std::sqrt(2.0);
  const double e = std::exp(-s2 * t);
  cvec3 dp;
  switch (which) {
    case DeficiencyVector::OnePlus: dp << s2, -1.0, 1.0; break;
    case DeficiencyVector::OneMinus: dp << s2, -1.0, -1.0; break;
    case DeficiencyVector::TwoPlus: dp << s2, -1.0, 1.0; break;
    case DeficiencyVector::TwoMinus: dp << s2, -1.0, -1.0; break;
  }
  return dp * e - s2 * deficiency_vector(which, t);
}

double deficiency_residual(const ModelParams& p, DeficiencyVector which, const YGrid& grid) {
  const double nu = p.nu();
  if (!(grid.Y >= 20.0 * nu)) throw ConfigError("deficiency grid needs Y >= 20 nu");
  if (!(grid.h > 0.0) || grid.h > 1e-3 * grid.Y) throw ConfigError("deficiency grid needs h <= 1e-3 Y");
  const double sign = (which == DeficiencyVector::OnePlus || which == DeficiencyVector::TwoPlus) ? 1.0 : -1.0;
  const cplx lambda = sign * I / (2.0 * nu);
  const double h = grid.h;
  const int n = static_cast<int>(std::floor(grid.Y / h + 1e-9)) + 1;

  // sixth-order central stencils; ghost values come from the closed form
  static constexpr double d1[] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
  static constexpr double d2[] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
  auto psi = [&](double y) { return deficiency_vector(which, y / (2.0 * nu)); };

  double num = 0.0, den = 0.0;
  for (int j = 0; j < n; ++j) {
    const double y = j * h;
    cvec3 dpsi = cvec3::Zero(), ddpsi = cvec3::Zero();
    for (int s = -3; s <= 3; ++s) {
      const cvec3 v = psi(y + s * h);
      dpsi += d1[s + 3] * v;
      ddpsi += d2[s + 3] * v;
    }
    dpsi /= h;
    ddpsi /= h * h;
    const cvec3 v = psi(y);
    cvec3 hv;
    hv << -I * dpsi(2), -I * nu * ddpsi(2), -I * dpsi(0) + I * nu * ddpsi(1);
    const double w = (j == 0 || j == n - 1) ? 0.5 * h : h;
    num += w * (hv - lambda * v).squaredNorm();
    den += w * v.squaredNorm();
  }
  return std::sqrt(num / den);
}

double characteristic_quartic(const ModelParams& p, double lambda) {
  const double nl = p.nu() * lambda;
  const double x = nl * nl;
  return 4.0 * x * x - 4.0 * x + 1.0;
}

}  // namespace topoflow::model
