#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "topoflow/errors.hpp"
#include "topoflow/model.hpp"

using namespace topoflow;
using namespace topoflow::model;

namespace {

const ModelParams P{1.0, 0.2};

// independent band formula: omega_+- = +-sqrt(k^2 + (f - nu k^2)^2)
double omega_ref(double f, double nu, double kx, double ky) {
  const double k2 = kx * kx + ky * ky;
  return std::sqrt(k2 + (f - nu * k2) * (f - nu * k2));
}

double unwrapped_turns(const std::vector<cplx>& z) {
  double total = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) total += std::arg(z[i] / z[i - 1]);
  return total / (2.0 * M_PI);
}

}  // namespace

TEST_CASE("params reject invalid regimes") {
  CHECK_THROWS_AS(ModelParams(-1.0, 0.2), ConfigError);
  CHECK_THROWS_AS(ModelParams(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(ModelParams(1.3, 0.2), ConfigError);  // f nu = 0.26
  CHECK_NOTHROW(ModelParams(1.2, 0.2));
}

TEST_CASE("hamiltonian at k = 0 has only the Coriolis entries") {
  const auto H = bulk_hamiltonian(P, BulkMomentum::finite(0, 0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if ((i == 1 && j == 2) || (i == 2 && j == 1)) continue;
      CHECK(H(i, j) == cplx(0.0));
    }
  CHECK(H(1, 2) == cplx(0.0, -1.0));
  CHECK(H(2, 1) == cplx(0.0, 1.0));
  const auto b = bulk_bands(P, BulkMomentum::finite(0, 0));
  CHECK(b.minus == doctest::Approx(-1.0));
  CHECK(b.zero == 0.0);
  CHECK(b.plus == doctest::Approx(1.0));
}

TEST_CASE("bands at k = (1, 0) are +-sqrt(1.64)") {
  const auto b = bulk_bands(P, BulkMomentum::finite(1, 0));
  CHECK(b.plus == doctest::Approx(std::sqrt(1.64)).epsilon(1e-14));
  CHECK(b.minus == doctest::Approx(-std::sqrt(1.64)).epsilon(1e-14));
  Eigen::SelfAdjointEigenSolver<cmat3> es(bulk_hamiltonian(P, BulkMomentum::finite(1, 0)));
  CHECK(es.eigenvalues()(2) == doctest::Approx(std::sqrt(1.64)).epsilon(1e-12));
  CHECK(std::abs(es.eigenvalues()(1)) < 1e-12);
}

TEST_CASE("bands match dense eigenvalues and the closed form at random momenta") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  double worst = 0.0, herm = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double kx = u(rng), ky = u(rng);
    const auto H = bulk_hamiltonian(P, BulkMomentum::finite(kx, ky));
    herm = std::max(herm, (H - H.adjoint()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<cmat3> es(H);
    const auto b = bulk_bands(P, BulkMomentum::finite(kx, ky));
    const double w = omega_ref(1.0, 0.2, kx, ky);
    worst = std::max({worst, std::abs(es.eigenvalues()(0) - b.minus), std::abs(es.eigenvalues()(2) - b.plus),
                      std::abs(b.plus - w) / w});
  }
  CHECK(herm == 0.0);
  CHECK(worst < 1e-12);
}

TEST_CASE("upper band minimum is f at k = 0") {
  double best = 1e300, at = -1;
  const int n = 200;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const double kx = -3 + 6.0 * i / n, ky = -3 + 6.0 * j / n;
      const double w = omega_plus(P, kx, ky);
      if (w < best) best = w, at = std::hypot(kx, ky);
    }
  CHECK(best == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(at == 0.0);
  const double k = std::sqrt(1.0 / 0.2);
  CHECK(omega_plus(P, k, 0.0) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("infinity chart") {
  const auto k = BulkMomentum::from_finite_to_infinity(1.0, 2.0);
  CHECK(k.kx == doctest::Approx(0.2));
  CHECK(k.ky == doctest::Approx(-0.4));
  const auto back = k.to_finite();
  CHECK(back.kx == doctest::Approx(1.0));
  CHECK(back.ky == doctest::Approx(2.0));
  CHECK_THROWS_AS(BulkMomentum::from_finite_to_infinity(0, 0), DomainError);
  const auto b = bulk_bands(P, BulkMomentum{0, 0, Chart::InfinityChart});
  CHECK(std::isinf(b.plus));
  CHECK(std::isinf(b.minus));
}

TEST_CASE("section_inf is an eigenvector of norm^2 2") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4, 4);
  double resid = 0.0, norm = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double kx = u(rng), ky = u(rng);
    const double w = omega_plus(P, kx, ky);
    const auto psi = section_inf(P, w, kx, ky);
    const auto H = bulk_hamiltonian(P, kx, ky);
    resid = std::max(resid, (H * psi - w * psi).norm() / psi.norm());
    norm = std::max(norm, std::abs(psi.squaredNorm() - 2.0));
  }
  CHECK(resid < 1e-10);
  CHECK(norm < 1e-12);
  CHECK_THROWS_AS(section_inf(P, 1.0, 0.0, 0.0), SingularSection);
  CHECK_THROWS_AS(section_inf(P, 0.0, 1.0, 0.5), DivisionByZero);
}

TEST_CASE("section_inf at complex ky stays an eigenvector of the continued matrix") {
  // ky = i kappa with omega^2 = k^2 + (f - nu k^2)^2 and k^2 = kx^2 - kappa^2
  const double kx = 2.0, kappa = 0.5;
  const double k2 = kx * kx - kappa * kappa;
  const double w = std::sqrt(k2 + (1.0 - 0.2 * k2) * (1.0 - 0.2 * k2));
  const cplx ky(0.0, kappa);
  const auto psi = section_inf(P, w, kx, ky);
  const auto H = bulk_hamiltonian(P, kx, ky);
  CHECK((H * psi - w * psi).norm() < 1e-10 * psi.norm());
}

TEST_CASE("section phase winds by two around a large circle") {
  // documented sign: +2 for counterclockwise traversal (ledger)
  std::vector<cplx> ratio;
  const int N = 4096;
  for (int k = 0; k <= N; ++k) {
    const double th = 2 * M_PI * k / N;
    const double kx = 100 * std::cos(th), ky = 100 * std::sin(th);
    const auto psi = section_inf(P, omega_plus(P, kx, ky), kx, ky);
    ratio.push_back(psi(1) / std::abs(psi(1)));
  }
  const double turns = unwrapped_turns(ratio);
  CHECK(std::abs(std::abs(turns) - 2.0) < 1e-6);
  CHECK(turns == doctest::Approx(2.0));
}

TEST_CASE("section_zeta transition function") {
  const cplx I(0, 1);
  CHECK(std::abs(std::abs(transition_zeta(1.0, 0.0, I)) - 1.0) < 1e-15);
  std::vector<cplx> t;
  const int N = 2048;
  for (int k = 0; k <= N; ++k) {
    const double th = 2 * M_PI * k / N;
    const cplx z = I + 0.01 * std::exp(I * th);
    t.push_back(transition_zeta(z.real(), z.imag(), I));
  }
  CHECK(unwrapped_turns(t) == doctest::Approx(-2.0).epsilon(1e-9));
  const double w = omega_plus(P, 3.0, -2.0);
  const auto a = section_inf(P, w, 3.0, -2.0), b = section_zeta(P, w, 3.0, -2.0, I);
  CHECK(std::abs(b.norm() - a.norm()) < 1e-13);
  const cplx phase = b(0) / a(0);
  CHECK((b - phase * a).norm() < 1e-13);
  CHECK_THROWS_AS(section_zeta(P, 1.0, 0.0, 1.0, I), SingularSection);
  CHECK_THROWS(section_zeta(P, 1.0, 0.5, cplx(0.0, 2.0), I));
}

TEST_CASE("chern numbers") {
  for (int n : {24, 50}) {
    const int m = chern_number(P, BandIndex::Minus, n), z = chern_number(P, BandIndex::Zero, n),
              p = chern_number(P, BandIndex::Plus, n);
    CHECK(p == 2);
    CHECK(z == 0);
    CHECK(m == -2);
    CHECK(m + z + p == 0);
  }
  const ModelParams other{0.5, 0.3};
  CHECK(chern_number(other, BandIndex::Plus, 50) == 2);
}

TEST_CASE("beta map") {
  CHECK(std::abs(beta_map(CylinderPoint(0.0, 1.0)) - cplx(1.0)) < 1e-15);
  CHECK(std::abs(beta_map(CylinderPoint(1.0, 0.0)) - cplx(-1.0)) < 1e-15);
  CHECK(std::abs(beta_map(CylinderPoint(2.0, BoundaryParam::infinity())) - cplx(1.0)) < 1e-15);
  CHECK_THROWS(CylinderPoint(0.0, 0.0));
  for (double kx : {0.1, -0.1, 1.0, -1.0, 10.0, -10.0}) {
    std::vector<cplx> b;
    const int N = 8192;
    for (int k = 0; k <= N; ++k) b.push_back(beta_map(CylinderPoint(kx, BoundaryParam::from_angle(-M_PI / 2 + M_PI * k / N))));
    for (auto z : b) CHECK(std::abs(std::abs(z) - 1.0) < 1e-14);
    CHECK(unwrapped_turns(b) == doctest::Approx(kx > 0 ? -1.0 : 1.0).epsilon(1e-9));
  }
}

TEST_CASE("deficiency vectors") {
  for (auto w : {DeficiencyVector::OnePlus, DeficiencyVector::OneMinus, DeficiencyVector::TwoPlus,
                 DeficiencyVector::TwoMinus})
    CHECK(deficiency_residual(P, w, YGrid{}) < 1e-6);
  const auto v0 = deficiency_vector(DeficiencyVector::OnePlus, 0.0);
  const auto d0 = deficiency_vector_derivative(DeficiencyVector::OnePlus, 0.0);
  CHECK(std::abs(v0(2)) < 1e-15);
  CHECK(std::abs(d0(2)) > 1e-3);
  // the quartic (2 nu^2 l^2 - 1)^2 has its double root at 1/(sqrt2 nu)
  CHECK(std::abs(characteristic_quartic(P, 1.0 / (std::sqrt(2.0) * 0.2))) < 1e-12);
  CHECK(characteristic_quartic(P, 1.0) == doctest::Approx(std::pow(2 * 0.04 - 1, 2)));
}
