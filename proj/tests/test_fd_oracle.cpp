#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "topoflow/errors.hpp"
#include "topoflow/fd_loops.hpp"
#include "topoflow/fd_oracle.hpp"

using namespace topoflow;
using namespace topoflow::fd;

namespace {

const model::ModelParams P{1.0, 0.2};

template <class S>
BlockTridiag<S> random_block_tridiag(std::mt19937_64& rng, int blocks) {
  std::normal_distribution<double> g;
  auto draw = [&]() -> S {
    if constexpr (std::is_same_v<S, double>) return g(rng);
    else return S(g(rng), g(rng));
  };
  BlockTridiag<S> m;
  for (int j = 0; j < blocks; ++j) {
    const int s = j % 7 == 0 ? 2 : 3;
    typename BlockTridiag<S>::Block d(s, s);
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b) d(a, b) = draw();
    d = (d + d.adjoint()).eval();
    m.diag.push_back(d);
  }
  for (int j = 0; j + 1 < blocks; ++j) {
    typename BlockTridiag<S>::Block u(m.diag[j].rows(), m.diag[j + 1].rows());
    for (int a = 0; a < u.rows(); ++a)
      for (int b = 0; b < u.cols(); ++b) u(a, b) = draw();
    m.upper.push_back(u);
  }
  return m;
}

}  // namespace

TEST_CASE_TEMPLATE("Sturm counts and eigenpairs match dense solves", S, double, std::complex<double>) {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 5; ++rep) {
    const auto m = random_block_tridiag<S>(rng, 40);
    const auto dense = m.to_dense();
    CHECK((dense - dense.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<typename BlockTridiag<S>::Dense> es(dense, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    for (double sigma : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
      int n = 0;
      for (int i = 0; i < ev.size(); ++i) n += ev(i) < sigma;
      CHECK(m.count_below(sigma) == n);
    }
    const auto pairs = m.eigenpairs_in(-1.0, 1.0, 1e-12, true);
    std::vector<double> ref;
    for (int i = 0; i < ev.size(); ++i)
      if (ev(i) > -1.0 && ev(i) < 1.0) ref.push_back(ev(i));
    REQUIRE(pairs.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(pairs[i].value == doctest::Approx(ref[i]).epsilon(1e-9));
      const typename BlockTridiag<S>::Vec r = m.multiply(pairs[i].vector) - pairs[i].value * pairs[i].vector;
      CHECK(r.norm() < 1e-8);
    }
  }
}

TEST_CASE("config invariants") {
  FdConfig c;
  CHECK_NOTHROW(c.validate(P));
  c.n = 400;
  CHECK_THROWS_AS(c.validate(P), ConfigError);
  c = FdConfig{40.0, 1000};  // h = 0.04
  CHECK_THROWS_AS(c.validate(P), ConfigError);
  c = FdConfig{10.0, 1000};  // too short for the slowest decay
  CHECK_THROWS_AS(c.validate(P), ConfigError);
  auto bad = PerturbationSpec::exponential_identity(0.1);
  bad.g = [](double) { return model::cmat3::Identity().eval(); };
  CHECK_THROWS_AS(bad.validate(FdConfig{}), ConfigError);
  auto nonherm = PerturbationSpec::exponential_identity(0.1);
  nonherm.g = [](double y) {
    model::cmat3 m = model::cmat3::Zero();
    m(0, 1) = std::exp(-y);
    return m;
  };
  CHECK_THROWS_AS(nonherm.validate(FdConfig{}), ConfigError);
}

TEST_CASE("assembled half-line operator is exactly Hermitian and its counts match dense") {
  FdConfig cfg{20.0, 1000};
  for (auto pt : {CylinderPoint(0.7, 0.4), CylinderPoint(-1.2, BoundaryParam::infinity()), CylinderPoint(0.0, -2.0)}) {
    const auto op = discretize_halfline(P, pt, cfg);
    const auto d = op.to_dense();
    CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d, Eigen::EigenvaluesOnly);
    for (double sigma : {-0.6, 0.3, 1.1}) {
      int n = 0;
      for (int i = 0; i < es.eigenvalues().size(); ++i) n += es.eigenvalues()(i) < sigma;
      CHECK(op.count_below(sigma) == n);
    }
  }
}

TEST_CASE("upper gap at kx = 0, a = 1 agrees with the semi-analytic solver (both empty)") {
  const CylinderPoint pt(0.0, 1.0);
  CHECK(fd_edge_eigenvalues(P, pt, FdConfig{}, PerturbationSpec::none(), 0.05, 0.99).empty());
  CHECK(halfline::edge_eigenvalues(P, pt, {0.05, 0.99}).empty());
}

TEST_CASE("Richardson-extrapolated FD levels agree with the semi-analytic ones") {
  for (auto pt : {CylinderPoint(2.0, 0.5), CylinderPoint(-1.0, 0.3), CylinderPoint(1.5, -0.8)}) {
    const auto r = compare_with_semi(P, pt, FdConfig{});
    CHECK(r.max_diff < 1e-4);
    CHECK(r.unmatched_fd == 0);
  }
}

TEST_CASE("a nonnegative potential of size 0.1 moves eigenvalues up by at most 0.1") {
  FdConfig cfg{40.0, 2000};
  const CylinderPoint pt(1.3, 0.6);
  const auto free_op = discretize_halfline(P, pt, cfg);
  const auto pert_op = discretize_halfline(P, pt, cfg, PerturbationSpec::exponential_identity(0.1));
  for (double sigma : {-1.5, -0.4, 0.3, 0.9, 1.6}) {
    CHECK(pert_op.count_below(sigma) <= free_op.count_below(sigma));
    CHECK(free_op.count_below(sigma) <= pert_op.count_below(sigma + 0.1));
  }
  CHECK(PerturbationSpec::exponential_identity(0.1).sup_norm(cfg) == doctest::Approx(0.1));
}

TEST_CASE("Robin Laplacian") {
  FdConfig cfg{30.0, 3000};
  CHECK(robin_lowest_eigenvalue(BoundaryParam::from_a(1.0), cfg) == doctest::Approx(-1.0).epsilon(1e-3));
  const double neumann = robin_lowest_eigenvalue(BoundaryParam::from_a(0.0), cfg);
  CHECK((std::isinf(neumann) || neumann > -1e-3));
  const auto dir = discretize_robin(BoundaryParam::infinity(), cfg);
  CHECK(dir.count_below(-1e-6) == 0);
  const auto m = discretize_robin(BoundaryParam::from_a(0.7), cfg).to_dense();
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Robin discretization converges at second order") {
  std::vector<double> err;
  for (int n : {750, 1500, 3000}) err.push_back(std::abs(robin_lowest_eigenvalue(BoundaryParam::from_a(2.0), FdConfig{15.0, n}) + 4.0));
  const double order1 = std::log2(err[0] / err[1]), order2 = std::log2(err[1] / err[2]);
  CHECK(order1 >= 1.8);
  CHECK(order2 >= 1.8);
}

TEST_CASE("half-line discretization converges") {
  // doubling n shrinks the change in an in-gap level about fourfold
  const CylinderPoint pt(2.0, 0.5);
  std::vector<double> lev;
  for (int n : {2000, 4000, 8000}) {
    const auto e = fd_edge_eigenvalues(P, pt, FdConfig{40.0, n}, PerturbationSpec::none(), 0.1, 2.0);
    REQUIRE(!e.empty());
    lev.push_back(e.front());
  }
  const double ratio = std::abs(lev[0] - lev[1]) / std::abs(lev[1] - lev[2]);
  CHECK(std::log2(ratio) >= 1.8);
}

TEST_CASE("Robin pump") {
  FdConfig cfg{30.0, 3000};
  CHECK(robin_spectral_flow(-1.0, cfg) == -1);
  CHECK(robin_spectral_flow(-2.0, cfg) == -1);
  CHECK(robin_spectral_flow(-1.0, cfg, 256, Orientation::Negative) == 1);
}

namespace {

Eigen::MatrixXcd diag_family(double theta) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(0, 0) = std::sin(theta) - 0.5;
  m(1, 1) = 3.0;
  m(2, 2) = -2.0;
  m(3, 3) = 5.0;
  return m;
}

// brute-force signed crossings of sin(theta) - 1/2 through 0 on [t0, t1]
int crossings_of_sine(double t0, double t1, int n) {
  int s = 0;
  double prev = std::sin(t0) - 0.5;
  for (int k = 1; k <= n; ++k) {
    const double x = std::sin(t0 + (t1 - t0) * k / n) - 0.5;
    if (prev < 0 && x >= 0) ++s;
    if (prev >= 0 && x < 0) --s;
    prev = x;
  }
  return s;
}

}  // namespace

TEST_CASE("Phillips flow on synthetic families") {
  SUBCASE("constant family") {
    std::vector<Eigen::MatrixXcd> fam(50, diag_family(0.3));
    CHECK(phillips_spectral_flow(fam, std::vector<double>(50, 0.0), 1.0) == 0);
  }
  SUBCASE("sine level against brute-force crossings") {
    for (auto [t0, t1] : {std::pair{0.0, 2 * M_PI}, std::pair{0.0, M_PI / 2}, std::pair{M_PI / 2, 3 * M_PI / 2},
                          std::pair{-1.0, 2.0}}) {
      const int n = 400;
      std::vector<Eigen::MatrixXcd> fam;
      for (int k = 0; k <= n; ++k) fam.push_back(diag_family(t0 + (t1 - t0) * k / n));
      CHECK(phillips_spectral_flow(fam, std::vector<double>(n + 1, 0.0), 1.0) == crossings_of_sine(t0, t1, 20000));
    }
  }
  SUBCASE("samples with a refinement callback") {
    auto sample = [](double t) {
      FlowSample s;
      s.t = t;
      const double x = std::sin(2 * M_PI * t) - 0.5;
      if (std::abs(x) < 0.8) s.eigs.push_back(x);
      return s;
    };
    std::vector<FlowSample> coarse;
    for (int k = 0; k <= 8; ++k) coarse.push_back(sample(k / 8.0));
    PhillipsOptions opt;
    opt.window = 0.8;
    CHECK(phillips_spectral_flow(coarse, opt, sample) == 0);
    std::vector<FlowSample> half;
    for (int k = 0; k <= 4; ++k) half.push_back(sample(k / 16.0));
    CHECK(phillips_spectral_flow(half, opt, sample) == 1);
  }
}

TEST_CASE("Phillips flow on random smooth 12x12 families") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  auto herm = [&]() {
    Eigen::MatrixXcd a(12, 12);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) a(i, j) = model::cplx(g(rng), g(rng));
    return Eigen::MatrixXcd((a + a.adjoint()) / 4.0);
  };
  auto count_in = [](const Eigen::MatrixXcd& m, double lo, double hi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    int n = 0;
    for (int i = 0; i < 12; ++i) n += es.eigenvalues()(i) >= lo && es.eigenvalues()(i) < hi;
    return n;
  };
  for (int rep = 0; rep < 5; ++rep) {
    const auto A = herm(), B = herm(), C = herm();
    auto F = [&](double t) { return Eigen::MatrixXcd(A * std::cos(3 * t) + B * std::sin(2 * t) + C * t); };
    const int n = 800;
    std::vector<Eigen::MatrixXcd> fam, fam2;
    for (int k = 0; k <= n; ++k) fam.push_back(F(double(k) / n));
    for (int k = 0; k <= 2 * n; ++k) fam2.push_back(F(0.5 * k / n));
    const double mu = 0.3, W = 0.9;
    const std::vector<double> zero(n + 1, 0.0), shifted(n + 1, mu);
    const int sf0 = phillips_spectral_flow(fam, zero, W);
    const int sfmu = phillips_spectral_flow(fam, shifted, W);
    // endpoint correction between levels 0 and mu
    CHECK(sf0 - sfmu == count_in(fam.back(), 0.0, mu) - count_in(fam.front(), 0.0, mu));
    // refinement invariance
    CHECK(phillips_spectral_flow(fam2, std::vector<double>(2 * n + 1, 0.0), W) == sf0);
    // concatenation additivity at an interior sample
    const int cut = 317;
    std::vector<Eigen::MatrixXcd> p1(fam.begin(), fam.begin() + cut + 1), p2(fam.begin() + cut, fam.end());
    CHECK(phillips_spectral_flow(p1, std::vector<double>(p1.size(), 0.0), W) +
              phillips_spectral_flow(p2, std::vector<double>(p2.size(), 0.0), W) ==
          sf0);
    // for an open path the flow is the net change of the count below 0 (with sign)
    CHECK(sf0 == count_in(fam.front(), -1e9, 0.0) - count_in(fam.back(), -1e9, 0.0));
  }
}

TEST_CASE("loop spectra close and carry the band edge") {
  FdConfig cfg{40.0, 2000};
  const auto s = loop_spectra(P, LoopSpec::circle(1.0, 400), cfg);
  REQUIRE(s.size() == 401);
  CHECK(s.front().eigenvalues_upper == s.back().eigenvalues_upper);
  CHECK(s.front().eigenvalues_lower == s.back().eigenvalues_lower);
  for (std::size_t k = 0; k < s.size(); k += 37) {
    const double kx = std::cos(s[k].loop_param);
    CHECK(s[k].gap_edge == doctest::Approx(std::sqrt(kx * kx + std::pow(1 - 0.2 * kx * kx, 2))).epsilon(1e-12));
  }
}
