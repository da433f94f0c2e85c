#include <doctest.h>

#include <cmath>

#include "topoflow/errors.hpp"
#include "topoflow/flow.hpp"
#include "topoflow/halfline.hpp"

using namespace topoflow;
using namespace topoflow::flow;

namespace {

const model::ModelParams P{1.0, 0.2};

FlowContext semi() { return FlowContext(P); }

FlowContext fd_backend(int n) {
  FlowContext c(P);
  c.backend = Backend::FdOracle;
  c.fd.n = n;
  return c;
}

LoopSpec square(double kx0, double a0, double r) {
  return LoopSpec::polyline({CylinderPoint(kx0 - r, a0 - r), CylinderPoint(kx0 + r, a0 - r), CylinderPoint(kx0 + r, a0 + r),
                             CylinderPoint(kx0 - r, a0 + r), CylinderPoint(kx0 - r, a0 - r)},
                            256);
}

}  // namespace

TEST_CASE("loop validation") {
  CHECK_THROWS_AS(LoopSpec::circle(1.0, 32).validate(), ConfigError);
  CHECK_THROWS_AS(LoopSpec::fixed_kx(0.0).validate(), ConfigError);
  CHECK_THROWS_AS(LoopSpec::polyline({CylinderPoint(1, 1), CylinderPoint(2, 1), CylinderPoint(2, 2)}).validate(),
                  ConfigError);
  const auto c = LoopSpec::circle(2.0);
  CHECK(c.point(0.0).kx() == doctest::Approx(-2.0));
  CHECK(c.point(0.25).a() == doctest::Approx(-2.0));
  CHECK(c.point(0.5).kx() == doctest::Approx(2.0));
  const auto r = c.reversed();
  CHECK(r.point(0.25).a() == doctest::Approx(2.0));
}

TEST_CASE("crossing counts on the circle loops") {
  for (double R : {1.0, 2.0, 4.0}) {
    const auto br = trace_branches(semi(), LoopSpec::circle(R), Gap::Upper);
    for (double mu = 0.05; mu < 0.96; mu += 0.05) CHECK(edge_index_crossings(br, mu, 1.0).value == 2);
    const auto res = edge_index_crossings(br, 0.5, 1.0);
    int sum = 0;
    for (const auto& c : res.crossings) sum += c.sign;
    CHECK(sum == res.value);
    CHECK(res.method == FlowResult::Method::CrossingCount);
    CHECK(edge_index_merges(br, BandEdge::UpperBand).value == 2);
    CHECK(edge_index_merges(br, BandEdge::FlatBand).value == 2);
    // sign convention cross-check between the two views
    CHECK(spectral_flow_plus(semi(), LoopSpec::circle(R)) == -res.value);
  }
}

TEST_CASE("orientation reversal flips crossing counts and flows") {
  const auto loop = LoopSpec::circle(1.0);
  const auto fwd = trace_branches(semi(), loop, Gap::Upper);
  const auto bwd = trace_branches(semi(), loop.reversed(), Gap::Upper);
  CHECK(edge_index_crossings(bwd, 0.5, 1.0).value == -edge_index_crossings(fwd, 0.5, 1.0).value);
  CHECK(edge_index_merges(bwd, BandEdge::UpperBand).value == -2);
  CHECK(spectral_flow_plus(semi(), LoopSpec::around_puncture(512, Orientation::Negative)) == 2);
}

TEST_CASE("empty branch set and merge-free loops") {
  CHECK(edge_index_crossings({}, 0.5, 1.0).value == 0);
  CHECK(edge_index_merges({}, BandEdge::UpperBand).value == 0);
  // a small loop around (0, 1), where the upper gap is empty
  const auto br = trace_branches(semi(), square(0.0, 1.0, 0.05), Gap::Upper);
  CHECK(edge_index_merges(br, BandEdge::UpperBand).value == 0);
  CHECK(edge_index_crossings(br, 0.5, 1.0).value == 0);
}

TEST_CASE("contractible loops carry no flow") {
  CHECK(spectral_flow_plus(semi(), square(1.0, 1.0, 0.3)) == 0);
  CHECK(spectral_flow_plus(semi(), square(-1.5, -0.5, 0.4)) == 0);
  CHECK(spectral_flow_minus(semi(), square(1.0, 1.0, 0.3)) == 0);
}

TEST_CASE("a polyline around the puncture carries the full flow") {
  const auto loop = square(0.0, 0.0, 1.0);
  CHECK(spectral_flow_plus(semi(), loop) == -2);
}

TEST_CASE("spectral flow structure") {
  CHECK(spectral_flow_plus(semi(), LoopSpec::fixed_kx(1.0)) == -1);
  CHECK(spectral_flow_plus(semi(), LoopSpec::fixed_kx(-1.0)) == 1);
  CHECK(spectral_flow_minus(semi(), LoopSpec::fixed_kx(1.0)) == -1);
  CHECK(spectral_flow_minus(semi(), LoopSpec::around_puncture()) == -2);
  const auto rep = pi1_decomposition_check(semi(), 512);
  CHECK(rep.ok());
  CHECK(rep.sf_minus_op == -rep.sf_minus);
  CHECK(rep.sf_zero == rep.sf_plus + rep.sf_minus_op);
}

TEST_CASE("fiducial independence") {
  const auto loop = LoopSpec::around_puncture();
  for (auto fid : {Fiducial{}, Fiducial::constant(0.25), Fiducial::constant(0.75), Fiducial::sinusoid(0.3)})
    CHECK(spectral_flow_plus(semi(), loop, fid) == -2);
  CHECK_THROWS_AS(spectral_flow_plus(semi(), loop, Fiducial::constant(1.2)), ConfigError);
}

TEST_CASE("flow is unchanged when the loop is sampled twice as densely") {
  CHECK(spectral_flow_plus(semi(), LoopSpec::fixed_kx(2.0, 128)) == spectral_flow_plus(semi(), LoopSpec::fixed_kx(2.0, 256)));
  CHECK(spectral_flow_plus(semi(), LoopSpec::circle(4.0, 128)) == -2);
}

TEST_CASE("semi-analytic backend rejects perturbations") {
  auto c = semi();
  c.pert = fd::PerturbationSpec::exponential_identity(0.1);
  CHECK_THROWS_AS(spectral_flow_plus(c, LoopSpec::around_puncture()), ConfigError);
}

TEST_CASE("backends agree on flows") {
  const auto fd = fd_backend(2000);
  CHECK(spectral_flow_plus(fd, LoopSpec::fixed_kx(1.0, 128)) == -1);
  CHECK(spectral_flow_plus(fd, LoopSpec::around_puncture(128)) == -2);
  CHECK(spectral_flow_minus(fd, LoopSpec::around_puncture(128)) == -2);
}

TEST_CASE("backends agree on branch levels") {
  // FD at n = 8000 is within a few 1e-4 of the continuum, well inside the 1e-3 budget
  const auto fd = fd_backend(8000);
  const auto loop = LoopSpec::circle(1.0);
  int compared = 0;
  for (int k = 0; k < 16; ++k) {
    const auto pt = loop.point((k + 0.5) / 16);
    const double floor = std::max(0.06, 3 * std::abs(pt.kx()) * fd.fd.h()) + 0.01;
    auto in = [&](const std::vector<double>& v) {
      std::vector<double> out;
      for (double x : v)
        if (x > floor && x < halfline::essential_gap_edge(P, pt.kx()) - 0.01) out.push_back(x);
      return out;
    };
    const auto a = in(gap_eigenvalues(semi(), pt, Gap::Upper));
    const auto b = in(gap_eigenvalues(fd, pt, Gap::Upper));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i, ++compared) CHECK(std::abs(a[i] - b[i]) < 1e-3);
  }
  CHECK(compared > 5);
}
