#include "topoflow/verify.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "topoflow/errors.hpp"
#include "topoflow/fd_loops.hpp"
#include "topoflow/flow.hpp"
#include "topoflow/scatter.hpp"

namespace topoflow::verify {

namespace {

using clock_type = std::chrono::steady_clock;
using model::BandIndex;
using model::cplx;

// pinned tolerances
constexpr double kChernSeconds = 30.0;
constexpr double kTurnResidual = 1e-3;
constexpr double kRobinTol = 1e-3;
constexpr double kOracleTol = 1e-4;
constexpr double kUnitTol = 1e-9;
constexpr double kSectionTol = 1e-10;
constexpr double kNormTol = 1e-12;
constexpr double kBetaTol = 1e-14;
constexpr double kDeficiencyTol = 1e-6;
constexpr double kRootTol = 1e-10;
constexpr double kSuiteSeconds = 600.0;

struct Check {
  bool ok = true;
  std::vector<std::string> notes;
  void expect(bool cond, std::string what) {
    if (!cond) ok = false;
    notes.push_back(std::move(what) + (cond ? "" : " [violated]"));
  }
  std::vector<std::string> timing;
  void expect_time(bool cond, std::string what) {
    if (!cond) ok = false;
    timing.push_back(std::move(what) + (cond ? "" : " [violated]"));
  }
  std::string str() const { return fmt::format("{}", fmt::join(notes, "; ")); }
};

flow::FlowContext semi_ctx(const Options& o) {
  flow::FlowContext c(o.params);
  c.workers = o.workers;
  return c;
}

flow::FlowContext fd_ctx(const Options& o, int n) {
  flow::FlowContext c(o.params);
  c.backend = flow::Backend::FdOracle;
  c.fd.L = 40.0;
  c.fd.n = n;
  c.workers = o.workers;
  return c;
}

Check chern(const Options& o) {
  Check c;
  const auto t0 = clock_type::now();
  for (int n : {50, 100, 200}) {
    const int m = model::chern_number(o.params, BandIndex::Minus, n);
    const int z = model::chern_number(o.params, BandIndex::Zero, n);
    const int p = model::chern_number(o.params, BandIndex::Plus, n);
    c.expect(m == -2 && z == 0 && p == 2, fmt::format("n={}: ({}, {}, {})", n, m, z, p));
  }
  const double dt = std::chrono::duration<double>(clock_type::now() - t0).count();
  c.expect_time(dt < kChernSeconds, fmt::format("Chern time {:.2f}s", dt));
  return c;
}

Check crossings(const Options& o) {
  Check c;
  for (int b = 0; b < 2; ++b) {
    const int samples = b == 0 ? o.semi_samples : o.fd_trace_samples;
    for (double R : {1.0, 2.0, 4.0}) {
      // FD levels below 3 |kx| h are dropped near the flat band; refine until that floor sits under the lowest mu
      const int n = std::max(o.fd_trace_n, static_cast<int>(std::ceil(3.0 * R * 40.0 / (0.8 * 0.25 * o.params.f()))));
      const auto ctx = b == 0 ? semi_ctx(o) : fd_ctx(o, n);
      const auto br = flow::trace_branches(ctx, LoopSpec::circle(R, samples), flow::Gap::Upper);
      std::vector<int> vals;
      for (double mu : {0.25, 0.5, 0.75}) vals.push_back(flow::edge_index_crossings(br, mu * o.params.f(), o.params.f()).value);
      const bool ok = std::all_of(vals.begin(), vals.end(), [](int v) { return v == 2; });
      c.expect(ok, fmt::format("{} R={}: n = {}", flow::backend_name(ctx.backend), R, vals));
    }
  }
  return c;
}

Check levinson(const Options& o) {
  Check c;
  const auto ctx = semi_ctx(o);
  for (double R : {1.0, 2.0, 4.0}) {
    const auto w = scatter::levinson_edge_count(o.params, R, 0.05, 512, o.workers);
    const double resid = std::abs(w.total_phase / (2.0 * M_PI) - w.value);
    const auto br = flow::trace_branches(ctx, LoopSpec::circle(R, o.semi_samples), flow::Gap::Upper);
    const int nb = flow::edge_index_merges(br, flow::BandEdge::UpperBand).value;
    c.expect(w.value == 2 && w.converged() && nb == 2 && resid < kTurnResidual,
             fmt::format("R={}: winding {} (eps/2: {}, residual {:.1e} turn), n_b+ {}", R, w.value, w.value_half, resid,
                         nb));
  }
  return c;
}

Check gamma_loops(const Options& o) {
  Check c;
  for (auto [d, a0] : {std::pair{0.5, -1.0}, std::pair{0.9, -1.0}, std::pair{0.5, -3.0}}) {
    const auto w = scatter::winding_number(o.params, scatter::ScatterLoop::gamma(d, a0), o.workers);
    c.expect(w.value == 2, fmt::format("delta={} a0={}: {}", d, a0, w.value));
  }
  return c;
}

Check ell_alpha(const Options& o) {
  Check c;
  const auto rep = scatter::ell_alpha_limit_check(o.params, {0.2, 0.1, 0.05}, 512, o.workers);
  for (const auto& r : rep.rows)
    c.expect(r.winding == 0 && r.v_error <= rep.fitted_C * r.alpha,
             fmt::format("alpha={}: winding {}, |v - i e^(2i theta)| = {:.2e}", r.alpha, r.winding, r.v_error));
  c.expect(rep.ok(), fmt::format("C = {:.3f}{}", rep.fitted_C,
                                 rep.violations.empty() ? "" : fmt::format(" ({})", fmt::join(rep.violations, ", "))));
  const auto sq = scatter::square_loop_check(o.params, 0.05, 512, o.workers);
  c.expect(sq.ok(), fmt::format("squares: C {} - Gamma {} = L {}", sq.c_square, sq.gamma_square, sq.l_loop));
  return c;
}

Check pi1(const Options& o) {
  Check c;
  const auto r = flow::pi1_decomposition_check(semi_ctx(o), o.flow_samples);
  c.expect(r.sf_plus == -1, fmt::format("Sf+(l+, kx=1) = {}", r.sf_plus));
  c.expect(r.sf_minus == 1, fmt::format("Sf+(l-, kx=-1) = {}", r.sf_minus));
  c.expect(r.sf_zero == -2, fmt::format("Sf+(l0) = {}", r.sf_zero));
  c.expect(r.sf_zero == r.sf_plus - r.sf_minus, "Sf+(l0) = Sf+(l+) - Sf+(l-)");
  c.expect(r.sf_plus_half == -1 && r.sf_plus_three == -1,
           fmt::format("kx=0.5: {}, kx=3: {}", r.sf_plus_half, r.sf_plus_three));
  c.expect(r.ok(), r.ok() ? "all relations hold" : fmt::format("{}", fmt::join(r.violations, ", ")));
  return c;
}

Check robustness(const Options& o) {
  Check c;
  for (double amp : {0.05, 0.1, 0.2}) {
    auto ctx = fd_ctx(o, 4000);
    ctx.pert = fd::PerturbationSpec::exponential_identity(amp);
    const int sf = flow::spectral_flow_plus(ctx, LoopSpec::around_puncture(o.fd_flow_samples));
    c.expect(sf == -2, fmt::format("c={}: Sf+(l0) = {}", amp, sf));
  }
  return c;
}

Check remark_lower(const Options& o) {
  Check c;
  const auto ctx = semi_ctx(o);
  const auto loop = LoopSpec::around_puncture(o.flow_samples);
  const int plus = flow::spectral_flow_plus(ctx, loop);
  const int minus = flow::spectral_flow_minus(ctx, loop);
  c.expect(plus == -2 && minus == -2, fmt::format("Sf-(l0) = {}, Sf+(l0) = {}", minus, plus));
  return c;
}

Check robin(const Options&) {
  Check c;
  fd::FdConfig cfg;
  cfg.L = 30.0;
  cfg.n = 3000;
  for (double a : {0.5, 1.0, 2.0}) {
    const double e = fd::robin_lowest_eigenvalue(BoundaryParam::from_a(a), cfg);
    c.expect(std::abs(e + a * a) <= kRobinTol, fmt::format("a={}: {:.6f}", a, e));
  }
  for (double mu : {-1.0, -2.0}) {
    const int sf = fd::robin_spectral_flow(mu, cfg);
    c.expect(sf == -1, fmt::format("Sf across {} = {}", mu, sf));
  }
  return c;
}

Check oracle(const Options& o) {
  Check c;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> ukx(-2.5, 2.5), uphi(-M_PI / 2, M_PI / 2);
  fd::FdConfig cfg;  // L = 40, n = 4000 with 8000 for extrapolation
  int points = 0, compared = 0, unmatched = 0;
  double worst = 0.0;
  while (points < 50) {
    const double kx = ukx(rng), phi = uphi(rng);
    if (std::hypot(kx, std::sin(phi)) < 0.1) continue;  // keep clear of the puncture
    ++points;
    const auto r = fd::compare_with_semi(o.params, CylinderPoint(kx, BoundaryParam::from_angle(phi)), cfg);
    compared += r.compared();
    unmatched += r.unmatched_fd;
    worst = std::max(worst, r.max_diff);
  }
  c.expect(worst <= kOracleTol, fmt::format("max |semi - fd| = {:.2e} over {} levels at {} points", worst, compared, points));
  c.expect(compared >= 10, "at least 10 compared levels");
  c.expect(unmatched == 0, fmt::format("{} FD levels without a semi-analytic partner", unmatched));
  return c;
}

Check fiducial(const Options& o) {
  Check c;
  const auto ctx = semi_ctx(o);
  const auto loop = LoopSpec::around_puncture(o.flow_samples);
  const int a = flow::spectral_flow_plus(ctx, loop, flow::Fiducial::constant(0.25));
  const int b = flow::spectral_flow_plus(ctx, loop, flow::Fiducial::constant(0.75));
  const int s = flow::spectral_flow_plus(ctx, loop, flow::Fiducial::sinusoid(0.2));
  c.expect(a == b && b == s && a == -2, fmt::format("mu=0.25: {}, mu=0.75: {}, sinusoid: {}", a, b, s));
  return c;
}

Check properties(const Options& o) {
  Check c;
  const auto& p = o.params;
  std::mt19937_64 rng(o.seed + 12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const cplx I(0.0, 1.0);

  // FD Hermiticity, dense form of one real and one complex (perturbed) assembly
  {
    fd::FdConfig cfg;
    cfg.L = std::max(20.0, std::ceil(fd::FdConfig::min_length(p)));
    cfg.n = static_cast<int>(std::ceil(cfg.L / 0.02));
    fd::PerturbationSpec pert;
    pert.kind = fd::PerturbationSpec::Kind::MatrixPotential;
    pert.g = [](double y) {
      model::cmat3 g = model::cmat3::Zero();
      g(0, 1) = cplx(0.0, 0.1) * std::exp(-y);
      g(1, 0) = std::conj(g(0, 1));
      g(2, 2) = 0.05 * std::exp(-y);
      return g;
    };
    double worst = 0.0;
    for (const auto& pr : {fd::PerturbationSpec::none(), pert}) {
      const auto m = fd::discretize_halfline(p, CylinderPoint(0.7, 0.4), cfg, pr).to_dense();
      worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff());
    }
    c.expect(worst == 0.0, fmt::format("FD Hermiticity defect {}", worst));
  }
  // bulk Hermiticity and section residual / norm at random real momenta
  {
    double herm = 0.0, resid = 0.0, norm = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double kx = u(rng), ky = u(rng);
      const auto H = model::bulk_hamiltonian(p, kx, ky);
      herm = std::max(herm, (H - H.adjoint()).cwiseAbs().maxCoeff());
      const double w = model::omega_plus(p, kx, ky);
      const auto psi = model::section_inf(p, w, kx, ky);
      resid = std::max(resid, (H * psi - w * psi).norm() / psi.norm());
      norm = std::max(norm, std::abs(psi.squaredNorm() - 2.0));
    }
    c.expect(herm == 0.0, fmt::format("bulk Hermiticity defect {}", herm));
    c.expect(resid <= kSectionTol, fmt::format("section residual (real k) {:.1e}", resid));
    c.expect(norm <= kNormTol, fmt::format("| |psi|^2 - 2 | {:.1e}", norm));
  }
  // section residual at complex transverse roots, and the quartic root identity
  {
    double resid = 0.0, ident = 0.0;
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    for (int i = 0; i < 1000; ++i) {
      const double kx = u(rng);
      const double edge = halfline::essential_gap_edge(p, kx);
      const double w = frac(rng) * edge;
      for (cplx ky : halfline::transverse_roots(p, kx, w)) {
        const double C = p.f() - p.nu() * kx * kx;
        const cplx k2 = ky * ky;
        const cplx q = p.nu() * p.nu() * k2 * k2 + (1.0 - 2.0 * p.nu() * C) * k2 + (kx * kx + C * C - w * w);
        ident = std::max(ident, std::abs(q) / (1.0 + std::pow(std::abs(ky), 4)));
        if (std::abs(cplx(kx) - I * ky) < 1e-6) continue;  // chart singularity of the formula
        const auto H = model::bulk_hamiltonian(p, kx, ky);
        const auto psi = model::section_inf(p, w, kx, ky);
        resid = std::max(resid, (H * psi - w * psi).norm() / psi.norm());
      }
    }
    c.expect(resid <= kSectionTol, fmt::format("section residual (complex ky) {:.1e}", resid));
    c.expect(ident <= kRootTol, fmt::format("transverse root identity {:.1e}", ident));
    c.expect(std::abs(model::characteristic_quartic(p, 1.0 / (std::sqrt(2.0) * p.nu()))) < 1e-12,
             "characteristic quartic vanishes at 1/(sqrt2 nu)");
  }
  // |S| = 1
  {
    std::uniform_real_distribution<double> uk(0.01, 3.0);
    double dev = 0.0;
    int n = 0;
    while (n < 1000) {
      scatter::ScatterPoint q{u(rng), uk(rng), u(rng)};
      if (std::hypot(q.kx, q.a) < 1e-3 || std::hypot(q.kx, q.kappa - 1.0) < 1e-3) continue;
      dev = std::max(dev, std::abs(std::abs(scatter::scattering_amplitude(p, q)) - 1.0));
      ++n;
    }
    c.expect(dev <= kUnitTol, fmt::format("| |S| - 1 | {:.1e}", dev));
  }
  // beta map
  {
    double dev = 0.0;
    std::string wind;
    bool wind_ok = true;
    for (double ak : {0.1, 1.0, 10.0})
      for (double s : {1.0, -1.0}) {
        const double kx = s * ak;
        const int N = 4096;
        double total = 0.0;
        cplx prev = model::beta_map(CylinderPoint(kx, BoundaryParam::from_angle(-M_PI / 2)));
        for (int k = 1; k <= N; ++k) {
          const cplx b = model::beta_map(CylinderPoint(kx, BoundaryParam::from_angle(-M_PI / 2 + M_PI * k / N)));
          dev = std::max(dev, std::abs(std::abs(b) - 1.0));
          total += std::arg(b / prev);
          prev = b;
        }
        const int w = static_cast<int>(std::lround(total / (2.0 * M_PI)));
        wind += fmt::format(" {}:{}", kx, w);
        wind_ok = wind_ok && w == (kx > 0 ? -1 : 1);
      }
    c.expect(dev <= kBetaTol, fmt::format("| |beta| - 1 | {:.1e}", dev));
    c.expect(wind_ok, "beta winding" + wind);
  }
  // deficiency residuals
  {
    double worst = 0.0;
    for (auto which : {model::DeficiencyVector::OnePlus, model::DeficiencyVector::OneMinus,
                       model::DeficiencyVector::TwoPlus, model::DeficiencyVector::TwoMinus})
      worst = std::max(worst, model::deficiency_residual(p, which, model::YGrid{}));
    c.expect(worst < kDeficiencyTol, fmt::format("deficiency residual {:.1e}", worst));
  }
  return c;
}

const char* names[] = {"",
                       "Chern numbers",
                       "edge index crossings",
                       "relative Levinson",
                       "bulk-scattering winding",
                       "ell_alpha winding and section limits",
                       "spectral flow structure",
                       "perturbation robustness",
                       "lower-gap spectral flow",
                       "Robin pump",
                       "oracle agreement",
                       "fiducial independence",
                       "property suites"};

}  // namespace

CriterionResult run_criterion(int id, const Options& opt) {
  CriterionResult r;
  r.id = id;
  r.name = (id >= 1 && id <= 12) ? names[id] : "unknown";
  const auto t0 = clock_type::now();
  try {
    Check c;
    switch (id) {
      case 1: c = chern(opt); break;
      case 2: c = crossings(opt); break;
      case 3: c = levinson(opt); break;
      case 4: c = gamma_loops(opt); break;
      case 5: c = ell_alpha(opt); break;
      case 6: c = pi1(opt); break;
      case 7: c = robustness(opt); break;
      case 8: c = remark_lower(opt); break;
      case 9: c = robin(opt); break;
      case 10: c = oracle(opt); break;
      case 11: c = fiducial(opt); break;
      case 12: c = properties(opt); break;
      default: throw ConfigError(fmt::format("no criterion {}", id));
    }
    r.pass = c.ok;
    r.detail = c.str();
    r.timing = fmt::format("{}", fmt::join(c.timing, "; "));
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = fmt::format("exception: {}", e.what());
  }
  r.seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_all(const Options& opt, const Reporter& report) {
  std::vector<CriterionResult> out;
  const auto t0 = clock_type::now();
  for (int id = 1; id <= 12; ++id) {
    auto r = run_criterion(id, opt);
    if (id == 12) {
      const double total = std::chrono::duration<double>(clock_type::now() - t0).count();
      const bool fast = total < kSuiteSeconds;
      r.pass = r.pass && fast;
      r.timing = fmt::format("suite wall time {:.1f}s{}", total, fast ? "" : " [violated]");
    }
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_line(const CriterionResult& r) {
  return fmt::format("{} criterion {:2d} ({}) [{:.1f}s]: {}{}{}", r.pass ? "PASS" : "FAIL", r.id, r.name, r.seconds,
                     r.detail, r.timing.empty() ? "" : "; ", r.timing);
}

}  // namespace topoflow::verify
