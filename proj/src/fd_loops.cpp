#include "topoflow/fd_loops.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "topoflow/errors.hpp"
#include "topoflow/parallel.hpp"

namespace topoflow::fd {

// second-order scheme: about 1.4e-3 at h = 0.01 on the probe points
double discretization_error_estimate(const FdConfig& cfg) { return 14.0 * cfg.h() * cfg.h(); }

std::vector<halfline::SpectrumSample> loop_spectra(const ModelParams& p, const LoopSpec& loop, const FdConfig& cfg,
                                                   const PerturbationSpec& pert, int workers) {
  loop.validate();
  cfg.validate(p);
  pert.validate(cfg);
  const double err2 = 2.0 * discretization_error_estimate(cfg);
  const int N = loop.samples;
  return parallel_map(N + 1, workers, [&](int k) {
    const double t = static_cast<double>(k) / N;
    const auto pt = loop.point(t);
    halfline::SpectrumSample s;
    s.loop_param = loop.param(t);
    s.gap_edge = halfline::essential_gap_edge(p, pt.kx());
    const double lo = std::max({err2, halfline::gap_margin(p), 3.0 * std::abs(pt.kx()) * cfg.h()});
    const double hi = s.gap_edge - std::max(err2, halfline::gap_margin(p));
    s.eigenvalues_upper = fd_edge_eigenvalues(p, pt, cfg, pert, lo, hi);
    s.eigenvalues_lower = fd_edge_eigenvalues(p, pt, cfg, pert, -hi, -lo);
    return s;
  });
}

double robin_lowest_eigenvalue(const BoundaryParam& bc, const FdConfig& cfg) {
  const auto op = discretize_robin(bc, cfg);
  if (op.count_below(0.0) == 0) return std::numeric_limits<double>::infinity();
  // Gershgorin lower bound of the spectrum
  double lo = 0.0;
  for (int j = 0; j < op.blocks(); ++j) {
    double r = op.diag[j](0, 0);
    if (j > 0) r -= std::abs(op.upper[j - 1](0, 0));
    if (j + 1 < op.blocks()) r -= std::abs(op.upper[j](0, 0));
    lo = std::min(lo, r);
  }
  const auto e = op.eigenpairs_in(lo - 1.0, 0.0, 1e-12, false);
  if (e.empty()) throw NumericalFailure("Robin count and bisection disagree");
  return e.front().value;
}

int robin_spectral_flow(double mu, const FdConfig& cfg, int samples, Orientation orientation) {
  if (!(mu < 0)) throw ConfigError("Robin flow needs a negative level");
  cfg.validate_basic();
  const double W = 0.5 * std::abs(mu);
  auto sample = [&](double t) {
    const double s = orientation == Orientation::Positive ? t : 1.0 - t;
    const auto bc = BoundaryParam::from_angle(-M_PI / 2 + M_PI * s);
    FlowSample fs;
    fs.t = t;
    for (const auto& e : discretize_robin(bc, cfg).eigenpairs_in(mu - W, mu + W, 1e-12, false))
      fs.eigs.push_back(e.value - mu);
    return fs;
  };
  std::vector<FlowSample> s;
  for (int k = 0; k <= samples; ++k) s.push_back(sample(static_cast<double>(k) / samples));
  PhillipsOptions opt;
  opt.window = W;
  return phillips_spectral_flow(std::move(s), opt, sample);
}

}  // namespace topoflow::fd

namespace topoflow::fd {

OracleComparison compare_with_semi(const ModelParams& p, const CylinderPoint& pt, const FdConfig& cfg,
                                   double kappa_cut) {
  cfg.validate(p);
  FdConfig fine = cfg;
  fine.n = 2 * cfg.n;
  const double m = halfline::gap_margin(p);
  const double edge = halfline::essential_gap_edge(p, pt.kx());
  const double floor = std::max({m, 0.05 * p.f(), 3.0 * std::abs(pt.kx()) * cfg.h()});
  const double hi = edge - m;

  OracleComparison out;
  const auto all_semi = halfline::edge_eigenvalues(p, pt, {m, hi});
  for (double w : all_semi) {
    if (w < floor + 0.01 * p.f()) continue;
    double kmin = std::numeric_limits<double>::infinity();
    for (const auto& md : halfline::decaying_modes(p, pt.kx(), w)) kmin = std::min(kmin, md.ky.imag());
    if (kmin >= kappa_cut) out.semi.push_back(w);
  }

  const auto coarse = fd_edge_eigenvalues(p, pt, cfg, PerturbationSpec::none(), floor, hi);
  const auto dense = fd_edge_eigenvalues(p, pt, fine, PerturbationSpec::none(), floor, hi);
  for (double c : coarse) {
    double best = std::numeric_limits<double>::infinity(), match = c;
    for (double d : dense)
      if (std::abs(d - c) < std::abs(best)) best = d - c, match = d;
    if (std::abs(best) < 1e-2) out.fd.push_back((4.0 * match - c) / 3.0);
  }

  for (double w : out.semi) {
    double best = std::numeric_limits<double>::infinity();
    for (double x : out.fd) best = std::min(best, std::abs(x - w));
    out.max_diff = std::max(out.max_diff, best);
  }
  for (double x : out.fd) {
    if (x < floor + 0.01 * p.f() || x > edge - 0.01 * p.f()) continue;
    double best = std::numeric_limits<double>::infinity();
    for (double w : all_semi) best = std::min(best, std::abs(x - w));
    if (best > 1e-3) ++out.unmatched_fd;
  }
  return out;
}

}  // namespace topoflow::fd
