#include "topoflow/flow.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "topoflow/errors.hpp"
#include "topoflow/parallel.hpp"

namespace topoflow::flow {

const char* backend_name(Backend b) { return b == Backend::SemiAnalytic ? "semi" : "fd"; }

const char* branch_end_name(BranchEnd e) {
  switch (e) {
    case BranchEnd::MergesUpperBand: return "MergesUpperBand";
    case BranchEnd::MergesFlatBand: return "MergesFlatBand";
    case BranchEnd::ClosesLoop: return "ClosesLoop";
  }
  return "?";
}

const char* method_name(FlowResult::Method m) {
  switch (m) {
    case FlowResult::Method::CrossingCount: return "CrossingCount";
    case FlowResult::Method::PhillipsRank: return "PhillipsRank";
    case FlowResult::Method::MergeCount: return "MergeCount";
  }
  return "?";
}

namespace {

void check_backend(const FlowContext& ctx) {
  if (ctx.backend == Backend::SemiAnalytic && ctx.pert.kind != fd::PerturbationSpec::Kind::None)
    throw ConfigError("the semi-analytic backend only handles the unperturbed operator");
}

// lower/upper cut of the traced window on the positive side. The discrete flat band
// carries one boundary level at about 2.4 |kx| h; the FD floor stays above it.
std::pair<double, double> trace_window(const FlowContext& ctx, double kx, double edge) {
  const double m = halfline::gap_margin(ctx.params);
  double lo = m;
  if (ctx.backend == Backend::FdOracle)
    lo = std::max({m, ctx.fd_floor * ctx.params.f(), 3.0 * std::abs(kx) * ctx.fd.h()});
  return {lo, edge - m};
}

struct TraceSample {
  double t = 0.0;
  double s = 0.0;  // traversal parameter
  double lo = 0.0, hi = 0.0;
  double edge = 0.0;
  std::vector<double> eigs;
  int depth = 0;  // refinement depth of the interval to the right
};

double boundary_distance(const TraceSample& s, double x) { return std::min(x - s.lo, s.hi - x); }

struct Matching {
  std::vector<std::pair<int, int>> pairs;
  double max_matched = 0.0;
  double max_unmatched = 0.0;
};

// Order-preserving matching minimizing the summed cost; an unmatched level costs its
// distance to the nearest edge of its window plus `penalty`.
Matching match(const TraceSample& a, const TraceSample& b, double penalty) {
  const int n = static_cast<int>(a.eigs.size()), m = static_cast<int>(b.eigs.size());
  std::vector<std::vector<double>> D(n + 1, std::vector<double>(m + 1, 0.0));
  std::vector<std::vector<char>> how(n + 1, std::vector<char>(m + 1, 0));
  for (int i = 1; i <= n; ++i) {
    D[i][0] = D[i - 1][0] + penalty + boundary_distance(a, a.eigs[i - 1]);
    how[i][0] = 'a';
  }
  for (int j = 1; j <= m; ++j) {
    D[0][j] = D[0][j - 1] + penalty + boundary_distance(b, b.eigs[j - 1]);
    how[0][j] = 'b';
  }
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= m; ++j) {
      double best = D[i - 1][j - 1] + std::abs(a.eigs[i - 1] - b.eigs[j - 1]);
      char h = 'm';
      const double da = D[i - 1][j] + penalty + boundary_distance(a, a.eigs[i - 1]);
      if (da < best) best = da, h = 'a';
      const double db = D[i][j - 1] + penalty + boundary_distance(b, b.eigs[j - 1]);
      if (db < best) best = db, h = 'b';
      D[i][j] = best;
      how[i][j] = h;
    }
  Matching out;
  int i = n, j = m;
  while (i > 0 || j > 0) {
    const char h = how[i][j];
    if (h == 'm') {
      out.pairs.emplace_back(i - 1, j - 1);
      out.max_matched = std::max(out.max_matched, std::abs(a.eigs[i - 1] - b.eigs[j - 1]));
      --i, --j;
    } else if (h == 'a') {
      out.max_unmatched = std::max(out.max_unmatched, boundary_distance(a, a.eigs[i - 1]));
      --i;
    } else {
      out.max_unmatched = std::max(out.max_unmatched, boundary_distance(b, b.eigs[j - 1]));
      --j;
    }
  }
  std::reverse(out.pairs.begin(), out.pairs.end());
  return out;
}

BranchEnd label(const TraceSample& s, double x, Gap gap) {
  const bool near_lo = x - s.lo < s.hi - x;
  const bool outer = gap == Gap::Upper ? !near_lo : near_lo;
  return outer ? BranchEnd::MergesUpperBand : BranchEnd::MergesFlatBand;
}

}  // namespace

std::vector<double> gap_eigenvalues(const FlowContext& ctx, const CylinderPoint& pt, Gap gap) {
  check_backend(ctx);
  const double edge = halfline::essential_gap_edge(ctx.params, pt.kx());
  const auto [lo, hi] = trace_window(ctx, pt.kx(), edge);
  const double wlo = gap == Gap::Upper ? lo : -hi;
  const double whi = gap == Gap::Upper ? hi : -lo;
  if (ctx.backend == Backend::SemiAnalytic) return halfline::edge_eigenvalues(ctx.params, pt, {wlo, whi}, ctx.search);
  return fd::fd_edge_eigenvalues(ctx.params, pt, ctx.fd, ctx.pert, wlo, whi);
}

std::vector<EdgeBranch> trace_branches(const FlowContext& ctx, const LoopSpec& loop, Gap gap) {
  loop.validate();
  check_backend(ctx);
  if (ctx.backend == Backend::FdOracle) ctx.fd.validate(ctx.params);
  const double f = ctx.params.f();
  const double period = loop.period();
  const int max_depth = 10;

  auto make = [&](double t, int depth) {
    TraceSample s;
    s.t = t;
    s.s = loop.param(t);
    const auto pt = loop.point(t);
    s.edge = halfline::essential_gap_edge(ctx.params, pt.kx());
    const auto [lo, hi] = trace_window(ctx, pt.kx(), s.edge);
    s.lo = gap == Gap::Upper ? lo : -hi;
    s.hi = gap == Gap::Upper ? hi : -lo;
    s.eigs = gap_eigenvalues(ctx, pt, gap);
    s.depth = depth;
    return s;
  };

  const int N = loop.samples;
  std::vector<TraceSample> smp = parallel_map(N, ctx.workers, [&](int k) { return make(double(k) / N, 0); });
  {
    TraceSample closing = smp.front();
    closing.t = 1.0;
    closing.s += period;
    smp.push_back(closing);
  }

  // Links are accepted when their jump stays within 3 x step x slope, the slope being
  // estimated from the neighbouring intervals; isolated jumps are refined.
  const double m3 = 3.0 * halfline::gap_margin(ctx.params);
  double max_edge = f;
  for (const auto& x : smp) max_edge = std::max(max_edge, x.edge);
  const double slope_floor = max_edge * (2.0 * M_PI / period);

  std::vector<Matching> links;
  for (;;) {
    const int nl = static_cast<int>(smp.size()) - 1;
    links.assign(nl, {});
    std::vector<double> slope(nl);
    for (int k = 0; k < nl; ++k) {
      links[k] = match(smp[k], smp[k + 1], 3.0 * (smp[k + 1].s - smp[k].s) * slope_floor);
      slope[k] = links[k].max_matched / (smp[k + 1].s - smp[k].s);
    }
    std::vector<int> bad;
    for (int k = 0; k < nl; ++k) {
      const double neigh = std::max(slope[(k + nl - 1) % nl], slope[(k + 1) % nl]);
      const double tau = 3.0 * (smp[k + 1].s - smp[k].s) * std::max(slope_floor, neigh);
      if (links[k].max_matched > tau || links[k].max_unmatched > m3) {
        if (smp[k].depth >= max_depth)
          throw TracingAmbiguity(fmt::format(
              "branch tracing unresolved on {} loop between parameters {:.10g} and {:.10g} (levels [{}] and [{}])",
              loop.name(), smp[k].s, smp[k + 1].s, fmt::join(smp[k].eigs, ", "), fmt::join(smp[k + 1].eigs, ", ")));
        bad.push_back(k);
      }
    }
    if (bad.empty()) break;
    auto fresh = parallel_map(static_cast<int>(bad.size()), ctx.workers, [&](int i) {
      const auto& a = smp[bad[i]];
      const auto& b = smp[bad[i] + 1];
      return make(0.5 * (a.t + b.t), a.depth + 1);
    });
    std::vector<TraceSample> merged;
    merged.reserve(smp.size() + fresh.size());
    size_t q = 0;
    for (size_t k = 0; k < smp.size(); ++k) {
      merged.push_back(smp[k]);
      if (q < bad.size() && bad[q] == static_cast<int>(k)) {
        merged.back().depth += 1;
        merged.push_back(std::move(fresh[q]));
        ++q;
      }
    }
    smp = std::move(merged);
    spdlog::debug("trace_branches: refined {} intervals, {} samples", bad.size(), smp.size());
  }

  // succ/pred over nodes (k, i); the closing sample is identified with sample 0.
  const int M = static_cast<int>(smp.size()) - 1;
  std::vector<std::vector<int>> succ(M), pred(M);
  for (int k = 0; k < M; ++k) {
    succ[k].assign(smp[k].eigs.size(), -1);
    pred[k].assign(smp[k].eigs.size(), -1);
  }
  for (int k = 0; k < M; ++k)
    for (auto [i, j] : links[k].pairs) {
      succ[k][i] = j;
      pred[(k + 1) % M][j] = i;
    }

  std::vector<std::vector<char>> seen(M);
  for (int k = 0; k < M; ++k) seen[k].assign(smp[k].eigs.size(), 0);

  std::vector<EdgeBranch> out;
  auto follow = [&](int k0, int i0, bool cycle) {
    EdgeBranch br;
    int k = k0, i = i0;
    double offset = 0.0;
    for (;;) {
      seen[k][i] = 1;
      br.points.emplace_back(smp[k].s + offset, smp[k].eigs[i]);
      const int j = succ[k][i];
      if (j < 0) break;
      k += 1;
      if (k == M) {
        k = 0;
        offset += period;
      }
      i = j;
      if (cycle && k == k0 && i == i0) {
        br.points.emplace_back(smp[k].s + offset, smp[k].eigs[i]);
        break;
      }
      if (seen[k][i]) break;
    }
    if (cycle) {
      br.start = br.end = BranchEnd::ClosesLoop;
    } else {
      br.start = label(smp[k0], smp[k0].eigs[i0], gap);
      br.end = label(smp[k], smp[k].eigs[i], gap);
    }
    out.push_back(std::move(br));
  };
  for (int k = 0; k < M; ++k)
    for (size_t i = 0; i < smp[k].eigs.size(); ++i)
      if (pred[k][i] < 0) follow(k, static_cast<int>(i), false);
  for (size_t i = 0; i < smp[0].eigs.size(); ++i)
    if (!seen[0][i]) follow(0, static_cast<int>(i), true);
  for (int k = 0; k < M; ++k)
    for (size_t i = 0; i < smp[k].eigs.size(); ++i)
      if (!seen[k][i]) throw TracingAmbiguity("branch tracing left an orphan level");
  return out;
}

namespace {

std::pair<int, std::vector<Crossing>> count_crossings(const std::vector<EdgeBranch>& branches, double mu) {
  int total = 0;
  std::vector<Crossing> xs;
  for (const auto& br : branches)
    for (size_t k = 0; k + 1 < br.points.size(); ++k) {
      const auto [s0, w0] = br.points[k];
      const auto [s1, w1] = br.points[k + 1];
      const bool above0 = w0 > mu, above1 = w1 > mu;
      if (above0 == above1) continue;
      const int sign = above0 ? +1 : -1;
      const double u = (mu - w0) / (w1 - w0);
      xs.push_back({s0 + u * (s1 - s0), mu, sign});
      total += sign;
    }
  return {total, xs};
}

}  // namespace

FlowResult edge_index_crossings(const std::vector<EdgeBranch>& branches, double mu, double f) {
  const double delta = 1e-4 * f;
  auto [c0, xs] = count_crossings(branches, mu);
  const int cp = count_crossings(branches, mu + delta).first;
  const int cm = count_crossings(branches, mu - delta).first;
  if (c0 != cp || c0 != cm)
    throw TangencyUnresolved(fmt::format("crossing counts at mu = {} disagree under a shift of {}: {}, {}, {}", mu, delta,
                                         cm, c0, cp));
  FlowResult r;
  r.value = c0;
  r.crossings = std::move(xs);
  r.method = FlowResult::Method::CrossingCount;
  return r;
}

FlowResult edge_index_merges(const std::vector<EdgeBranch>& branches, BandEdge band) {
  FlowResult r;
  r.method = FlowResult::Method::MergeCount;
  for (const auto& br : branches) {
    if (band == BandEdge::UpperBand) {
      if (br.start == BranchEnd::MergesUpperBand) r.value += 1;
      if (br.end == BranchEnd::MergesUpperBand) r.value -= 1;
    } else {
      if (br.end == BranchEnd::MergesFlatBand) r.value += 1;
      if (br.start == BranchEnd::MergesFlatBand) r.value -= 1;
    }
  }
  return r;
}

double Fiducial::at(const ModelParams& p, double t, double gap_edge, Gap gap) const {
  double mu = 0.0;
  switch (kind) {
    case Kind::Default: mu = 0.5 * std::min(p.f(), gap_edge); break;
    case Kind::Constant: mu = value * p.f(); break;
    case Kind::Sinusoid: mu = p.f() * (0.5 + amplitude * std::sin(2.0 * M_PI * t)); break;
  }
  return gap == Gap::Upper ? mu : -mu;
}

FlowResult spectral_flow(const FlowContext& ctx, const LoopSpec& loop, Gap gap, const Fiducial& fid) {
  loop.validate();
  check_backend(ctx);
  if (ctx.backend == Backend::FdOracle) {
    ctx.fd.validate(ctx.params);
    ctx.pert.validate(ctx.fd);
  }
  const double m = halfline::gap_margin(ctx.params);
  const int N = loop.samples;

  // window from the fiducial's distance to the gap edges on the coarse samples
  struct Pos {
    CylinderPoint pt;
    double edge, mu;
  };
  auto pos = [&](double t) {
    const auto pt = loop.point(t);
    const double edge = halfline::essential_gap_edge(ctx.params, pt.kx());
    return Pos{pt, edge, fid.at(ctx.params, t, edge, gap)};
  };
  // a potential V turns the flat band into bound levels in [-|V|, |V|] and can pull
  // band levels |V| into the gap, so the window keeps |V| away from both ends
  const double v = ctx.backend == Backend::FdOracle ? ctx.pert.sup_norm(ctx.fd) : 0.0;
  double W = std::numeric_limits<double>::infinity();
  for (int k = 0; k < N; ++k) {
    const auto q = pos(double(k) / N);
    const double room = std::min(std::abs(q.mu) - m - v, q.edge - m - v - std::abs(q.mu));
    if (!(room > 0)) throw ConfigError(fmt::format("fiducial {} leaves the gap (0, {})", q.mu, q.edge));
    W = std::min(W, 0.95 * room);
  }

  auto sample = [&](double t) {
    const auto q = pos(t);
    fd::FlowSample s;
    s.t = t;
    std::vector<double> e;
    if (ctx.backend == Backend::SemiAnalytic) {
      e = halfline::edge_eigenvalues(ctx.params, q.pt, {q.mu - W, q.mu + W}, ctx.search);
    } else {
      const auto op = fd::discretize_halfline(ctx.params, q.pt, ctx.fd, ctx.pert);
      for (const auto& x : fd::fd_eigenvalues(op, q.mu - W, q.mu + W, false)) e.push_back(x.value);
    }
    for (double x : e) s.eigs.push_back(x - q.mu);
    return s;
  };

  auto samples = parallel_map(N, ctx.workers, [&](int k) { return sample(double(k) / N); });
  {
    auto closing = samples.front();
    closing.t = 1.0;
    samples.push_back(closing);
  }
  fd::PhillipsOptions opt;
  opt.window = W;
  FlowResult r;
  r.method = FlowResult::Method::PhillipsRank;
  r.value = fd::phillips_spectral_flow(std::move(samples), opt, sample);
  return r;
}

int spectral_flow_plus(const FlowContext& ctx, const LoopSpec& loop, const Fiducial& fid) {
  return spectral_flow(ctx, loop, Gap::Upper, fid).value;
}

int spectral_flow_minus(const FlowContext& ctx, const LoopSpec& loop, const Fiducial& fid) {
  return spectral_flow(ctx, loop, Gap::Lower, fid).value;
}

Pi1Report pi1_decomposition_check(const FlowContext& ctx, int samples) {
  Pi1Report r;
  r.sf_plus = spectral_flow_plus(ctx, LoopSpec::fixed_kx(1.0, samples));
  r.sf_minus = spectral_flow_plus(ctx, LoopSpec::fixed_kx(-1.0, samples));
  r.sf_minus_op = spectral_flow_plus(ctx, LoopSpec::fixed_kx(-1.0, samples, Orientation::Negative));
  r.sf_zero = spectral_flow_plus(ctx, LoopSpec::around_puncture(samples));
  r.sf_plus_half = spectral_flow_plus(ctx, LoopSpec::fixed_kx(0.5, samples));
  r.sf_plus_three = spectral_flow_plus(ctx, LoopSpec::fixed_kx(3.0, samples));
  auto need = [&](bool ok, std::string what) {
    if (!ok) r.violations.push_back(std::move(what));
  };
  need(r.sf_zero == r.sf_plus - r.sf_minus,
       fmt::format("Sf(l_0) = {} but Sf(l_+) - Sf(l_-) = {}", r.sf_zero, r.sf_plus - r.sf_minus));
  need(r.sf_zero == r.sf_plus + r.sf_minus_op,
       fmt::format("Sf(l_0) = {} but Sf(l_+) + Sf(l_-^op) = {}", r.sf_zero, r.sf_plus + r.sf_minus_op));
  need(r.sf_zero == 2 * r.sf_plus, fmt::format("Sf(l_0) = {} but 2 Sf(l_+) = {}", r.sf_zero, 2 * r.sf_plus));
  need(r.sf_minus_op == -r.sf_minus, fmt::format("Sf(l_-^op) = {} is not -Sf(l_-) = {}", r.sf_minus_op, -r.sf_minus));
  need(r.sf_plus_half == r.sf_plus && r.sf_plus_three == r.sf_plus,
       fmt::format("l_+ flow depends on kx: {} (0.5), {} (1), {} (3)", r.sf_plus_half, r.sf_plus, r.sf_plus_three));
  return r;
}

}  // namespace topoflow::flow
