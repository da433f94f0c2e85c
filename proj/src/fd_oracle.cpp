#include "topoflow/fd_oracle.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "topoflow/errors.hpp"
#include "topoflow/halfline.hpp"

namespace topoflow::fd {

namespace {
constexpr cplx I{0.0, 1.0};
}

void FdConfig::validate_basic() const {
  if (n < 500) throw ConfigError(fmt::format("fd config needs n >= 500 (n = {})", n));
  if (!(L > 0.0)) throw ConfigError("fd config needs L > 0");
  if (h() > 0.02 + 1e-15) throw ConfigError(fmt::format("fd config needs h = L/n <= 0.02 (h = {})", h()));
}

double FdConfig::min_length(const ModelParams& p) {
  const auto [k1, k2] = halfline::transverse_K(p, 0.0, 0.5 * p.f());
  const double kappa_min = std::sqrt(-std::max(k1, k2));
  return 20.0 / std::sqrt(kappa_min);
}

void FdConfig::validate(const ModelParams& p) const {
  validate_basic();
  if (L < min_length(p))
    throw ConfigError(fmt::format("fd config needs L >= 20/sqrt(kappa_min) = {} (L = {})", min_length(p), L));
}

PerturbationSpec PerturbationSpec::exponential_identity(double c) {
  PerturbationSpec s;
  s.kind = Kind::MatrixPotential;
  s.real_diagonal = true;
  s.scale = c;
  s.g = [c](double y) -> cmat3 { return c * std::exp(-y) * cmat3::Identity(); };
  return s;
}

double PerturbationSpec::sup_norm(const FdConfig& cfg) const {
  if (kind == Kind::None) return 0.0;
  double m = 0.0;
  for (int j = 0; j < cfg.n; ++j) {
    const Eigen::SelfAdjointEigenSolver<cmat3> es(g(j * cfg.h()), Eigen::EigenvaluesOnly);
    m = std::max(m, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return m;
}

void PerturbationSpec::validate(const FdConfig& cfg) const {
  if (kind == Kind::None) return;
  if (!g) throw ConfigError("matrix potential without a function");
  if (g(cfg.L).norm() >= 1e-6) throw ConfigError("perturbation must decay: |g(L)| >= 1e-6");
  for (int k = 0; k <= 16; ++k) {
    const cmat3 m = g(cfg.L * k / 16.0);
    if ((m - m.adjoint()).norm() != 0.0) throw ConfigError("perturbation is not Hermitian");
  }
}

int FdOperator::count_below(double sigma) const {
  return std::visit([sigma](const auto& m) { return m.count_below(sigma); }, matrix);
}

Eigen::MatrixXcd FdOperator::to_dense() const {
  Eigen::MatrixXcd m = std::visit([](const auto& bt) -> Eigen::MatrixXcd { return bt.to_dense().template cast<cplx>(); }, matrix);
  if (!real_basis) return m;
  // undo v -> v / i; component index is recovered from the node layout
  std::vector<cplx> phase(dim(), 1.0);
  int prev = -1, comp = 0;
  for (int i = 0; i < dim(); ++i) {
    comp = (node_of_dof[i] == prev) ? comp + 1 : 0;
    prev = node_of_dof[i];
    if (node_of_dof[i] > 0 && comp == 2) phase[i] = I;
  }
  for (int r = 0; r < dim(); ++r)
    for (int c = 0; c < dim(); ++c) m(r, c) *= phase[r] * std::conj(phase[c]);
  return m;
}

FdOperator discretize_halfline(const ModelParams& p, const CylinderPoint& pt, const FdConfig& cfg,
                               const PerturbationSpec& pert) {
  cfg.validate(p);
  pert.validate(cfg);
  const int n = cfg.n;
  const double h = cfg.h();
  const double nu = p.nu();
  const double kx = pt.kx();
  const double c = p.f() - nu * kx * kx;
  const auto& bc = pt.bc();

  std::vector<cmat3> D(n, cmat3::Zero()), U(n, cmat3::Zero());
  auto weight = [&](int j) { return j == 0 ? 0.5 * h : h; };
  auto add = [&](int nr, int cr, int nc, int cc, cplx v) {
    if (nr >= n || nc >= n) return;  // far Dirichlet node
    if (nr == nc) D[nr](cr, cc) += v;
    else if (nc == nr + 1) U[nr](cr, cc) += v;
    // lower-triangle partners are implied by Hermiticity
  };

  for (int j = 0; j < n; ++j) {
    const double w = weight(j);
    add(j, 0, j, 1, kx * w);
    add(j, 1, j, 0, kx * w);
    add(j, 1, j, 2, -I * c * w);
    add(j, 2, j, 1, I * c * w);
    if (pert.kind == PerturbationSpec::Kind::MatrixPotential) D[j] += w * pert.g(j * h);
  }
  // cell [y_j, y_{j+1}]: -i eta v' and the nu u' v' coupling, integrated by parts
  for (int j = 0; j < n; ++j) {
    const int nodes[2] = {j, j + 1};
    const double s[2] = {-1.0, 1.0};
    for (int ia = 0; ia < 2; ++ia)
      for (int ib = 0; ib < 2; ++ib) {
        const int a = nodes[ia], b = nodes[ib];
        add(a, 0, b, 2, -0.5 * I * s[ib]);
        add(b, 2, a, 0, 0.5 * I * s[ib]);
        add(a, 1, b, 2, I * nu / h * s[ia] * s[ib]);
        add(b, 2, a, 1, -I * nu / h * s[ia] * s[ib]);
      }
  }
  // natural boundary condition i kx p u + q v' = 0 enters as a boundary term
  // a huge boundary term pins u(0) = 0; past 1e8 times the stiffness scale we drop u(0)
  // outright instead of feeding the pivot to the Sturm counts
  const bool drop_u0 = bc.q == 0.0 || std::abs(nu * kx * bc.p) > 1e8 * (nu / h + 1.0) * std::abs(bc.q);
  if (!drop_u0) D[0](1, 1) += nu * kx * bc.p / bc.q;

  // v -> i v makes the matrix real whenever the potential allows it
  const cplx ph[3] = {1.0, 1.0, I};
  bool real = true;
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc) {
        const double sc = 1.0 / std::sqrt(weight(j) * weight(j));
        D[j](r, cc) *= std::conj(ph[r]) * ph[cc] * sc;
        if (j + 1 < n) U[j](r, cc) *= std::conj(ph[r]) * ph[cc] / std::sqrt(weight(j) * weight(j + 1));
        if (D[j](r, cc).imag() != 0.0 || (j + 1 < n && U[j](r, cc).imag() != 0.0)) real = false;
      }
  if (!real) {
    // stay in the original basis for genuinely complex potentials
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < 3; ++r)
        for (int cc = 0; cc < 3; ++cc) {
          D[j](r, cc) *= ph[r] * std::conj(ph[cc]);
          if (j + 1 < n) U[j](r, cc) *= ph[r] * std::conj(ph[cc]);
        }
  }

  std::vector<int> keep0 = drop_u0 ? std::vector<int>{0} : std::vector<int>{0, 1};
  FdOperator op;
  op.n = n;
  op.h = h;
  op.real_basis = real;
  op.node_of_dof.assign(keep0.size(), 0);
  for (int j = 1; j < n; ++j)
    for (int k = 0; k < 3; ++k) op.node_of_dof.push_back(j);

  auto fill = [&](auto& bt) {
    using BT = std::decay_t<decltype(bt)>;
    using Scalar = typename BT::Block::Scalar;
    auto cast = [](cplx v) -> Scalar {
      if constexpr (std::is_same_v<Scalar, double>) return v.real();
      else return v;
    };
    bt.diag.resize(n);
    bt.upper.resize(n - 1);
    const int s0 = static_cast<int>(keep0.size());
    for (int j = 0; j < n; ++j) {
      const int sj = j == 0 ? s0 : 3;
      bt.diag[j].resize(sj, sj);
      for (int r = 0; r < sj; ++r)
        for (int cc = 0; cc < sj; ++cc) {
          const int rr = j == 0 ? keep0[r] : r, cidx = j == 0 ? keep0[cc] : cc;
          bt.diag[j](r, cc) = cast(D[j](rr, cidx));
        }
      if (j + 1 < n) {
        bt.upper[j].resize(sj, 3);
        for (int r = 0; r < sj; ++r)
          for (int cc = 0; cc < 3; ++cc) bt.upper[j](r, cc) = cast(U[j](j == 0 ? keep0[r] : r, cc));
      }
    }
    // exact symmetry of the stored triangles
    for (int j = 0; j < n; ++j) {
      auto& d = bt.diag[j];
      for (int r = 0; r < d.rows(); ++r)
        for (int cc = 0; cc < r; ++cc) {
          if constexpr (std::is_same_v<Scalar, double>) d(r, cc) = d(cc, r);
          else d(r, cc) = std::conj(d(cc, r));
        }
      if constexpr (!std::is_same_v<Scalar, double>)
        for (int r = 0; r < d.rows(); ++r) d(r, r) = d(r, r).real();
    }
  };
  if (real) {
    BlockTridiag<double> bt;
    fill(bt);
    op.matrix = std::move(bt);
  } else {
    BlockTridiag<cplx> bt;
    fill(bt);
    op.matrix = std::move(bt);
  }
  return op;
}

std::vector<FdEigen> fd_eigenvalues(const FdOperator& op, double lo, double hi, bool with_localization, double tol) {
  std::vector<FdEigen> out;
  std::visit(
      [&](const auto& bt) {
        const auto pairs = bt.eigenpairs_in(lo, hi, tol, with_localization);
        for (const auto& pr : pairs) {
          FdEigen e;
          e.value = pr.value;
          if (with_localization && pr.vector.size() == op.dim()) {
            double near = 0.0, total = 0.0;
            for (int i = 0; i < op.dim(); ++i) {
              const double m = std::norm(pr.vector(i));
              total += m;
              if (op.node_of_dof[i] * op.h <= 0.5 * op.n * op.h) near += m;
            }
            e.near_fraction = total > 0.0 ? near / total : 0.0;
          }
          out.push_back(e);
        }
      },
      op.matrix);
  return out;
}

std::vector<double> fd_edge_eigenvalues(const ModelParams& p, const CylinderPoint& pt, const FdConfig& cfg,
                                        const PerturbationSpec& pert, double lo, double hi) {
  const auto op = discretize_halfline(p, pt, cfg, pert);
  std::vector<double> out;
  for (const auto& e : fd_eigenvalues(op, lo, hi, true))
    if (e.near_fraction >= 0.8) out.push_back(e.value);
  return out;
}

BlockTridiag<double> discretize_robin(const BoundaryParam& bc, const FdConfig& cfg) {
  cfg.validate_basic();
  const int n = cfg.n;
  const double h = cfg.h();
  const double ih2 = 1.0 / (h * h);
  BlockTridiag<double> bt;
  const int first = bc.is_infinite() ? 1 : 0;
  for (int j = first; j < n; ++j) {
    BlockTridiag<double>::Block d(1, 1);
    d(0, 0) = 2.0 * ih2;
    if (j == 0) d(0, 0) = (2.0 - 2.0 * h * bc.a()) * ih2;
    bt.diag.push_back(d);
    if (j + 1 < n) {
      BlockTridiag<double>::Block u(1, 1);
      // ghost-point row 0 carries -2/h^2; the similarity diag(1/sqrt2, 1, ...) balances it
      u(0, 0) = (j == 0) ? -std::sqrt(2.0) * ih2 : -ih2;
      bt.upper.push_back(u);
    }
  }
  return bt;
}

// ---------------------------------------------------------------- Phillips spectral flow

namespace {

// Bottleneck distance between two sorted eigenvalue lists; an unmatched eigenvalue
// costs its distance to the window edge.
double bottleneck(const std::vector<double>& x, const std::vector<double>& y, double W) {
  const size_t n = x.size(), m = y.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> f(n + 1, std::vector<double>(m + 1, inf));
  f[0][0] = 0.0;
  for (size_t i = 0; i <= n; ++i)
    for (size_t j = 0; j <= m; ++j) {
      if (i > 0) f[i][j] = std::min(f[i][j], std::max(f[i - 1][j], W - std::abs(x[i - 1])));
      if (j > 0) f[i][j] = std::min(f[i][j], std::max(f[i][j - 1], W - std::abs(y[j - 1])));
      if (i > 0 && j > 0) f[i][j] = std::min(f[i][j], std::max(f[i - 1][j - 1], std::abs(x[i - 1] - y[j - 1])));
    }
  return f[n][m];
}

int count_abs_le(const std::vector<double>& e, double a) {
  return static_cast<int>(std::count_if(e.begin(), e.end(), [a](double v) { return std::abs(v) <= a; }));
}
int count_in(const std::vector<double>& e, double lo, double hi) {
  return static_cast<int>(std::count_if(e.begin(), e.end(), [=](double v) { return v >= lo && v <= hi; }));
}

// Local bound a for samples [i0, i1]: no sampled eigenvalue within delta of +-a and
// constant rank of the spectral projection onto [-a, a].
std::optional<double> local_bound(const std::vector<FlowSample>& s, int i0, int i1, double delta, double W) {
  std::vector<double> v{0.0, W};
  for (int i = i0; i <= i1; ++i)
    for (double e : s[i].eigs) v.push_back(std::abs(e));
  std::sort(v.begin(), v.end());
  std::vector<std::pair<double, double>> gaps;  // (width, midpoint)
  for (size_t k = 0; k + 1 < v.size(); ++k) {
    const double w = v[k + 1] - v[k];
    if (w > 2.0 * delta && v[k + 1] <= W) gaps.push_back({w, 0.5 * (v[k] + v[k + 1])});
  }
  std::sort(gaps.rbegin(), gaps.rend());
  for (const auto& [w, a] : gaps) {
    if (!(a > 0.0)) continue;
    const int r = count_abs_le(s[i0].eigs, a);
    bool constant = true;
    for (int i = i0 + 1; i <= i1 && constant; ++i) constant = (count_abs_le(s[i].eigs, a) == r);
    if (constant) return a;
  }
  return std::nullopt;
}

}  // namespace

int phillips_spectral_flow(std::vector<FlowSample> s, const PhillipsOptions& opt, const RefineFn& refine) {
  if (s.size() < 2) return 0;
  const double W = opt.window;
  for (auto& x : s) {
    x.eigs.erase(std::remove_if(x.eigs.begin(), x.eigs.end(), [W](double e) { return !(std::abs(e) < W); }),
                 x.eigs.end());
    std::sort(x.eigs.begin(), x.eigs.end());
  }
  std::vector<int> depth(s.size() - 1, 0);
  std::vector<double> gap_delta(s.size() - 1);
  for (size_t k = 0; k + 1 < s.size(); ++k) gap_delta[k] = bottleneck(s[k].eigs, s[k + 1].eigs, W);

  int sf = 0;
  int i0 = 0;
  while (i0 + 1 < static_cast<int>(s.size())) {
    double delta = gap_delta[i0];
    auto a = local_bound(s, i0, i0 + 1, delta, W);
    if (!a) {
      if (!refine || depth[i0] >= opt.max_depth)
        throw PartitionFailure(fmt::format("no admissible local bound on [{}, {}] (depth {})", s[i0].t, s[i0 + 1].t,
                                           depth[i0]));
      FlowSample mid = refine(0.5 * (s[i0].t + s[i0 + 1].t));
      mid.eigs.erase(std::remove_if(mid.eigs.begin(), mid.eigs.end(), [W](double e) { return !(std::abs(e) < W); }),
                     mid.eigs.end());
      std::sort(mid.eigs.begin(), mid.eigs.end());
      const int d = depth[i0] + 1;
      s.insert(s.begin() + i0 + 1, std::move(mid));
      depth[i0] = d;
      depth.insert(depth.begin() + i0 + 1, d);
      gap_delta[i0] = bottleneck(s[i0].eigs, s[i0 + 1].eigs, W);
      gap_delta.insert(gap_delta.begin() + i0 + 1, bottleneck(s[i0 + 1].eigs, s[i0 + 2].eigs, W));
      continue;
    }
    int i1 = i0 + 1;
    while (i1 + 1 < static_cast<int>(s.size())) {
      const double d2 = std::max(delta, gap_delta[i1]);
      auto a2 = local_bound(s, i0, i1 + 1, d2, W);
      if (!a2) break;
      a = a2;
      delta = d2;
      ++i1;
    }
    sf += count_in(s[i1].eigs, 0.0, *a) - count_in(s[i0].eigs, 0.0, *a);
    i0 = i1;
  }
  return sf;
}

int phillips_spectral_flow(const std::vector<Eigen::MatrixXcd>& family, const std::vector<double>& mu, double window) {
  if (family.size() != mu.size()) throw ConfigError("family and fiducial list differ in length");
  std::vector<FlowSample> samples;
  for (size_t i = 0; i < family.size(); ++i) {
    const Eigen::MatrixXcd& m = family[i];
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() != 0.0) throw ConfigError("family member is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    FlowSample fs;
    fs.t = static_cast<double>(i);
    for (int k = 0; k < es.eigenvalues().size(); ++k) fs.eigs.push_back(es.eigenvalues()(k) - mu[i]);
    samples.push_back(std::move(fs));
  }
  PhillipsOptions opt;
  opt.window = window;
  return phillips_spectral_flow(std::move(samples), opt);
}

}  // namespace topoflow::fd
