#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "topoflow/block_tridiag.hpp"
#include "topoflow/cylinder.hpp"
#include "topoflow/model.hpp"

namespace topoflow::fd {

using model::cmat3;
using model::cplx;
using model::ModelParams;

enum class FarBc { DirichletAll };

struct FdConfig {
  double L = 40.0;
  int n = 4000;
  FarBc far_bc = FarBc::DirichletAll;

  double h() const { return L / n; }
  // throws ConfigError; the decay check uses the slower decaying mode at kx = 0, omega = f/2
  void validate(const ModelParams& p) const;
  void validate_basic() const;  // n and h only (Robin demo has no model)
  // smallest L accepted by validate
  static double min_length(const ModelParams& p);
};

struct PerturbationSpec {
  enum class Kind { None, MatrixPotential };
  Kind kind = Kind::None;
  std::function<cmat3(double)> g;  // Hermitian 3x3 potential as a function of y
  bool real_diagonal = false;       // set when g(y) is a real multiple of the identity
  double scale = 0.0;               // c in c e^{-y} Id, for reporting

  static PerturbationSpec none() { return {}; }
  static PerturbationSpec exponential_identity(double c);
  void validate(const FdConfig& cfg) const;
  // max over grid nodes of the spectral norm of g(y); 0 for None
  double sup_norm(const FdConfig& cfg) const;
};

// Discretized H(kx, a) on [0, L). Unknowns are (eta, u, v) at nodes y_j = j h,
// j = 0..n-1, with v(0) eliminated (and u(0) when p = 0 is not the case but q = 0).
struct FdOperator {
  std::variant<BlockTridiag<double>, BlockTridiag<cplx>> matrix;
  std::vector<int> node_of_dof;
  int n = 0;
  double h = 0.0;
  bool real_basis = true;  // true: v stored as v / i so the matrix is real symmetric

  int dim() const { return static_cast<int>(node_of_dof.size()); }
  int count_below(double sigma) const;
  // Dense matrix in the original (eta, u, v) basis.
  Eigen::MatrixXcd to_dense() const;
};

FdOperator discretize_halfline(const ModelParams& p, const CylinderPoint& pt, const FdConfig& cfg,
                               const PerturbationSpec& pert = PerturbationSpec::none());

struct FdEigen {
  double value = 0.0;
  double near_fraction = 1.0;  // share of L2 mass in [0, L/2]
};

// Eigenvalues of the discretized operator in (lo, hi); near_fraction is computed
// when with_localization is set.
std::vector<FdEigen> fd_eigenvalues(const FdOperator& op, double lo, double hi, bool with_localization,
                                    double tol = 1e-11);

// Eigenvalues of edge modes only: eigenvectors with >= 80% of their mass in [0, L/2].
std::vector<double> fd_edge_eigenvalues(const ModelParams& p, const CylinderPoint& pt, const FdConfig& cfg,
                                        const PerturbationSpec& pert, double lo, double hi);

// -d^2/dx^2 on [0, L) with psi'(0) + a psi(0) = 0 (ghost point, exact symmetrization)
// and Dirichlet at L. a = inf gives Dirichlet at 0.
BlockTridiag<double> discretize_robin(const BoundaryParam& bc, const FdConfig& cfg);

// Windowed spectral flow following Phillips' definition. Each sample holds the
// eigenvalues of F(t) - mu(t) that lie in (-window, window).
struct FlowSample {
  double t = 0.0;
  std::vector<double> eigs;
};
using RefineFn = std::function<FlowSample(double t)>;

struct PhillipsOptions {
  double window = 0.5;
  int max_depth = 12;
};

int phillips_spectral_flow(std::vector<FlowSample> samples, const PhillipsOptions& opt, const RefineFn& refine = {});
// Dense-matrix form: eigenvalues of (M_i - mu_i) restricted to the window.
int phillips_spectral_flow(const std::vector<Eigen::MatrixXcd>& family, const std::vector<double>& mu, double window);

}  // namespace topoflow::fd
