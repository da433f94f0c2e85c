#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <type_traits>
#include <vector>

namespace topoflow::fd {

template <class Scalar>
struct EigenPair {
  double value = 0.0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vector;  // unit norm; empty if not requested
};

// Hermitian block-tridiagonal matrix with blocks of size <= 3. Eigenvalue counts use a
// block LDL^H factorization and Sylvester's law of inertia.
template <class Scalar>
class BlockTridiag {
 public:
  using Block = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  std::vector<Block> diag;   // diag[j] : s_j x s_j
  std::vector<Block> upper;  // upper[j] : s_j x s_{j+1}, couples block j to j+1

  int blocks() const { return static_cast<int>(diag.size()); }
  int dim() const {
    int d = 0;
    for (const auto& b : diag) d += static_cast<int>(b.rows());
    return d;
  }
  std::vector<int> offsets() const {
    std::vector<int> o(diag.size() + 1, 0);
    for (size_t j = 0; j < diag.size(); ++j) o[j + 1] = o[j] + static_cast<int>(diag[j].rows());
    return o;
  }

  Dense to_dense() const {
    const auto o = offsets();
    Dense m = Dense::Zero(o.back(), o.back());
    for (int j = 0; j < blocks(); ++j) {
      m.block(o[j], o[j], diag[j].rows(), diag[j].cols()) = diag[j];
      if (j + 1 < blocks()) {
        m.block(o[j], o[j + 1], upper[j].rows(), upper[j].cols()) = upper[j];
        m.block(o[j + 1], o[j], upper[j].cols(), upper[j].rows()) = upper[j].adjoint();
      }
    }
    return m;
  }

  Vec multiply(const Vec& x) const {
    const auto o = offsets();
    Vec y = Vec::Zero(x.size());
    for (int j = 0; j < blocks(); ++j) {
      const int s = static_cast<int>(diag[j].rows());
      y.segment(o[j], s) += diag[j] * x.segment(o[j], s);
      if (j + 1 < blocks()) {
        const int t = static_cast<int>(diag[j + 1].rows());
        y.segment(o[j], s) += upper[j] * x.segment(o[j + 1], t);
        y.segment(o[j + 1], t) += upper[j].adjoint() * x.segment(o[j], s);
      }
    }
    return y;
  }

  // Number of eigenvalues strictly below sigma.
  int count_below(double sigma) const {
    int neg = 0;
    Block dinv;
    for (int j = 0; j < blocks(); ++j) {
      Block d = diag[j];
      d.diagonal().array() -= Scalar(sigma);
      if (j > 0) d.noalias() -= upper[j - 1].adjoint() * dinv * upper[j - 1];
      neg += invert_with_inertia(d, dinv);
    }
    return neg;
  }

  // LU factorization of A - sigma with partial pivoting; the unpivoted LDL^H used for
  // counting is not stable enough for solves on indefinite matrices.
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
  using Lu = Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>>;

  void factor_shifted(double sigma, Lu& lu) const {
    const auto o = offsets();
    std::vector<Eigen::Triplet<Scalar>> t;
    for (int j = 0; j < blocks(); ++j) {
      for (int a = 0; a < diag[j].rows(); ++a)
        for (int b = 0; b < diag[j].cols(); ++b) {
          Scalar v = diag[j](a, b);
          if (a == b) v -= Scalar(sigma);
          t.emplace_back(o[j] + a, o[j] + b, v);
        }
      if (j + 1 < blocks())
        for (int a = 0; a < upper[j].rows(); ++a)
          for (int b = 0; b < upper[j].cols(); ++b) {
            t.emplace_back(o[j] + a, o[j + 1] + b, upper[j](a, b));
            t.emplace_back(o[j + 1] + b, o[j] + a, conj_of(upper[j](a, b)));
          }
    }
    Sparse m(dim(), dim());
    m.setFromTriplets(t.begin(), t.end());
    lu.compute(m);
  }

  // Eigenvalues in (lo, hi), with multiplicity. Bisection isolates each eigenvalue;
  // isolated ones are polished by shifted inverse iteration and a Rayleigh quotient.
  std::vector<EigenPair<Scalar>> eigenpairs_in(double lo, double hi, double tol, bool want_vectors) const {
    std::vector<EigenPair<Scalar>> out;
    struct Iv {
      double a, b;
      int ca, cb;
    };
    std::vector<Iv> stack{{lo, hi, count_below(lo), count_below(hi)}};
    std::vector<Iv> done;
    while (!stack.empty()) {
      Iv iv = stack.back();
      stack.pop_back();
      const int m = iv.cb - iv.ca;
      if (m <= 0) continue;
      const double w = iv.b - iv.a;
      const double polish_width = 1e-6 * std::max(1.0, std::abs(iv.a));
      if ((m == 1 && w <= polish_width) || w <= tol) {
        done.push_back(iv);
        continue;
      }
      const double mid = 0.5 * (iv.a + iv.b);
      const int cm = count_below(mid);
      stack.push_back({mid, iv.b, cm, iv.cb});
      stack.push_back({iv.a, mid, iv.ca, cm});
    }
    std::sort(done.begin(), done.end(), [](const Iv& x, const Iv& y) { return x.a < y.a; });
    std::mt19937 rng(12345);
    for (auto& iv : done) {
      const int m = iv.cb - iv.ca;
      if (m == 1) {
        auto pr = polish(iv.a, iv.b, tol, rng);
        if (!want_vectors) pr.vector.resize(0);
        out.push_back(std::move(pr));
      } else {
        for (int k = 0; k < m; ++k) {
          EigenPair<Scalar> pr;
          pr.value = 0.5 * (iv.a + iv.b);
          if (want_vectors) pr.vector = inverse_iteration(pr.value + 1e-3 * tol, rng, 3);
          out.push_back(std::move(pr));
        }
      }
    }
    return out;
  }

 private:
  // Inverts a small Hermitian block through its eigen-decomposition and returns the
  // number of negative eigenvalues.
  static int invert_with_inertia(const Block& d, Block& dinv) {
    const int s = static_cast<int>(d.rows());
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    const double tiny = 1e-300 + 1e-15 * scale;
    int neg = 0;
    dinv.resize(s, s);
    auto finish = [&](const auto& evals, const auto& evecs) {
      Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1> inv(s);
      for (int k = 0; k < s; ++k) {
        double l = evals(k);
        if (l < 0.0) ++neg;
        if (std::abs(l) < tiny) l = (l < 0.0) ? -tiny : tiny;
        inv(k) = 1.0 / l;
      }
      dinv = evecs * inv.asDiagonal() * evecs.adjoint();
    };
    if (s == 1) {
      double l = std::real(d(0, 0));
      if (l < 0.0) ++neg;
      if (std::abs(l) < tiny) l = (l < 0.0) ? -tiny : tiny;
      dinv(0, 0) = Scalar(1.0 / l);
      return neg;
    }
    if constexpr (std::is_same_v<Scalar, double>) {
      if (s == 3) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
        es.compute(Eigen::Matrix3d(d));
        finish(es.eigenvalues(), es.eigenvectors());
        return neg;
      }
      if (s == 2) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
        es.compute(Eigen::Matrix2d(d));
        finish(es.eigenvalues(), es.eigenvectors());
        return neg;
      }
    }
    Eigen::SelfAdjointEigenSolver<Block> es(d);
    finish(es.eigenvalues(), es.eigenvectors());
    return neg;
  }

  static Scalar conj_of(const Scalar& x) {
    if constexpr (std::is_same_v<Scalar, double>) return x;
    else return std::conj(x);
  }

  Vec inverse_iteration(double shift, std::mt19937& rng, int iters) const {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec x(dim());
    for (int i = 0; i < x.size(); ++i) x(i) = Scalar(g(rng));
    x.normalize();
    Lu lu;
    factor_shifted(shift, lu);
    if (lu.info() != Eigen::Success) return x;
    for (int k = 0; k < iters; ++k) {
      x = lu.solve(x);
      const double nrm = x.norm();
      if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
      x /= nrm;
    }
    return x;
  }

  EigenPair<Scalar> polish(double a, double b, double tol, std::mt19937& rng) const {
    EigenPair<Scalar> pr;
    const double shift = 0.5 * (a + b);
    pr.vector = inverse_iteration(shift, rng, 3);
    const double rq = std::real(pr.vector.dot(multiply(pr.vector)));
    if (rq > a && rq < b) {
      pr.value = rq;
      return pr;
    }
    // fall back to plain bisection
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      if (count_below(mid) > count_below(a)) b = mid;
      else a = mid;
    }
    pr.value = 0.5 * (a + b);
    return pr;
  }
};

}  // namespace topoflow::fd
