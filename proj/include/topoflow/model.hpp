#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

#include "topoflow/cylinder.hpp"

namespace topoflow::model {

using cplx = std::complex<double>;
using cvec3 = Eigen::Vector3cd;
using cmat3 = Eigen::Matrix3cd;

class ModelParams {
 public:
  // throws ConfigError unless f > 0, nu > 0 and 1 - 4 f nu > 0
  ModelParams(double f, double nu);
  double f() const { return f_; }
  double nu() const { return nu_; }

 private:
  double f_, nu_;
};

enum class Chart { FinitePlane, InfinityChart };

// InfinityChart stores w = 1/z as (kx/k^2, -ky/k^2); it never holds k = 0.
struct BulkMomentum {
  double kx = 0.0;
  double ky = 0.0;
  Chart chart = Chart::FinitePlane;

  static BulkMomentum finite(double kx, double ky) { return {kx, ky, Chart::FinitePlane}; }
  static BulkMomentum from_finite_to_infinity(double kx, double ky);
  // Only valid away from w = 0 (the point at infinity).
  BulkMomentum to_finite() const;
  bool is_infinity_point() const { return chart == Chart::InfinityChart && kx == 0.0 && ky == 0.0; }
};

enum class BandIndex { Minus, Zero, Plus };

struct Bands {
  double minus, zero, plus;
};

cmat3 bulk_hamiltonian(const ModelParams& p, const BulkMomentum& k);
// Analytic continuation in ky: k^2 = kx^2 + ky^2 without conjugation, so the result is
// Hermitian only for real ky.
cmat3 bulk_hamiltonian(const ModelParams& p, double kx, cplx ky);

// At the infinity point the +- bands are reported as +-inf.
Bands bulk_bands(const ModelParams& p, const BulkMomentum& k);
double omega_plus(const ModelParams& p, double kx, double ky);

// Eigenvector of H(kx, ky) for the caller-supplied omega, ky possibly complex.
cvec3 section_inf(const ModelParams& p, double omega, double kx, cplx ky);
// t * section_inf with t = (conj z - conj zeta)/(z - zeta); ky must be real.
cvec3 section_zeta(const ModelParams& p, double omega, double kx, cplx ky, cplx zeta);
cplx transition_zeta(double kx, double ky, cplx zeta);

int chern_number(const ModelParams& p, BandIndex band, int grid_n);

cplx beta_map(const CylinderPoint& pt);

enum class DeficiencyVector { OnePlus, OneMinus, TwoPlus, TwoMinus };

struct YGrid {
  double Y = 10.0;  // length of [0, Y] in the physical variable y
  double h = 1e-3;
};

// Closed-form deficiency vector in the scaled variable yt = y / (2 nu).
cvec3 deficiency_vector(DeficiencyVector which, double yt);
// d/dyt of the closed form, used for boundary checks
cvec3 deficiency_vector_derivative(DeficiencyVector which, double yt);
double deficiency_residual(const ModelParams& p, DeficiencyVector which, const YGrid& grid);
double characteristic_quartic(const ModelParams& p, double lambda);

}  // namespace topoflow::model
