#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace topoflow {

// Projective boundary parameter (p, q) with a = q/p; a = inf is p = 0.
// Canonical representative: p > 0, or p = 0 and q = 1.
struct BoundaryParam {
  double p = 1.0;
  double q = 0.0;

  static BoundaryParam from_a(double a);
  static BoundaryParam infinity() { return {0.0, 1.0}; }
  // Angle phi in [-pi/2, pi/2] with (p, q) = (cos phi, sin phi); both ends give a = inf.
  static BoundaryParam from_angle(double phi);
  static BoundaryParam from_pair(double p, double q);

  bool is_infinite() const { return p == 0.0; }
  double a() const {
    return p == 0.0 ? std::numeric_limits<double>::infinity() : q / p;
  }
};

// Point (kx, a) of the punctured cylinder; the puncture (0, 0) cannot be built.
class CylinderPoint {
 public:
  CylinderPoint(double kx, BoundaryParam bc);
  CylinderPoint(double kx, double a) : CylinderPoint(kx, BoundaryParam::from_a(a)) {}

  double kx() const { return kx_; }
  const BoundaryParam& bc() const { return bc_; }
  double a() const { return bc_.a(); }

 private:
  double kx_;
  BoundaryParam bc_;
};

}  // namespace topoflow
