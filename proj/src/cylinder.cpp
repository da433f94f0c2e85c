#include "topoflow/cylinder.hpp"

#include <fmt/format.h>

#include "topoflow/errors.hpp"

namespace topoflow {

BoundaryParam BoundaryParam::from_pair(double p, double q) {
  const double n = std::hypot(p, q);
  if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("boundary pair (p, q) must be finite and nonzero");
  p /= n;
  q /= n;
  if (p < 0.0 || (p == 0.0 && q < 0.0)) {
    p = -p;
    q = -q;
  }
  if (p == 0.0) q = 1.0;
  return {p, q};
}

BoundaryParam BoundaryParam::from_a(double a) {
  if (std::isinf(a)) return infinity();
  if (std::isnan(a)) throw ConfigError("boundary parameter a is NaN");
  return from_pair(1.0, a);
}

BoundaryParam BoundaryParam::from_angle(double phi) {
  // cos(+-pi/2) is not exactly zero in floating point
  if (std::abs(std::abs(phi) - M_PI / 2) < 1e-15) return infinity();
  return from_pair(std::cos(phi), std::sin(phi));
}

CylinderPoint::CylinderPoint(double kx, BoundaryParam bc)
    : kx_(kx), bc_(BoundaryParam::from_pair(bc.p, bc.q)) {
  if (!std::isfinite(kx)) throw ConfigError("kx must be finite");
  if (kx == 0.0 && bc_.q == 0.0)
    throw PunctureError(fmt::format("(kx, a) = (0, 0) is the puncture of the parameter cylinder"));
}

}  // namespace topoflow
