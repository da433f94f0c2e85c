#include "topoflow/loops.hpp"

#include <fmt/format.h>

#include <cmath>

#include "topoflow/errors.hpp"

namespace topoflow {

LoopSpec LoopSpec::circle(double R, int samples, Orientation o) {
  LoopSpec l;
  l.kind = Kind::CircleCR;
  l.R = R;
  l.samples = samples;
  l.orientation = o;
  return l;
}

LoopSpec LoopSpec::around_puncture(int samples, Orientation o) {
  LoopSpec l = circle(1.0, samples, o);
  l.kind = Kind::AroundPuncture;
  return l;
}

LoopSpec LoopSpec::fixed_kx(double kx, int samples, Orientation o) {
  LoopSpec l;
  l.kind = Kind::FixedKx;
  l.kx = kx;
  l.samples = samples;
  l.orientation = o;
  return l;
}

LoopSpec LoopSpec::polyline(std::vector<CylinderPoint> pts, int samples) {
  LoopSpec l;
  l.kind = Kind::Polyline;
  l.points = std::move(pts);
  l.samples = samples;
  return l;
}

LoopSpec LoopSpec::reversed() const {
  LoopSpec l = *this;
  l.orientation = orientation == Orientation::Positive ? Orientation::Negative : Orientation::Positive;
  return l;
}

double LoopSpec::period() const {
  switch (kind) {
    case Kind::CircleCR:
    case Kind::AroundPuncture: return 2.0 * M_PI;
    case Kind::FixedKx: return M_PI;
    case Kind::Polyline: return 1.0;
  }
  return 1.0;
}

double LoopSpec::param(double t) const {
  switch (kind) {
    case Kind::CircleCR:
    case Kind::AroundPuncture: return -M_PI + 2.0 * M_PI * t;
    case Kind::FixedKx: return -M_PI / 2 + M_PI * t;
    case Kind::Polyline: return t;
  }
  return t;
}

const char* LoopSpec::name() const {
  switch (kind) {
    case Kind::CircleCR: return "circle";
    case Kind::AroundPuncture: return "around_puncture";
    case Kind::FixedKx: return "fixed_kx";
    case Kind::Polyline: return "polyline";
  }
  return "?";
}

CylinderPoint LoopSpec::point(double t) const {
  const double s = orientation == Orientation::Positive ? t : 1.0 - t;
  switch (kind) {
    case Kind::CircleCR:
    case Kind::AroundPuncture: {
      const double th = -M_PI + 2.0 * M_PI * s;
      double kx = R * std::cos(th);
      if (std::abs(kx) < 1e-15 * R) kx = 0.0;
      return CylinderPoint(kx, BoundaryParam::from_pair(1.0, R * std::sin(th)));
    }
    case Kind::FixedKx: return CylinderPoint(kx, BoundaryParam::from_angle(-M_PI / 2 + M_PI * s));
    case Kind::Polyline: {
      const int segs = static_cast<int>(points.size()) - 1;
      const double x = s * segs;
      const int i = std::min(segs - 1, static_cast<int>(std::floor(x)));
      const double u = x - i;
      const auto& a = points[i];
      const auto& b = points[i + 1];
      return CylinderPoint((1 - u) * a.kx() + u * b.kx(), (1 - u) * a.a() + u * b.a());
    }
  }
  throw ConfigError("unknown loop kind");
}

void LoopSpec::validate() const {
  if (samples < 64) throw ConfigError(fmt::format("loop needs at least 64 samples (got {})", samples));
  switch (kind) {
    case Kind::CircleCR:
    case Kind::AroundPuncture:
      if (!(R >= 1e-6)) throw ConfigError("circle loop must stay 1e-6 away from the puncture");
      break;
    case Kind::FixedKx:
      if (!(std::abs(kx) >= 1e-6)) throw ConfigError("fixed-kx loop must stay 1e-6 away from the puncture");
      break;
    case Kind::Polyline: {
      if (points.size() < 3) throw ConfigError("polyline loop needs at least 3 vertices");
      const auto& f = points.front();
      const auto& l = points.back();
      if (f.kx() != l.kx() || f.a() != l.a()) throw ConfigError("polyline loop is not closed");
      for (const auto& p : points)
        if (!std::isfinite(p.a())) throw ConfigError("polyline vertices need finite a");
      for (int k = 0; k <= 16 * samples; ++k) {
        const auto p = point(static_cast<double>(k) / (16 * samples));
        if (std::hypot(p.kx(), p.a()) < 1e-6) throw ConfigError("polyline loop passes within 1e-6 of the puncture");
      }
      break;
    }
  }
}

}  // namespace topoflow
