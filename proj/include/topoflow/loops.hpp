#pragma once

#include <vector>

#include "topoflow/cylinder.hpp"

namespace topoflow {

enum class Orientation { Positive, Negative };

// Closed loop in the punctured cylinder, traversed by t in [0, 1].
struct LoopSpec {
  enum class Kind { CircleCR, FixedKx, AroundPuncture, Polyline };
  Kind kind = Kind::AroundPuncture;
  double R = 1.0;                     // CircleCR / AroundPuncture radius
  double kx = 1.0;                    // FixedKx
  std::vector<CylinderPoint> points;  // Polyline vertices, first == last, finite a
  int samples = 512;
  Orientation orientation = Orientation::Positive;

  static LoopSpec circle(double R, int samples = 512, Orientation o = Orientation::Positive);
  static LoopSpec around_puncture(int samples = 512, Orientation o = Orientation::Positive);
  static LoopSpec fixed_kx(double kx, int samples = 512, Orientation o = Orientation::Positive);
  static LoopSpec polyline(std::vector<CylinderPoint> pts, int samples = 512);

  void validate() const;  // ConfigError on violation
  LoopSpec reversed() const;

  CylinderPoint point(double t) const;
  // Traversal coordinate: theta for circles (from -pi), the bc angle phi for FixedKx
  // (from -pi/2), t otherwise; it increases along the traversal whatever the orientation.
  double param(double t) const;
  double period() const;
  const char* name() const;
};

}  // namespace topoflow
