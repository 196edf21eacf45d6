#pragma once

#include <Eigen/Core>

namespace superf {

/// Rotation by `alpha` radians about the domain center (0.5, 0.5), followed by
/// a translation (dx, dy) in normalized units. Acts on column vectors (x, y, 1).
Eigen::Matrix3d affine_matrix(double dx, double dy, double alpha);

inline Eigen::Vector2d apply_affine(const Eigen::Matrix3d& m, double x, double y) {
  return {m(0, 0) * x + m(0, 1) * y + m(0, 2), m(1, 0) * x + m(1, 1) * y + m(1, 2)};
}

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace superf
