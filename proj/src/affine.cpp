#include "superf/affine.hpp"

#include <cmath>
#include <numbers>

namespace superf {

Eigen::Matrix3d affine_matrix(double dx, double dy, double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  // u = R (v - center) + center + delta
  Eigen::Matrix3d m;
  m << c, -s, 0.5 - 0.5 * c + 0.5 * s + dx,
       s, c, 0.5 - 0.5 * s - 0.5 * c + dy,
       0.0, 0.0, 1.0;
  return m;
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace superf
