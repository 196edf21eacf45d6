// Scalar-loop reference implementations. Written from the definitions, no
// library code beyond the Image container, so they can check the vectorized
// paths independently.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "superf/burst.hpp"
#include "superf/image.hpp"

namespace oracle {

using superf::Image;

inline Image avg_pool(const Image& img, int s) {
  Image out(img.height() / s, img.width() / s, img.channels());
  for (int i = 0; i < out.height(); ++i)
    for (int j = 0; j < out.width(); ++j)
      for (int c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (int a = 0; a < s; ++a)
          for (int b = 0; b < s; ++b) acc += img.at(i * s + a, j * s + b, c);
        out.at(i, j, c) = acc / (s * s);
      }
  return out;
}

// basis is m rows of (bx, by, b0); returns features[k][n], cos rows first.
inline std::vector<std::vector<double>> encode(const std::vector<double>& xs,
                                               const std::vector<double>& ys,
                                               const std::vector<std::vector<double>>& basis) {
  const std::size_t m = basis.size();
  std::vector<std::vector<double>> f(2 * m, std::vector<double>(xs.size()));
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t n = 0; n < xs.size(); ++n) {
      const double arg =
          2.0 * std::numbers::pi * (basis[k][0] * xs[n] + basis[k][1] * ys[n] + basis[k][2]);
      f[k][n] = std::cos(arg);
      f[m + k][n] = std::sin(arg);
    }
  }
  return f;
}

// Mask value 1 excludes the pixel.
inline double mse(const Image& pred, const Image& target, const superf::Mask* mask = nullptr) {
  double acc = 0.0;
  long count = 0;
  for (int i = 0; i < pred.height(); ++i)
    for (int j = 0; j < pred.width(); ++j) {
      if (mask && mask->at(i, j)) continue;
      for (int c = 0; c < pred.channels(); ++c) {
        const double d = pred.at(i, j, c) - target.at(i, j, c);
        acc += d * d;
        ++count;
      }
    }
  return count ? acc / count : 0.0;
}

inline double gnll(const Image& pred, const Image& log_var, const Image& target,
                   const superf::Mask* mask = nullptr) {
  double acc = 0.0;
  long count = 0;
  for (int i = 0; i < pred.height(); ++i)
    for (int j = 0; j < pred.width(); ++j) {
      if (mask && mask->at(i, j)) continue;
      for (int c = 0; c < pred.channels(); ++c) {
        const double s = log_var.at(i, j, c);
        const double r = pred.at(i, j, c) - target.at(i, j, c);
        acc += 0.5 * (s + r * r / std::exp(s));
        ++count;
      }
    }
  return count ? acc / count : 0.0;
}

inline double psnr(const Image& a, const Image& b) {
  double acc = 0.0;
  long n = 0;
  for (int i = 0; i < a.height(); ++i)
    for (int j = 0; j < a.width(); ++j)
      for (int c = 0; c < a.channels(); ++c) {
        const double d = a.at(i, j, c) - b.at(i, j, c);
        acc += d * d;
        ++n;
      }
  return -10.0 * std::log10(acc / n);
}

// Closed-form simple regression per channel.
inline Image color_match(const Image& pred, const Image& ref) {
  Image out = pred;
  const double n = static_cast<double>(pred.height()) * pred.width();
  for (int c = 0; c < pred.channels(); ++c) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < pred.height(); ++i)
      for (int j = 0; j < pred.width(); ++j) {
        const double x = pred.at(i, j, c), y = ref.at(i, j, c);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
    const double denom = n * sxx - sx * sx;
    const double a = (n * sxy - sx * sy) / denom;
    const double b = (sy - a * sx) / n;
    for (int i = 0; i < pred.height(); ++i)
      for (int j = 0; j < pred.width(); ++j) out.at(i, j, c) = a * pred.at(i, j, c) + b;
  }
  return out;
}

inline double alignment_error(const std::vector<superf::FrameTransform>& est,
                              const std::vector<superf::FrameTransform>& truth) {
  if (est.size() < 2) return 0.0;
  double acc = 0.0;
  for (std::size_t t = 1; t < est.size(); ++t) {
    const double ex = est[t].dx - truth[t].dx, ey = est[t].dy - truth[t].dy;
    acc += std::sqrt(ex * ex + ey * ey);
  }
  return acc / static_cast<double>(est.size() - 1);
}

// Copy of the pixel values; safe to iterate over a temporary image.
inline std::vector<double> values(const Image& img) { return img.storage(); }

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.storage()[k] - b.storage()[k]));
  return m;
}

}  // namespace oracle
