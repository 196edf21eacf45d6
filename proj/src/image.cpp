#include "superf/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace superf {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw DimensionError("image dimensions must be positive, got " +
                         std::to_string(height) + "x" + std::to_string(width) +
                         "x" + std::to_string(channels));
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image::Image(int height, int width, int channels, std::vector<double> data)
    : Image(height, width, channels) {
  if (data.size() != data_.size()) {
    throw DimensionError("image data length " + std::to_string(data.size()) +
                         " does not match " + std::to_string(data_.size()));
  }
  data_ = std::move(data);
}

Image Image::clamped() const {
  Image out = *this;
  for (double& v : out.data_) v = std::clamp(v, 0.0, 1.0);
  return out;
}

CoordGrid make_grid(int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw DimensionError("grid dimensions must be positive");
  CoordGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.points.reserve(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    const double y = (i + 0.5) / rows;
    for (int j = 0; j < cols; ++j) {
      grid.points.push_back({(j + 0.5) / cols, y});
    }
  }
  return grid;
}

Image avg_pool(const Image& img, int s) {
  if (s <= 0) throw DimensionError("pool factor must be positive");
  if (img.height() % s != 0 || img.width() % s != 0) {
    throw DimensionError("avg_pool: " + std::to_string(img.height()) + "x" +
                         std::to_string(img.width()) + " not divisible by " +
                         std::to_string(s));
  }
  const int oh = img.height() / s;
  const int ow = img.width() / s;
  const int nc = img.channels();
  Image out(oh, ow, nc);
  const double inv = 1.0 / (static_cast<double>(s) * s);
  for (int i = 0; i < oh; ++i) {
    for (int j = 0; j < ow; ++j) {
      for (int c = 0; c < nc; ++c) {
        double acc = 0.0;
        for (int di = 0; di < s; ++di) {
          for (int dj = 0; dj < s; ++dj) acc += img.at(i * s + di, j * s + dj, c);
        }
        out.at(i, j, c) = acc * inv;
      }
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
  }
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= total;
  return taps;
}

Image gaussian_blur(const Image& img, double sigma) {
  const std::vector<double> taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int h = img.height();
  const int w = img.width();
  const int nc = img.channels();

  Image tmp(h, w, nc);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < nc; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int jj = std::clamp(j + k, 0, w - 1);
          acc += taps[k + radius] * img.at(i, jj, c);
        }
        tmp.at(i, j, c) = acc;
      }
    }
  }
  Image out(h, w, nc);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < nc; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int ii = std::clamp(i + k, 0, h - 1);
          acc += taps[k + radius] * tmp.at(ii, j, c);
        }
        out.at(i, j, c) = acc;
      }
    }
  }
  return out;
}

double bilinear_at(const Image& img, double x, double y, int ch) {
  // Continuous pixel position; pixel centers sit at integer positions.
  const double px = std::clamp(x * img.width() - 0.5, 0.0, img.width() - 1.0);
  const double py = std::clamp(y * img.height() - 0.5, 0.0, img.height() - 1.0);
  const int j0 = static_cast<int>(std::floor(px));
  const int i0 = static_cast<int>(std::floor(py));
  const int j1 = std::min(j0 + 1, img.width() - 1);
  const int i1 = std::min(i0 + 1, img.height() - 1);
  const double fx = px - j0;
  const double fy = py - i0;
  const double top = (1.0 - fx) * img.at(i0, j0, ch) + fx * img.at(i0, j1, ch);
  const double bottom = (1.0 - fx) * img.at(i1, j0, ch) + fx * img.at(i1, j1, ch);
  return (1.0 - fy) * top + fy * bottom;
}

Image bilinear_sample(const Image& img, const CoordGrid& coords) {
  Image out(coords.rows, coords.cols, img.channels());
  for (int i = 0; i < coords.rows; ++i) {
    for (int j = 0; j < coords.cols; ++j) {
      const Coord& p = coords.points[static_cast<std::size_t>(i) * coords.cols + j];
      for (int c = 0; c < img.channels(); ++c) out.at(i, j, c) = bilinear_at(img, p.x, p.y, c);
    }
  }
  return out;
}

Image bilinear_upsample(const Image& img, int s) {
  if (s <= 0) throw DimensionError("upsample factor must be positive");
  if (s == 1) return img;
  return bilinear_sample(img, make_grid(img.height() * s, img.width() * s));
}

Image crop(const Image& img, int top, int left, int h, int w) {
  if (top < 0 || left < 0 || h <= 0 || w <= 0 || top + h > img.height() ||
      left + w > img.width()) {
    throw DimensionError("crop window outside image");
  }
  Image out(h, w, img.channels());
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      for (int c = 0; c < img.channels(); ++c) out.at(i, j, c) = img.at(top + i, left + j, c);
    }
  }
  return out;
}

double mean_value(const Image& img) {
  if (img.empty()) return 0.0;
  return std::accumulate(img.data().begin(), img.data().end(), 0.0) /
         static_cast<double>(img.size());
}

}  // namespace superf
