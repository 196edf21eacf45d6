#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace superf {

/// Thrown for shape/size contract violations across the library.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense raster image of doubles.
///
/// Storage is row-major with interleaved channels: the value of channel c at
/// row i, column j lives at data[(i * width + j) * channels + c]. This is the
/// same memory layout as a column-major (channels x pixels) matrix, which the
/// model code relies on when mapping images onto Eigen.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);
  Image(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int row, int col, int ch) {
    return data_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + ch];
  }
  double at(int row, int col, int ch) const {
    return data_[(static_cast<std::size_t>(row) * width_ + col) * channels_ + ch];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  /// Copy with every value clamped to [0,1].
  Image clamped() const;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

/// Homogeneous point (x, y, 1) in the unit square.
struct Coord {
  double x = 0.0;
  double y = 0.0;
};

/// Pixel-center grid over [0,1)^2. Point (i, j) is
/// x = (j + 0.5) / cols, y = (i + 0.5) / rows, stored row-major.
/// The homogeneous third component is implicitly 1.
struct CoordGrid {
  int rows = 0;
  int cols = 0;
  std::vector<Coord> points;

  std::size_t size() const { return points.size(); }
};

CoordGrid make_grid(int rows, int cols);

/// s x s block means. Throws DimensionError when s does not divide H and W.
Image avg_pool(const Image& img, int s);

/// Normalized 1-D Gaussian taps for the given sigma, radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with edge-replicated borders.
Image gaussian_blur(const Image& img, double sigma);

/// Bilinear interpolation of img at continuous coordinates (pixel-center
/// convention). Coordinates outside the sampling domain are clamped to it.
Image bilinear_sample(const Image& img, const CoordGrid& coords);

/// Single-point bilinear lookup, one channel.
double bilinear_at(const Image& img, double x, double y, int ch);

/// bilinear_sample at the (H*s) x (W*s) pixel-center grid.
Image bilinear_upsample(const Image& img, int s);

/// Central sub-image [top, top+h) x [left, left+w).
Image crop(const Image& img, int top, int left, int h, int w);

double mean_value(const Image& img);

}  // namespace superf
