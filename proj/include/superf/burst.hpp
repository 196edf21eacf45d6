#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "superf/image.hpp"
#include "superf/rng.hpp"

namespace superf {

/// Ground-truth misalignment of one frame relative to the base frame.
/// Frame pixel v observes the scene at affine_matrix(dx/W_lr, dy/H_lr, alpha) v.
struct FrameTransform {
  double dx = 0.0;     // LR pixels
  double dy = 0.0;     // LR pixels
  double alpha = 0.0;  // degrees, counterclockwise about the image center

  bool is_identity() const { return dx == 0.0 && dy == 0.0 && alpha == 0.0; }
};

struct BurstSpec {
  int num_frames = 16;
  int scale = 4;
  double max_shift = 1.0;      // LR pixels
  double max_rotation = 0.5;   // degrees
  double noise_sigma = 0.01;
  std::pair<double, double> spectral_scale_range{0.95, 1.05};
  std::pair<double, double> spectral_shift_range{-0.02, 0.02};
  double occlusion_prob = 0.0;
  double occlusion_max_frac = 0.2;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;
};

/// Boolean LR-resolution mask, row-major; 1 marks occluded pixels.
struct Mask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> values;

  Mask() = default;
  Mask(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0) {}
  std::uint8_t at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  std::size_t count() const;
};

struct Rect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
};

/// Everything sampled while synthesizing one frame.
struct FrameRecord {
  std::vector<double> spectral_scale;
  std::vector<double> spectral_shift;
  std::optional<Rect> occlusion;
};

struct Burst {
  std::vector<Image> frames;
  std::vector<FrameTransform> truths;
  std::optional<std::vector<Mask>> masks;
  std::vector<FrameRecord> records;
  int scale = 1;

  int num_frames() const { return static_cast<int>(frames.size()); }
  int lr_height() const { return frames.front().height(); }
  int lr_width() const { return frames.front().width(); }
  int channels() const { return frames.front().channels(); }

  /// First `count` frames (and their metadata).
  Burst prefix(int count) const;
  void validate() const;
};

std::vector<FrameTransform> sample_transforms(const BurstSpec& spec, Rng& rng);

struct SynthesizedFrame {
  Image frame;
  Mask mask;
  FrameRecord record;
};

/// Warp, blur, pool, spectral augmentation, noise and occlusion for one frame.
/// `frame_index` 0 is the base frame: no augmentation and never occluded.
SynthesizedFrame synthesize_frame(const Image& hr, const FrameTransform& t,
                                  const BurstSpec& spec, Rng& rng, int frame_index);

Burst synthesize_burst(const Image& hr, const BurstSpec& spec);

/// Warp only: returns hr sampled at the frame's transformed HR grid.
Image warp_to_frame(const Image& hr, const FrameTransform& t, int scale);

}  // namespace superf
