#include "superf/burst.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "superf/affine.hpp"

namespace superf {
namespace {

constexpr double kOcclusionGray = 0.7;

void check_range(const std::pair<double, double>& r, const char* name) {
  if (!(r.first <= r.second)) {
    throw std::invalid_argument(std::string("burst spec: ") + name + " range is not ordered");
  }
}

Rect sample_rect(int rows, int cols, double max_frac, Rng& rng) {
  const double area = static_cast<double>(rows) * cols;
  const double budget = max_frac * area;
  const double frac = rng.uniform(0.25, 1.0);
  const double aspect = rng.uniform(0.5, 2.0);
  int w = std::clamp(static_cast<int>(std::floor(std::sqrt(frac * budget * aspect))), 1, cols);
  int h = std::clamp(static_cast<int>(std::floor(std::sqrt(frac * budget / aspect))), 1, rows);
  while (static_cast<double>(w) * h > budget && (w > 1 || h > 1)) {
    if (w >= h) --w; else --h;
  }
  Rect r;
  r.width = w;
  r.height = h;
  r.top = static_cast<int>(rng.below(static_cast<std::uint64_t>(rows - h + 1)));
  r.left = static_cast<int>(rng.below(static_cast<std::uint64_t>(cols - w + 1)));
  return r;
}

}  // namespace

void BurstSpec::validate() const {
  if (num_frames < 1) throw std::invalid_argument("burst spec: num_frames must be >= 1");
  if (scale < 1) throw std::invalid_argument("burst spec: scale must be >= 1");
  if (max_shift < 0.0 || max_rotation < 0.0 || noise_sigma < 0.0) {
    throw std::invalid_argument("burst spec: shift, rotation and noise must be non-negative");
  }
  check_range(spectral_scale_range, "spectral_scale");
  check_range(spectral_shift_range, "spectral_shift");
  if (occlusion_prob < 0.0 || occlusion_prob > 1.0 || occlusion_max_frac < 0.0 ||
      occlusion_max_frac > 1.0) {
    throw std::invalid_argument("burst spec: occlusion parameters must lie in [0,1]");
  }
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), 1));
}

Burst Burst::prefix(int count) const {
  if (count < 1 || count > num_frames()) {
    throw std::invalid_argument("burst prefix: count out of range");
  }
  Burst out;
  out.scale = scale;
  out.frames.assign(frames.begin(), frames.begin() + count);
  out.truths.assign(truths.begin(), truths.begin() + count);
  if (!records.empty()) out.records.assign(records.begin(), records.begin() + count);
  if (masks) out.masks = std::vector<Mask>(masks->begin(), masks->begin() + count);
  return out;
}

void Burst::validate() const {
  if (frames.empty()) throw DimensionError("burst has no frames");
  for (const Image& f : frames) {
    if (!f.same_shape(frames.front())) throw DimensionError("burst frames differ in shape");
  }
  if (truths.size() != frames.size()) throw DimensionError("burst truth count mismatch");
  if (masks && masks->size() != frames.size()) throw DimensionError("burst mask count mismatch");
  if (scale < 1) throw DimensionError("burst scale must be >= 1");
}

std::vector<FrameTransform> sample_transforms(const BurstSpec& spec, Rng& rng) {
  std::vector<FrameTransform> out(spec.num_frames);
  for (int t = 1; t < spec.num_frames; ++t) {
    out[t].dx = rng.uniform(-spec.max_shift, spec.max_shift);
    out[t].dy = rng.uniform(-spec.max_shift, spec.max_shift);
    out[t].alpha = rng.uniform(-spec.max_rotation, spec.max_rotation);
  }
  return out;
}

Image warp_to_frame(const Image& hr, const FrameTransform& t, int scale) {
  if (t.is_identity()) return hr;
  const int lr_h = hr.height() / scale;
  const int lr_w = hr.width() / scale;
  const Eigen::Matrix3d a = affine_matrix(t.dx / lr_w, t.dy / lr_h, deg_to_rad(t.alpha));
  CoordGrid grid = make_grid(hr.height(), hr.width());
  for (Coord& p : grid.points) {
    const Eigen::Vector2d u = apply_affine(a, p.x, p.y);
    p.x = u.x();
    p.y = u.y();
  }
  return bilinear_sample(hr, grid);
}

SynthesizedFrame synthesize_frame(const Image& hr, const FrameTransform& t,
                                  const BurstSpec& spec, Rng& rng, int frame_index) {
  if (hr.height() % spec.scale != 0 || hr.width() % spec.scale != 0) {
    throw DimensionError("synthesize_frame: HR size not divisible by scale");
  }
  const int s = spec.scale;
  const Image warped = warp_to_frame(hr, t, s);
  const Image blurred = gaussian_blur(warped, 1.0 / s);
  Image frame = avg_pool(blurred, s);

  SynthesizedFrame out;
  const int nc = frame.channels();
  out.record.spectral_scale.assign(nc, 1.0);
  out.record.spectral_shift.assign(nc, 0.0);
  const bool base = frame_index == 0;
  if (!base) {
    for (int c = 0; c < nc; ++c) {
      out.record.spectral_scale[c] =
          rng.uniform(spec.spectral_scale_range.first, spec.spectral_scale_range.second);
      out.record.spectral_shift[c] =
          rng.uniform(spec.spectral_shift_range.first, spec.spectral_shift_range.second);
    }
  }
  auto& data = frame.storage();
  for (std::size_t k = 0; k < data.size(); ++k) {
    const int c = static_cast<int>(k % nc);
    data[k] = out.record.spectral_scale[c] * data[k] + out.record.spectral_shift[c];
  }
  if (spec.noise_sigma > 0.0) {
    for (double& v : data) v += spec.noise_sigma * rng.normal();
  }

  out.mask = Mask(frame.height(), frame.width());
  if (!base && spec.occlusion_prob > 0.0 && spec.occlusion_max_frac > 0.0 &&
      rng.uniform() < spec.occlusion_prob) {
    const Rect r = sample_rect(frame.height(), frame.width(), spec.occlusion_max_frac, rng);
    for (int i = r.top; i < r.top + r.height; ++i) {
      for (int j = r.left; j < r.left + r.width; ++j) {
        for (int c = 0; c < nc; ++c) frame.at(i, j, c) = kOcclusionGray;
        out.mask.values[static_cast<std::size_t>(i) * frame.width() + j] = 1;
      }
    }
    out.record.occlusion = r;
  }
  out.frame = std::move(frame);
  return out;
}

Burst synthesize_burst(const Image& hr, const BurstSpec& spec) {
  spec.validate();
  if (hr.height() % spec.scale != 0 || hr.width() % spec.scale != 0) {
    throw DimensionError("synthesize_burst: HR size not divisible by scale");
  }
  Rng transform_rng = Rng::substream(spec.seed, 0);
  Burst burst;
  burst.scale = spec.scale;
  burst.truths = sample_transforms(spec, transform_rng);
  const bool occlusions = spec.occlusion_prob > 0.0;
  if (occlusions) burst.masks.emplace();
  for (int t = 0; t < spec.num_frames; ++t) {
    Rng frame_rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(t) + 1);
    SynthesizedFrame f = synthesize_frame(hr, burst.truths[t], spec, frame_rng, t);
    burst.frames.push_back(std::move(f.frame));
    burst.records.push_back(std::move(f.record));
    if (occlusions) burst.masks->push_back(std::move(f.mask));
  }
  return burst;
}

}  // namespace superf
