#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "superf/burst.hpp"
#include "superf/config.hpp"
#include "superf/image.hpp"

namespace superf {

/// PSNR values are written to JSON capped at this many dB.
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) for [0,1] images; +inf for identical images.
double psnr(const Image& pred, const Image& ref);

/// Mean SSIM over valid 11x11 Gaussian (sigma 1.5) windows of the channel-mean
/// luminance, C1 = 0.01^2, C2 = 0.03^2.
double ssim(const Image& pred, const Image& ref);

struct ColorFit {
  std::vector<double> scale;
  std::vector<double> offset;
};

/// Per-channel least-squares a * pred + c ~ ref. A constant pred channel
/// gets a = 1 and c = mean(ref - pred).
ColorFit fit_color(const Image& pred, const Image& ref);
Image apply_color(const Image& img, const ColorFit& fit);
Image color_match(const Image& pred, const Image& ref);

Image crop_boundary(const Image& img, int margin = 16);

struct BruteAlignResult {
  Image aligned;
  double tx = 0.0;         // pixels, content displacement
  double ty = 0.0;         // pixels
  double alpha_deg = 0.0;  // content rotation about the image center
  double mse = 0.0;        // on the cropped region
};

/// Moves the content of `img` by (tx, ty) pixels and rotates it by alpha
/// degrees about the image center (bilinear, edge-clamped).
Image warp_content(const Image& img, double tx, double ty, double alpha_deg);

/// Exhaustive search over tx, ty in {-2, -1.5, ..., 2} pixels and alpha in
/// {0, 0.5, ..., 4} degrees, scored by MSE over the region inside `margin`.
/// Ties go to the lexicographically smallest (tx, ty, alpha).
BruteAlignResult brute_force_align(const Image& pred, const Image& ref, int margin = 16);

struct AlignmentErrors {
  double translation = 0.0;  // mean Euclidean distance, LR pixels
  double rotation = 0.0;     // mean |alpha error|, degrees
};

/// Mean over non-base frames of the translation error between estimated and
/// true transforms, both in LR pixels (and the rotation error in degrees).
AlignmentErrors alignment_errors(const std::vector<FrameTransform>& estimated,
                                 const std::vector<FrameTransform>& truth);

/// Same, with estimates given as normalized (dx, dy, alpha radians) triples
/// converted with the LR grid size.
double alignment_error(const std::vector<Eigen::Vector3d>& estimated,
                       const std::vector<FrameTransform>& truth, int lr_rows, int lr_cols);

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> alignment_error;  // LR pixels
  std::optional<double> rotation_error;   // degrees
  bool color_match = false;
  bool crop = false;
  bool brute_align = false;
  int crop_margin = 0;
  std::optional<BruteAlignResult> brute;
};

void to_json(nlohmann::json& j, const MetricReport& r);

/// Optional brute-force alignment, then boundary crop, then color matching,
/// then PSNR and SSIM.
MetricReport evaluate(const Image& pred, const Image& ref, const EvalOptions& options);

}  // namespace superf
