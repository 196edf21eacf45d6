#include "superf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>

#include "superf/affine.hpp"

namespace superf {
namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

double mse_of(const Image& a, const Image& b) {
  const auto da = a.data();
  const auto db = b.data();
  double acc = 0.0;
  for (std::size_t k = 0; k < da.size(); ++k) {
    const double d = da[k] - db[k];
    acc += d * d;
  }
  return acc / static_cast<double>(da.size());
}

Eigen::MatrixXd luminance(const Image& img) {
  Eigen::MatrixXd out(img.height(), img.width());
  for (int i = 0; i < img.height(); ++i) {
    for (int j = 0; j < img.width(); ++j) {
      double acc = 0.0;
      for (int c = 0; c < img.channels(); ++c) acc += img.at(i, j, c);
      out(i, j) = acc / img.channels();
    }
  }
  return out;
}

// Valid-mode separable filtering with the SSIM window.
Eigen::MatrixXd filter_valid(const Eigen::MatrixXd& x, const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  const Eigen::Index oh = x.rows() - k + 1;
  const Eigen::Index ow = x.cols() - k + 1;
  Eigen::MatrixXd rows_pass = Eigen::MatrixXd::Zero(x.rows(), ow);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += w[t] * x(i, j + t);
      rows_pass(i, j) = acc;
    }
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(oh, ow);
  for (Eigen::Index i = 0; i < oh; ++i) {
    for (Eigen::Index j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t) acc += w[t] * rows_pass(i + t, j);
      out(i, j) = acc;
    }
  }
  return out;
}

std::vector<double> ssim_window() {
  std::vector<double> w(kSsimWindow);
  double total = 0.0;
  const int r = kSsimWindow / 2;
  for (int t = -r; t <= r; ++t) {
    w[t + r] = std::exp(-0.5 * t * t / (kSsimSigma * kSsimSigma));
    total += w[t + r];
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

double psnr(const Image& pred, const Image& ref) {
  if (!pred.same_shape(ref)) throw DimensionError("psnr: shape mismatch");
  const double mse = mse_of(pred, ref);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& pred, const Image& ref) {
  if (!pred.same_shape(ref)) throw DimensionError("ssim: shape mismatch");
  if (pred.height() < kSsimWindow || pred.width() < kSsimWindow) {
    throw DimensionError("ssim: image smaller than the 11x11 window");
  }
  const auto w = ssim_window();
  const Eigen::MatrixXd x = luminance(pred);
  const Eigen::MatrixXd y = luminance(ref);
  const Eigen::ArrayXXd mx = filter_valid(x, w).array();
  const Eigen::ArrayXXd my = filter_valid(y, w).array();
  const Eigen::ArrayXXd sxx = filter_valid(x.cwiseProduct(x), w).array() - mx * mx;
  const Eigen::ArrayXXd syy = filter_valid(y.cwiseProduct(y), w).array() - my * my;
  const Eigen::ArrayXXd sxy = filter_valid(x.cwiseProduct(y), w).array() - mx * my;
  const Eigen::ArrayXXd map = ((2.0 * mx * my + kSsimC1) * (2.0 * sxy + kSsimC2)) /
                              ((mx * mx + my * my + kSsimC1) * (sxx + syy + kSsimC2));
  return map.mean();
}

ColorFit fit_color(const Image& pred, const Image& ref) {
  if (!pred.same_shape(ref)) throw DimensionError("color_match: shape mismatch");
  const int nc = pred.channels();
  const double n = static_cast<double>(pred.pixel_count());
  ColorFit fit;
  fit.scale.assign(nc, 1.0);
  fit.offset.assign(nc, 0.0);
  const auto p = pred.data();
  const auto r = ref.data();
  for (int c = 0; c < nc; ++c) {
    double sp = 0.0, sr = 0.0;
    for (std::size_t k = c; k < p.size(); k += nc) {
      sp += p[k];
      sr += r[k];
    }
    const double mp = sp / n, mr = sr / n;
    double var = 0.0, cov = 0.0;
    for (std::size_t k = c; k < p.size(); k += nc) {
      var += (p[k] - mp) * (p[k] - mp);
      cov += (p[k] - mp) * (r[k] - mr);
    }
    if (var <= 1e-300) {
      fit.scale[c] = 1.0;
      fit.offset[c] = mr - mp;
    } else {
      fit.scale[c] = cov / var;
      fit.offset[c] = mr - fit.scale[c] * mp;
    }
  }
  return fit;
}

Image apply_color(const Image& img, const ColorFit& fit) {
  Image out = img;
  auto d = out.data();
  const int nc = img.channels();
  for (std::size_t k = 0; k < d.size(); ++k) {
    const int c = static_cast<int>(k % nc);
    d[k] = fit.scale[c] * d[k] + fit.offset[c];
  }
  return out;
}

Image color_match(const Image& pred, const Image& ref) {
  return apply_color(pred, fit_color(pred, ref));
}

Image crop_boundary(const Image& img, int margin) {
  if (margin < 0) throw DimensionError("crop margin must be non-negative");
  if (margin == 0) return img;
  if (img.height() <= 2 * margin || img.width() <= 2 * margin) {
    throw DimensionError("crop_boundary: " + std::to_string(img.height()) + "x" +
                         std::to_string(img.width()) + " image too small for margin " +
                         std::to_string(margin));
  }
  return crop(img, margin, margin, img.height() - 2 * margin, img.width() - 2 * margin);
}

Image warp_content(const Image& img, double tx, double ty, double alpha_deg) {
  if (tx == 0.0 && ty == 0.0 && alpha_deg == 0.0) return img;
  const Eigen::Matrix3d forward =
      affine_matrix(tx / img.width(), ty / img.height(), deg_to_rad(alpha_deg));
  const Eigen::Matrix3d inverse = forward.inverse();
  CoordGrid grid = make_grid(img.height(), img.width());
  for (Coord& p : grid.points) {
    const Eigen::Vector2d u = apply_affine(inverse, p.x, p.y);
    p.x = u.x();
    p.y = u.y();
  }
  return bilinear_sample(img, grid);
}

BruteAlignResult brute_force_align(const Image& pred, const Image& ref, int margin) {
  if (!pred.same_shape(ref)) throw DimensionError("brute_force_align: shape mismatch");
  const Image ref_crop = crop_boundary(ref, margin);
  BruteAlignResult best;
  best.mse = std::numeric_limits<double>::infinity();
  for (int ix = -4; ix <= 4; ++ix) {
    for (int iy = -4; iy <= 4; ++iy) {
      for (int ia = 0; ia <= 8; ++ia) {
        const double tx = 0.5 * ix, ty = 0.5 * iy, alpha = 0.5 * ia;
        Image warped = warp_content(pred, tx, ty, alpha);
        const double score = mse_of(crop_boundary(warped, margin), ref_crop);
        if (score < best.mse) {
          best.mse = score;
          best.tx = tx;
          best.ty = ty;
          best.alpha_deg = alpha;
          best.aligned = std::move(warped);
        }
      }
    }
  }
  return best;
}

AlignmentErrors alignment_errors(const std::vector<FrameTransform>& estimated,
                                 const std::vector<FrameTransform>& truth) {
  if (estimated.size() != truth.size()) {
    throw DimensionError("alignment_error: frame count mismatch");
  }
  AlignmentErrors out;
  if (estimated.size() < 2) return out;
  for (std::size_t t = 1; t < estimated.size(); ++t) {
    out.translation += std::hypot(estimated[t].dx - truth[t].dx, estimated[t].dy - truth[t].dy);
    out.rotation += std::abs(estimated[t].alpha - truth[t].alpha);
  }
  const double n = static_cast<double>(estimated.size() - 1);
  out.translation /= n;
  out.rotation /= n;
  return out;
}

double alignment_error(const std::vector<Eigen::Vector3d>& estimated,
                       const std::vector<FrameTransform>& truth, int lr_rows, int lr_cols) {
  std::vector<FrameTransform> est(estimated.size());
  for (std::size_t t = 0; t < estimated.size(); ++t) {
    est[t] = {estimated[t][0] * lr_cols, estimated[t][1] * lr_rows, rad_to_deg(estimated[t][2])};
  }
  return alignment_errors(est, truth).translation;
}

void to_json(nlohmann::json& j, const MetricReport& r) {
  const double capped = std::isinf(r.psnr) ? kPsnrCap : std::min(r.psnr, kPsnrCap);
  j = nlohmann::json{{"psnr_db", capped},
                     {"ssim", r.ssim},
                     {"postprocessing",
                      {{"brute_align", r.brute_align},
                       {"crop", r.crop},
                       {"crop_margin", r.crop_margin},
                       {"color_match", r.color_match}}}};
  if (r.alignment_error) {
    j["alignment_error_lr_px"] = *r.alignment_error;
    j["alignment_error_unit"] = "LR pixels";
  }
  if (r.rotation_error) j["rotation_error_deg"] = *r.rotation_error;
  if (r.brute) {
    j["brute_align_transform"] = {{"tx_px", r.brute->tx},
                                  {"ty_px", r.brute->ty},
                                  {"alpha_deg", r.brute->alpha_deg}};
  }
}

MetricReport evaluate(const Image& pred, const Image& ref, const EvalOptions& options) {
  if (!pred.same_shape(ref)) throw DimensionError("evaluate: shape mismatch");
  MetricReport report;
  Image p = pred;
  if (options.brute_align) {
    report.brute = brute_force_align(p, ref, options.crop_margin);
    p = report.brute->aligned;
    report.brute->aligned = Image();
    report.brute_align = true;
  }
  Image r = ref;
  if (options.crop_margin > 0) {
    p = crop_boundary(p, options.crop_margin);
    r = crop_boundary(r, options.crop_margin);
    report.crop = true;
  }
  report.crop_margin = options.crop_margin;
  if (options.color_match) {
    p = color_match(p, r);
    report.color_match = true;
  }
  report.psnr = psnr(p, r);
  report.ssim = ssim(p, r);
  return report;
}

}  // namespace superf
