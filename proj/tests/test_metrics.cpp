#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "superf/baselines.hpp"
#include "superf/metrics.hpp"
#include "superf/scene.hpp"

using namespace superf;

namespace {

Image random_image(int h, int w, int c, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(h, w, c);
  for (double& v : img.data()) v = u(gen);
  return img;
}

}  // namespace

TEST(Psnr, Cases) {
  std::mt19937_64 gen(1);
  Image ref = random_image(16, 16, 3, gen);
  EXPECT_TRUE(std::isinf(psnr(ref, ref)));
  Image flat(8, 8, 3, 0.2), up(8, 8, 3, 0.3);
  EXPECT_NEAR(psnr(up, flat), 20.0, 1e-12);
  for (int trial = 0; trial < 10; ++trial) {
    Image a = random_image(9, 11, 3, gen), b = random_image(9, 11, 3, gen);
    EXPECT_NEAR(psnr(a, b), oracle::psnr(a, b), 1e-10);
  }
  EXPECT_THROW(psnr(Image(2, 2, 3), Image(2, 3, 3)), DimensionError);

  MetricReport r;
  r.psnr = psnr(ref, ref);
  EXPECT_EQ(nlohmann::json(r)["psnr_db"].get<double>(), 99.0);
}

TEST(Ssim, Cases) {
  Image scene = satellite_scene(32, 32, 3);
  EXPECT_NEAR(ssim(scene, scene), 1.0, 1e-12);

  // Checkerboard against its inverse: anticorrelated structure.
  Image board(24, 24, 1);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) board.at(i, j, 0) = ((i + j) % 2) ? 0.9 : 0.1;
  Image inv = board;
  for (double& v : inv.data()) v = 1.0 - v;
  EXPECT_LT(ssim(board, inv), 0.0);

  const double a = 0.3, b = 0.6, c1 = 1e-4;
  EXPECT_NEAR(ssim(Image(16, 16, 1, a), Image(16, 16, 1, b)), (2 * a * b + c1) / (a * a + b * b + c1),
              1e-12);
  EXPECT_THROW(ssim(Image(8, 8, 1), Image(8, 8, 1)), DimensionError);
}

TEST(ColorMatch, ExactAffineInverse) {
  Image ref = satellite_scene(24, 24, 5);
  Image pred = ref;
  for (double& v : pred.data()) v = 0.5 * v + 0.1;
  const ColorFit fit = fit_color(pred, ref);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(fit.scale[c], 2.0, 1e-10);
    EXPECT_NEAR(fit.offset[c], -0.2, 1e-10);
  }
  EXPECT_LE(oracle::max_abs_diff(color_match(pred, ref), ref), 1e-12);

  const ColorFit same = fit_color(ref, ref);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(same.scale[c], 1.0, 1e-12);
    EXPECT_NEAR(same.offset[c], 0.0, 1e-12);
  }
}

TEST(ColorMatch, MatchesNormalEquations) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 10; ++trial) {
    Image a = random_image(10, 12, 3, gen), b = random_image(10, 12, 3, gen);
    EXPECT_LE(oracle::max_abs_diff(color_match(a, b), oracle::color_match(a, b)), 1e-10);
  }
}

TEST(ColorMatch, ConstantChannelFallsBackToOffset) {
  Image pred(4, 4, 1, 0.5);
  Image ref(4, 4, 1, 0.0);
  ref.at(0, 0, 0) = 1.6;
  const ColorFit fit = fit_color(pred, ref);
  EXPECT_EQ(fit.scale[0], 1.0);
  EXPECT_NEAR(fit.offset[0], 0.1 - 0.5, 1e-15);
}

TEST(Crop, BoundaryCases) {
  Image img(256, 256, 3);
  Image c = crop_boundary(img, 16);
  EXPECT_EQ(c.height(), 224);
  EXPECT_EQ(c.width(), 224);
  EXPECT_EQ(crop_boundary(img, 0).storage(), img.storage());

  Image scene = satellite_scene(64, 64, 2);
  EXPECT_EQ(crop_boundary(crop_boundary(scene, 8), 8).storage(), crop_boundary(scene, 16).storage());
  EXPECT_THROW(crop_boundary(Image(32, 32, 1), 16), DimensionError);
}

TEST(BruteAlign, IdentityAndIntegerShift) {
  Image ref = satellite_scene(64, 64, 7);
  BruteAlignResult same = brute_force_align(ref, ref, 16);
  EXPECT_EQ(same.tx, 0.0);
  EXPECT_EQ(same.ty, 0.0);
  EXPECT_EQ(same.alpha_deg, 0.0);
  EXPECT_EQ(same.mse, 0.0);

  // pred is ref with content moved by (2, 1) pixels; aligning moves it back.
  Image pred = warp_content(ref, 2.0, 1.0, 0.0);
  EXPECT_EQ(pred.at(30, 32, 0), ref.at(29, 30, 0));
  BruteAlignResult r = brute_force_align(pred, ref, 16);
  EXPECT_EQ(r.tx, -2.0);
  EXPECT_EQ(r.ty, -1.0);
  EXPECT_EQ(r.alpha_deg, 0.0);
  EXPECT_LT(r.mse, 1e-20);

  // The identity candidate is plain MSE over the crop, so the best score
  // can only be lower.
  Image other = satellite_scene(64, 64, 8);
  const Image oc = crop_boundary(other, 16), rc = crop_boundary(ref, 16);
  double plain = 0.0;
  for (std::size_t k = 0; k < oc.size(); ++k) plain += std::pow(oc.storage()[k] - rc.storage()[k], 2);
  plain /= static_cast<double>(oc.size());
  EXPECT_LE(brute_force_align(other, ref, 16).mse, plain);
}

TEST(AlignmentError, Cases) {
  std::vector<FrameTransform> truth{{0, 0, 0}, {0.3, -0.2, 0.1}, {-0.5, 0.4, 0.0}};
  EXPECT_EQ(alignment_errors(truth, truth).translation, 0.0);
  std::vector<FrameTransform> two{{0, 0, 0}, {0.5, 0.5, 0}};
  std::vector<FrameTransform> off{{0, 0, 0}, {0.512, 0.5, 0}};
  EXPECT_NEAR(alignment_errors(off, two).translation, 0.012, 1e-15);

  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<FrameTransform> a(16), b(16);
    for (int t = 1; t < 16; ++t) {
      a[t] = {u(gen), u(gen), u(gen)};
      b[t] = {u(gen), u(gen), u(gen)};
    }
    EXPECT_NEAR(alignment_errors(a, b).translation, oracle::alignment_error(a, b), 1e-12);
  }
  EXPECT_THROW(alignment_errors(two, truth), DimensionError);
}
