#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "superf/burst.hpp"
#include "superf/burst_io.hpp"
#include "superf/png_io.hpp"
#include "superf/scene.hpp"

using namespace superf;

namespace {

BurstSpec clean_spec() {
  BurstSpec spec;
  spec.noise_sigma = 0.0;
  spec.spectral_scale_range = {1.0, 1.0};
  spec.spectral_shift_range = {0.0, 0.0};
  return spec;
}

}  // namespace

TEST(SampleTransforms, BaseFrameAndRanges) {
  BurstSpec spec;
  spec.num_frames = 1;
  Rng rng(1);
  auto one = sample_transforms(spec, rng);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one[0].is_identity());

  spec.num_frames = 16;
  spec.max_shift = 0.0;
  spec.max_rotation = 0.0;
  for (const auto& t : sample_transforms(spec, rng)) EXPECT_TRUE(t.is_identity());

  spec.max_shift = 1.0;
  spec.max_rotation = 0.5;
  Rng a(42), b(42);
  auto ta = sample_transforms(spec, a);
  auto tb = sample_transforms(spec, b);
  ASSERT_EQ(ta.size(), 16u);
  EXPECT_TRUE(ta[0].is_identity());
  for (std::size_t t = 0; t < ta.size(); ++t) {
    EXPECT_LE(std::abs(ta[t].dx), 1.0);
    EXPECT_LE(std::abs(ta[t].dy), 1.0);
    EXPECT_LE(std::abs(ta[t].alpha), 0.5);
    EXPECT_EQ(ta[t].dx, tb[t].dx);
    EXPECT_EQ(ta[t].dy, tb[t].dy);
    EXPECT_EQ(ta[t].alpha, tb[t].alpha);
  }
}

TEST(SynthesizeFrame, ConstantStaysConstant) {
  Image hr = constant_image(32, 32, 3, 0.6);
  BurstSpec spec = clean_spec();
  Rng rng(3);
  auto f = synthesize_frame(hr, {0.7, -0.4, 0.3}, spec, rng, 1);
  for (double v : f.frame.data()) EXPECT_NEAR(v, 0.6, 1e-12);
}

TEST(SynthesizeFrame, IdentityEqualsBlurThenPool) {
  Image hr = satellite_scene(32, 32, 4);
  BurstSpec spec = clean_spec();
  Rng rng(0);
  auto f = synthesize_frame(hr, {}, spec, rng, 0);
  Image direct = avg_pool(gaussian_blur(hr, 1.0 / spec.scale), spec.scale);
  EXPECT_LE(oracle::max_abs_diff(f.frame, direct), 1e-12);
}

TEST(SynthesizeFrame, IntegerShiftMovesInterior) {
  Image hr = satellite_scene(64, 64, 8);
  BurstSpec spec = clean_spec();
  Rng rng(0);
  Image id = synthesize_frame(hr, {}, spec, rng, 1).frame;
  Image sh = synthesize_frame(hr, {1.0, 0.0, 0.0}, spec, rng, 1).frame;
  // Frame pixel v observes the scene at v + dx, so column j of the shifted
  // frame is column j + 1 of the identity frame.
  double worst = 0.0;
  for (int i = 2; i < 14; ++i)
    for (int j = 2; j < 13; ++j)
      for (int c = 0; c < 3; ++c)
        worst = std::max(worst, std::abs(sh.at(i, j, c) - id.at(i, j + 1, c)));
  EXPECT_LE(worst, 1e-6);
}

TEST(SynthesizeFrame, OcclusionPaintsMaskedRectangle) {
  Image hr = satellite_scene(64, 64, 2);
  BurstSpec spec;
  spec.occlusion_prob = 1.0;
  Rng rng(9);
  auto base = synthesize_frame(hr, {}, spec, rng, 0);
  EXPECT_EQ(base.mask.count(), 0u);
  EXPECT_FALSE(base.record.occlusion.has_value());

  auto f = synthesize_frame(hr, {0.2, 0.1, 0.0}, spec, rng, 3);
  ASSERT_TRUE(f.record.occlusion.has_value());
  const Rect r = *f.record.occlusion;
  EXPECT_EQ(f.mask.count(), static_cast<std::size_t>(r.height) * r.width);
  EXPECT_LE(r.height * r.width, 0.2 * 16 * 16 + 1e-9);
  for (int i = r.top; i < r.top + r.height; ++i)
    for (int j = r.left; j < r.left + r.width; ++j) {
      EXPECT_EQ(f.mask.at(i, j), 1);
      EXPECT_EQ(f.frame.at(i, j, 0), 0.7);
    }
}

TEST(SynthesizeBurst, ShapesAndDeterminism) {
  Image hr = satellite_scene(256, 256, 1);
  BurstSpec spec;
  spec.seed = 17;
  Burst a = synthesize_burst(hr, spec);
  ASSERT_EQ(a.num_frames(), 16);
  EXPECT_EQ(a.lr_height(), 64);
  EXPECT_EQ(a.lr_width(), 64);
  Burst b = synthesize_burst(hr, spec);
  for (int t = 0; t < 16; ++t) EXPECT_EQ(a.frames[t].storage(), b.frames[t].storage());
  EXPECT_THROW(synthesize_burst(satellite_scene(30, 30, 1), spec), DimensionError);
}

TEST(SynthesizeBurst, IdentityCleanFramesAgree) {
  Image hr = satellite_scene(32, 32, 5);
  BurstSpec spec = clean_spec();
  spec.max_shift = 0.0;
  spec.max_rotation = 0.0;
  spec.num_frames = 5;
  Burst b = synthesize_burst(hr, spec);
  for (int t = 1; t < 5; ++t) EXPECT_EQ(b.frames[t].storage(), b.frames[0].storage());
}

TEST(BurstSpec, Validation) {
  BurstSpec spec;
  spec.num_frames = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = BurstSpec{};
  spec.scale = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = BurstSpec{};
  spec.occlusion_prob = 1.5;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(BurstIo, RoundTrip) {
  Image hr = satellite_scene(64, 64, 6);
  BurstSpec spec;
  spec.num_frames = 4;
  spec.occlusion_prob = 1.0;
  spec.seed = 6;
  Burst burst = synthesize_burst(hr, spec);
  const auto dir = std::filesystem::temp_directory_path() / "superf_tests" / "burst_rt";
  std::filesystem::remove_all(dir);
  save_burst(burst, spec, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "frame_003.png"));
  EXPECT_TRUE(std::filesystem::exists(dir / "mask_003.png"));

  LoadedBurst loaded = load_burst(dir);
  ASSERT_EQ(loaded.burst.num_frames(), 4);
  EXPECT_EQ(loaded.burst.scale, 4);
  ASSERT_TRUE(loaded.spec.has_value());
  EXPECT_EQ(loaded.spec->seed, 6u);
  for (int t = 0; t < 4; ++t) {
    EXPECT_DOUBLE_EQ(loaded.burst.truths[t].dx, burst.truths[t].dx);
    EXPECT_DOUBLE_EQ(loaded.burst.truths[t].alpha, burst.truths[t].alpha);
    // Frames are clamped to [0,1] and quantized to 16 bits on disk.
    EXPECT_LE(oracle::max_abs_diff(loaded.burst.frames[t], burst.frames[t].clamped()),
              0.5 / 65535.0 + 1e-12);
  }
  ASSERT_TRUE(loaded.burst.masks.has_value());
  EXPECT_EQ((*loaded.burst.masks)[2].values, (*burst.masks)[2].values);
}

TEST(BurstIo, FramesWithoutSidecar) {
  const auto dir = std::filesystem::temp_directory_path() / "superf_tests" / "bare";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  save_png(constant_image(8, 8, 3, 0.5), dir / "frame_000.png");
  save_png(constant_image(8, 8, 3, 0.5), dir / "frame_001.png");
  LoadedBurst loaded = load_burst(dir, 2);
  EXPECT_EQ(loaded.burst.num_frames(), 2);
  EXPECT_EQ(loaded.burst.scale, 2);
  EXPECT_FALSE(loaded.spec.has_value());
  EXPECT_TRUE(loaded.burst.truths[1].is_identity());

  EXPECT_THROW(load_burst(dir / "missing"), IoError);
}

TEST(Scene, DeterministicAndInRange) {
  Image a = satellite_scene(48, 48, 12);
  Image b = satellite_scene(48, 48, 12);
  Image c = satellite_scene(48, 48, 13);
  EXPECT_EQ(a.storage(), b.storage());
  EXPECT_NE(a.storage(), c.storage());
  for (double v : a.data()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}
