#include "superf/scene.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "superf/rng.hpp"

namespace superf {
namespace {

using Rgb = std::array<double, 3>;

struct Field {
  double x = 0.0, y = 0.0;  // site, in pixels
  Rgb color{};
  double freq = 0.0;        // stripe cycles per pixel
  double cos_t = 1.0, sin_t = 0.0;
  double phase = 0.0;
};

struct Road {
  double nx = 0.0, ny = 0.0, c = 0.0;  // unit normal form n.p = c
  double half_width = 1.0;
  Rgb color{};
};

struct Building {
  double top = 0.0, left = 0.0, height = 0.0, width = 0.0;
  Rgb roof{};
};

constexpr std::array<Rgb, 6> kPalette{{{0.32, 0.45, 0.22},
                                       {0.45, 0.52, 0.26},
                                       {0.58, 0.50, 0.33},
                                       {0.70, 0.63, 0.42},
                                       {0.25, 0.36, 0.20},
                                       {0.52, 0.42, 0.30}}};

Rgb shade(const std::vector<Field>& fields, const std::vector<Road>& roads,
          const std::vector<Building>& buildings, double texture, double x, double y) {
  for (const Building& b : buildings) {
    if (y >= b.top && y < b.top + b.height && x >= b.left && x < b.left + b.width) return b.roof;
    // Shadow cast toward the lower right.
    if (y >= b.top + 1.0 && y < b.top + b.height + 1.0 && x >= b.left + 1.0 &&
        x < b.left + b.width + 1.0) {
      return {0.15, 0.16, 0.14};
    }
  }
  for (const Road& r : roads) {
    if (std::abs(r.nx * x + r.ny * y - r.c) <= r.half_width) return r.color;
  }
  const Field* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Field& f : fields) {
    const double d = (f.x - x) * (f.x - x) + (f.y - y) * (f.y - y);
    if (d < best_d) {
      best_d = d;
      best = &f;
    }
  }
  const double u = best->cos_t * x + best->sin_t * y;
  const double stripe = texture * std::sin(2.0 * std::numbers::pi * best->freq * u + best->phase);
  return {best->color[0] + stripe, best->color[1] + stripe, best->color[2] + 0.6 * stripe};
}

}  // namespace

Image satellite_scene(int rows, int cols, std::uint64_t seed, const SceneOptions& options) {
  if (rows < 1 || cols < 1) throw DimensionError("satellite_scene: empty image");
  Rng rng(seed);

  std::vector<Field> fields(std::max(1, options.fields));
  for (Field& f : fields) {
    f.x = rng.uniform(0.0, cols);
    f.y = rng.uniform(0.0, rows);
    const Rgb& base = kPalette[rng.below(kPalette.size())];
    const double jitter = rng.uniform(-0.05, 0.05);
    f.color = {base[0] + jitter, base[1] + jitter, base[2] + jitter};
    f.freq = rng.uniform(0.04, 0.12);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    f.cos_t = std::cos(theta);
    f.sin_t = std::sin(theta);
    f.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }

  std::vector<Road> roads(std::max(0, options.roads));
  for (Road& r : roads) {
    const double theta = rng.uniform(0.0, std::numbers::pi);
    r.nx = std::cos(theta);
    r.ny = std::sin(theta);
    r.c = r.nx * rng.uniform(0.2, 0.8) * cols + r.ny * rng.uniform(0.2, 0.8) * rows;
    r.half_width = rng.uniform(1.5, 2.5);
    const double g = rng.uniform(0.5, 0.62);
    r.color = {g, g, g - 0.03};
  }

  std::vector<Building> buildings(std::max(0, options.buildings));
  for (Building& b : buildings) {
    b.height = rng.uniform(3.0, 7.0);
    b.width = rng.uniform(3.0, 7.0);
    b.top = rng.uniform(0.0, rows - b.height);
    b.left = rng.uniform(0.0, cols - b.width);
    const double g = rng.uniform(0.6, 0.9);
    b.roof = rng.uniform() < 0.3 ? Rgb{0.7, 0.35, 0.28} : Rgb{g, g, g};
  }

  constexpr int kSub = 4;
  Image img(rows, cols, 3);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      Rgb acc{0.0, 0.0, 0.0};
      for (int a = 0; a < kSub; ++a) {
        for (int b = 0; b < kSub; ++b) {
          const double y = i + (a + 0.5) / kSub;
          const double x = j + (b + 0.5) / kSub;
          const Rgb c = shade(fields, roads, buildings, options.texture, x, y);
          for (int k = 0; k < 3; ++k) acc[k] += c[k];
        }
      }
      for (int k = 0; k < 3; ++k) img.at(i, j, k) = acc[k] / (kSub * kSub);
    }
  }
  return img.clamped();
}

Image constant_image(int rows, int cols, int channels, double value) {
  Image img(rows, cols, channels);
  for (double& v : img.data()) v = value;
  return img;
}

}  // namespace superf
