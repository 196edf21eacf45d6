#pragma once

#include <cstdint>

#include "superf/image.hpp"

namespace superf {

struct SceneOptions {
  int fields = 5;         // Voronoi field parcels
  int roads = 1;
  int buildings = 3;
  double texture = 0.04;  // amplitude of in-field stripe texture
};

/// Procedural satellite-style RGB test scene in [0,1]: field parcels with
/// striped crop texture, straight roads and small buildings. Deterministic in
/// `seed`; edges are antialiased with 4x4 supersampling.
Image satellite_scene(int rows, int cols, std::uint64_t seed, const SceneOptions& options = {});

/// Constant image of the given value in every channel.
Image constant_image(int rows, int cols, int channels, double value);

}  // namespace superf
