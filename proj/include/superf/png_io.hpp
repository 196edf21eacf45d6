#pragma once

#include <filesystem>
#include <stdexcept>

#include "superf/image.hpp"

namespace superf {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BitDepth { k8 = 8, k16 = 16 };

/// Loads a grayscale or RGB PNG (8 or 16 bit) into [0,1] intensities.
/// Palette images are expanded to RGB; alpha channels are rejected.
Image load_png(const std::filesystem::path& path);

/// Clamps to [0,1] and writes 1- or 3-channel PNG.
void save_png(const Image& img, const std::filesystem::path& path,
              BitDepth depth = BitDepth::k16);

}  // namespace superf
