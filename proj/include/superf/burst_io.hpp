#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "superf/burst.hpp"

namespace superf {

/// Writes frame_000.png, ... (16-bit), burst.json with the spec and every
/// sampled parameter, and mask_000.png, ... when occlusion masks exist.
/// `extra` is merged into burst.json (e.g. the resolved command config).
void save_burst(const Burst& burst, const BurstSpec& spec, const std::filesystem::path& dir,
                const nlohmann::json& extra = nlohmann::json::object());

struct LoadedBurst {
  Burst burst;
  std::optional<BurstSpec> spec;
  nlohmann::json sidecar;
};

/// Reads a directory written by save_burst. Without burst.json, loads every
/// frame_*.png in name order with identity truths and scale from `fallback_scale`.
LoadedBurst load_burst(const std::filesystem::path& dir, int fallback_scale = 4);

}  // namespace superf
