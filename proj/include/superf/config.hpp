#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "superf/burst.hpp"

namespace superf {

enum class LossType { kMse, kGnll };
enum class LogVarPooling { kMeanLog, kLogMean };

const char* to_string(LossType loss);
LossType loss_from_string(const std::string& s);

/// Every knob controlling one optimization run. Defaults follow the
/// satellite-burst hyperparameter table (2000 iterations, AdamW 2e-3 -> 1e-6
/// cosine, weight decay 0.05, FF scale 10, encoding dim 256, 4x256 ReLU MLP).
struct TrainConfig {
  int iterations = 2000;
  double base_lr = 2e-3;
  double min_lr = 1e-6;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  bool decay_all = false;

  LossType loss = LossType::kMse;
  LogVarPooling logvar_pooling = LogVarPooling::kMeanLog;
  bool sum_loss = false;  // sum over pixels instead of mean

  double ff_sigma = 10.0;
  int pe_dim = 256;  // 2m
  int mlp_width = 256;
  int mlp_depth = 4;  // number of linear layers
  int transform_mlp_width = 32;

  // Ablation toggles.
  bool ff_encoding = true;
  bool multi_frame = true;
  bool align = true;
  bool direct_t = true;
  bool supersample = true;
  bool fixed_base_frame = true;

  std::uint64_t seed = 0;

  void validate() const;
};

struct EvalOptions {
  bool brute_align = false;
  bool color_match = true;
  int crop_margin = 16;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const BurstSpec& s);
void from_json(const nlohmann::json& j, BurstSpec& s);
void to_json(nlohmann::json& j, const EvalOptions& e);
void from_json(const nlohmann::json& j, EvalOptions& e);
void to_json(nlohmann::json& j, const FrameTransform& t);
void from_json(const nlohmann::json& j, FrameTransform& t);

/// FNV-1a over the compact JSON dump; stable across platforms.
std::uint64_t config_hash(const nlohmann::json& j);

}  // namespace superf
