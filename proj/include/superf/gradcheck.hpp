#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "superf/burst.hpp"
#include "superf/config.hpp"
#include "superf/model.hpp"

namespace superf {

struct SegmentCheck {
  std::string name;
  std::string kind;
  bool trainable = false;
  std::size_t entries = 0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
  double max_abs_diff = 0.0;
  /// max |analytic - numeric| / max(max |analytic|, max |numeric|) over the
  /// segment; 0 when both gradients vanish.
  double max_rel_error = 0.0;
  /// Entries whose step had to be shrunk because a kink was straddled.
  int refined = 0;
};

struct GradCheckReport {
  std::string label;
  double loss = 0.0;
  std::vector<SegmentCheck> segments;

  double max_rel_error() const;
  /// Largest |analytic gradient| over frozen segments; must be exactly 0.
  double frozen_max_abs() const;
};

void to_json(nlohmann::json& j, const GradCheckReport& r);

/// Objective used for checking: the per-frame loss averaged over all frames,
/// rendered exactly as during training.
double full_loss(const InrModel& model, const Burst& burst, const TrainConfig& config,
                 std::vector<double>* grad = nullptr);

/// Central differences against the analytic gradient for every trainable
/// parameter of `model`. Each entry starts at step `eps`; when the estimate
/// changes under a 10x smaller step (a ReLU kink in the stencil) the step
/// keeps shrinking, at most twice.
GradCheckReport finite_difference_check(const InrModel& model, const Burst& burst,
                                        const TrainConfig& config, double eps = 1e-6);

/// Small problem for gradient checking: 2 frames of 8x8 LR at s = 2, a depth-2
/// width-8 MLP and non-degenerate random parameters.
struct ToyProblem {
  Burst burst;
  TrainConfig config;
  InrModel model;
};
ToyProblem make_toy_problem(const TrainConfig& toggles, std::uint64_t seed);

/// Runs the check over both losses and all eight (direct_T, supersample,
/// fixed_base_frame) combinations.
std::vector<GradCheckReport> grad_check_suite(std::uint64_t seed);

}  // namespace superf
