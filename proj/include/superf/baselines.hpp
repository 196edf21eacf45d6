#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "superf/burst.hpp"
#include "superf/config.hpp"
#include "superf/metrics.hpp"

namespace superf {

struct ArmToggles {
  bool ff_encoding = true;
  bool multi_frame = true;
  bool align = true;
  bool direct_t = true;
  bool supersample = true;
  bool fixed_base_frame = true;

  bool operator==(const ArmToggles&) const = default;
};

struct AblationArm {
  std::string name;
  ArmToggles toggles;

  /// Copy of `base` with this arm's toggles applied.
  TrainConfig apply(TrainConfig base) const;
};

/// Component ablation rows: FF-only single frame, no-FF single frame,
/// multi-frame without alignment, full method.
const std::vector<AblationArm>& table2_arms();
/// All eight (direct_T, supersample, fixed_base_frame) combinations with FF,
/// multi-frame and alignment on. The first entry is the full method.
const std::vector<AblationArm>& table3_arms();
/// All twelve predefined arms; throws std::invalid_argument for unknown names.
const AblationArm& arm_by_name(const std::string& name);

/// Bilinear upsampling of the base frame by the burst scale.
Image run_baseline_bilinear(const Burst& burst);

struct ArmResult {
  std::string name;
  Image hr;
  MetricReport report;
  std::optional<double> alignment_error;  // LR pixels, multi-frame arms only
  std::optional<double> rotation_error;   // degrees
  double seconds_per_iteration = 0.0;
};

/// Optimizes with the arm's toggles and evaluates the HR render against `reference`.
ArmResult run_arm(const Burst& burst, const AblationArm& arm, const TrainConfig& config,
                  const Image& reference, const EvalOptions& eval = {});

/// Bilinear baseline evaluated like an arm.
ArmResult run_bilinear_arm(const Burst& burst, const Image& reference, const EvalOptions& eval = {});

enum class SweepParameter { kNumFrames, kFfSigma, kMaxShift };
const char* to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& s);

struct SweepRow {
  std::string parameter;
  double value = 0.0;
  ArmResult result;
  double bilinear_psnr = 0.0;  // on the burst used for this row
};

/// One full optimize + evaluate per value. kNumFrames truncates `burst`;
/// kFfSigma changes the encoding scale; kMaxShift re-synthesizes a burst
/// from `reference` with `spec` and the new shift range.
std::vector<SweepRow> sweep(const Burst& burst, const BurstSpec& spec, const Image& reference,
                            SweepParameter parameter, const std::vector<double>& values,
                            const TrainConfig& config, const EvalOptions& eval = {});

/// CSV with one line per result: name, parameter, value, psnr, ssim,
/// alignment error, bilinear psnr.
std::string results_csv(const std::vector<SweepRow>& rows);
void to_json(nlohmann::json& j, const SweepRow& r);

}  // namespace superf
