#include "superf/baselines.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "superf/trainer.hpp"

namespace superf {
namespace {

std::vector<AblationArm> make_table3() {
  std::vector<AblationArm> arms;
  for (int mask = 7; mask >= 0; --mask) {
    ArmToggles t;
    t.direct_t = (mask & 4) != 0;
    t.supersample = (mask & 2) != 0;
    t.fixed_base_frame = (mask & 1) != 0;
    std::string name = "t3";
    name += t.direct_t ? "_dt" : "_nodt";
    name += t.supersample ? "_ss" : "_noss";
    name += t.fixed_base_frame ? "_fbf" : "_nofbf";
    arms.push_back({name, t});
  }
  return arms;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

TrainConfig AblationArm::apply(TrainConfig base) const {
  base.ff_encoding = toggles.ff_encoding;
  base.multi_frame = toggles.multi_frame;
  base.align = toggles.align;
  base.direct_t = toggles.direct_t;
  base.supersample = toggles.supersample;
  base.fixed_base_frame = toggles.fixed_base_frame;
  return base;
}

const std::vector<AblationArm>& table2_arms() {
  static const std::vector<AblationArm> arms{
      {"ff_single", {true, false, false, true, true, true}},
      {"noff_single", {false, false, false, true, true, true}},
      {"ff_multi_noalign", {true, true, false, true, true, true}},
      {"full", {true, true, true, true, true, true}},
  };
  return arms;
}

const std::vector<AblationArm>& table3_arms() {
  static const std::vector<AblationArm> arms = make_table3();
  return arms;
}

const AblationArm& arm_by_name(const std::string& name) {
  for (const auto* set : {&table2_arms(), &table3_arms()}) {
    for (const AblationArm& a : *set) {
      if (a.name == name) return a;
    }
  }
  throw std::invalid_argument("unknown ablation arm: " + name);
}

Image run_baseline_bilinear(const Burst& burst) {
  burst.validate();
  return bilinear_upsample(burst.frames.front(), burst.scale);
}

ArmResult run_arm(const Burst& burst, const AblationArm& arm, const TrainConfig& config,
                  const Image& reference, const EvalOptions& eval) {
  const TrainConfig cfg = arm.apply(config);
  TrainResult fit = optimize(burst, cfg);
  ArmResult out;
  out.name = arm.name;
  out.hr = render_hr(fit.model, reference.height(), reference.width());
  out.report = evaluate(out.hr, reference, eval);
  out.seconds_per_iteration = fit.log.mean_seconds_per_iteration();
  if (cfg.multi_frame && burst.num_frames() > 1) {
    const AlignmentErrors err = alignment_errors(
        estimated_transforms(fit.model, burst.lr_height(), burst.lr_width()), burst.truths);
    out.alignment_error = err.translation;
    out.rotation_error = err.rotation;
    out.report.alignment_error = err.translation;
    out.report.rotation_error = err.rotation;
  }
  return out;
}

ArmResult run_bilinear_arm(const Burst& burst, const Image& reference, const EvalOptions& eval) {
  ArmResult out;
  out.name = "bilinear";
  out.hr = run_baseline_bilinear(burst);
  out.report = evaluate(out.hr, reference, eval);
  return out;
}

const char* to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::kNumFrames:
      return "num_frames";
    case SweepParameter::kFfSigma:
      return "ff_sigma";
    case SweepParameter::kMaxShift:
      return "max_shift";
  }
  return "?";
}

SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "num_frames") return SweepParameter::kNumFrames;
  if (s == "ff_sigma") return SweepParameter::kFfSigma;
  if (s == "max_shift") return SweepParameter::kMaxShift;
  throw std::invalid_argument("unknown sweep parameter: " + s);
}

std::vector<SweepRow> sweep(const Burst& burst, const BurstSpec& spec, const Image& reference,
                            SweepParameter parameter, const std::vector<double>& values,
                            const TrainConfig& config, const EvalOptions& eval) {
  if (values.empty()) throw std::invalid_argument("sweep: no values given");
  const AblationArm& full = arm_by_name("full");
  std::vector<SweepRow> rows;
  for (double v : values) {
    Burst b = burst;
    TrainConfig cfg = config;
    switch (parameter) {
      case SweepParameter::kNumFrames: {
        const int n = static_cast<int>(std::lround(v));
        if (n < 1 || n > burst.num_frames() || n != v) {
          throw std::invalid_argument("sweep: frame count " + fmt(v) + " out of range");
        }
        b = burst.prefix(n);
        break;
      }
      case SweepParameter::kFfSigma:
        cfg.ff_sigma = v;
        break;
      case SweepParameter::kMaxShift: {
        BurstSpec s = spec;
        s.max_shift = v;
        b = synthesize_burst(reference, s);
        break;
      }
    }
    SweepRow row;
    row.parameter = to_string(parameter);
    row.value = v;
    row.result = run_arm(b, full, cfg, reference, eval);
    row.bilinear_psnr = run_bilinear_arm(b, reference, eval).report.psnr;
    row.result.hr = Image();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string results_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "name,parameter,value,psnr_db,ssim,alignment_error_lr_px,rotation_error_deg,"
        "bilinear_psnr_db\n";
  for (const SweepRow& r : rows) {
    os << r.result.name << ',' << r.parameter << ',' << fmt(r.value) << ','
       << fmt(r.result.report.psnr) << ',' << fmt(r.result.report.ssim) << ','
       << (r.result.alignment_error ? fmt(*r.result.alignment_error) : "") << ','
       << (r.result.rotation_error ? fmt(*r.result.rotation_error) : "") << ','
       << fmt(r.bilinear_psnr) << '\n';
  }
  return os.str();
}

void to_json(nlohmann::json& j, const SweepRow& r) {
  j = nlohmann::json{{"name", r.result.name},
                     {"parameter", r.parameter},
                     {"value", r.value},
                     {"metrics", r.result.report},
                     {"bilinear_psnr_db", std::min(r.bilinear_psnr, kPsnrCap)}};
}

}  // namespace superf
