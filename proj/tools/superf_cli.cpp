// superf: synth / superres / eval / ablate / grad-check.
//
// Exit codes: 0 success, 1 validation or I/O error, 2 numerical abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "superf/baselines.hpp"
#include "superf/burst.hpp"
#include "superf/burst_io.hpp"
#include "superf/config.hpp"
#include "superf/gradcheck.hpp"
#include "superf/metrics.hpp"
#include "superf/model.hpp"
#include "superf/png_io.hpp"
#include "superf/runtime.hpp"
#include "superf/scene.hpp"
#include "superf/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace superf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;
constexpr double kGradTolerance = 1e-4;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_text(const std::string& text, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string frame_file(const char* stem, int t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%03d.png", stem, t);
  return buf;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string hr;
  int scene_size = 64;
  std::string config;
  std::string out;
  std::optional<int> scale;
  std::optional<int> frames;
  std::optional<double> max_shift;
  std::optional<double> max_rotation;
  std::optional<double> noise;
  std::optional<double> occlusion_prob;
  std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
  BurstSpec spec;
  if (!a.config.empty()) spec = read_json(a.config).get<BurstSpec>();
  if (a.scale) spec.scale = *a.scale;
  if (a.frames) spec.num_frames = *a.frames;
  if (a.max_shift) spec.max_shift = *a.max_shift;
  if (a.max_rotation) spec.max_rotation = *a.max_rotation;
  if (a.noise) spec.noise_sigma = *a.noise;
  if (a.occlusion_prob) spec.occlusion_prob = *a.occlusion_prob;
  spec.seed = a.seed;
  spec.validate();

  const Image hr = a.hr.empty() ? satellite_scene(a.scene_size, a.scene_size, a.seed)
                                : load_png(a.hr);
  const Burst burst = synthesize_burst(hr, spec);
  const json resolved{{"command", "synth"},
                      {"burst_spec", spec},
                      {"hr", a.hr.empty() ? json("procedural:" + std::to_string(a.scene_size))
                                          : json(a.hr)},
                      {"seed", a.seed}};
  save_burst(burst, spec, a.out, {{"resolved_config", resolved}});
  save_png(hr, fs::path(a.out) / "hr_reference.png");
  write_json(resolved, fs::path(a.out) / "config.json");
  std::cout << "wrote " << burst.num_frames() << " frames to " << a.out << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- superres

struct SuperresArgs {
  std::string burst;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<std::string> loss;
  int fallback_scale = 4;
};

TrainConfig load_train_config(const std::string& path) {
  if (path.empty()) return TrainConfig{};
  json j = read_json(path);
  if (j.contains("train")) j = j.at("train");
  return j.get<TrainConfig>();
}

int run_superres(const SuperresArgs& a) {
  TrainConfig cfg = load_train_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.iterations) cfg.iterations = *a.iterations;
  if (a.loss) cfg.loss = loss_from_string(*a.loss);
  cfg.validate();

  const LoadedBurst loaded = load_burst(a.burst, a.fallback_scale);
  const Burst& burst = loaded.burst;
  const json resolved{{"command", "superres"},
                      {"burst", a.burst},
                      {"scale", burst.scale},
                      {"train", cfg}};

  TrainResult fit = optimize(burst, cfg);
  const fs::path out(a.out);
  fs::create_directories(out);
  const int hr_rows = burst.lr_height() * burst.scale;
  const int hr_cols = burst.lr_width() * burst.scale;
  save_png(render_hr(fit.model, hr_rows, hr_cols), out / "hr.png");
  save_checkpoint(fit.model, resolved, out / "checkpoint.json");

  json runlog = fit.log;
  runlog["resolved_config"] = resolved;
  write_json(runlog, out / "runlog.json");

  // Wall-clock numbers differ run to run, so they live apart from the
  // byte-reproducible outputs.
  json timing{{"mean_seconds_per_iteration", fit.log.mean_seconds_per_iteration()},
              {"seconds", json::array()}};
  for (const auto& e : fit.log.entries) timing["seconds"].push_back(e.seconds);
  write_json(timing, out / "timing.json");
  write_json(resolved, out / "config.json");

  if (cfg.loss == LossType::kGnll) {
    std::vector<Image> maps;
    double global_max = 0.0;
    json stats = json::array();
    for (int t = 0; t < fit.model.num_frames(); ++t) {
      Image m = render_uncertainty(fit.model, t, hr_rows, hr_cols);
      double mx = 0.0;
      for (double v : m.data()) mx = std::max(mx, v);
      global_max = std::max(global_max, mx);
      stats.push_back({{"frame", t}, {"mean_variance", mean_value(m)}, {"max_variance", mx}});
      maps.push_back(std::move(m));
    }
    for (int t = 0; t < static_cast<int>(maps.size()); ++t) {
      Image m = maps[t];
      if (global_max > 0.0) {
        for (double& v : m.data()) v /= global_max;
      }
      save_png(m, out / frame_file("uncertainty", t));
    }
    write_json({{"png_scale", "pixel value = variance / normalizer"},
                {"normalizer", global_max},
                {"frames", stats},
                {"resolved_config", resolved}},
               out / "uncertainty.json");
  }

  const auto est = estimated_transforms(fit.model, burst.lr_height(), burst.lr_width());
  if (est.size() == burst.truths.size() && est.size() > 1) {
    const AlignmentErrors err = alignment_errors(est, burst.truths);
    std::cout << "alignment error vs burst.json truths: " << err.translation << " LR px\n";
  }
  std::cout << "wrote " << (out / "hr.png").string() << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred;
  std::string ref;
  std::string out;
  bool brute_align = false;
  bool no_color_match = false;
  int crop = 16;
  std::string checkpoint;
  std::string burst;
};

int run_eval(const EvalArgs& a) {
  EvalOptions opts;
  opts.brute_align = a.brute_align;
  opts.color_match = !a.no_color_match;
  opts.crop_margin = a.crop;
  const Image pred = load_png(a.pred);
  const Image ref = load_png(a.ref);
  MetricReport report = evaluate(pred, ref, opts);

  if (!a.checkpoint.empty() != !a.burst.empty()) {
    throw std::invalid_argument("--checkpoint and --burst must be given together");
  }
  if (!a.checkpoint.empty()) {
    const InrModel model = load_checkpoint(a.checkpoint);
    const Burst burst = load_burst(a.burst).burst;
    const auto est = estimated_transforms(model, burst.lr_height(), burst.lr_width());
    if (est.size() == burst.truths.size()) {
      const AlignmentErrors err = alignment_errors(est, burst.truths);
      report.alignment_error = err.translation;
      report.rotation_error = err.rotation;
    }
  }

  json j = report;
  j["resolved_config"] = {{"command", "eval"},
                          {"pred", a.pred},
                          {"ref", a.ref},
                          {"eval", opts},
                          {"checkpoint", a.checkpoint},
                          {"burst", a.burst}};
  write_json(j, a.out);
  std::cout << "PSNR " << report.psnr << " dB, SSIM " << report.ssim << '\n';
  return kExitOk;
}

// --------------------------------------------------------------- ablate

struct AblateArgs {
  std::string burst;
  std::string suite;
  std::string out;
  std::string config;
  std::string ref;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  int crop = 16;
};

int run_ablate(const AblateArgs& a) {
  TrainConfig cfg = load_train_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.iterations) cfg.iterations = *a.iterations;
  cfg.validate();
  EvalOptions eval;
  eval.crop_margin = a.crop;

  const LoadedBurst loaded = load_burst(a.burst);
  const fs::path ref_path = a.ref.empty() ? fs::path(a.burst) / "hr_reference.png" : fs::path(a.ref);
  if (!fs::exists(ref_path)) {
    throw IoError("ablate needs an HR reference: pass --ref or keep hr_reference.png in the burst");
  }
  const Image reference = load_png(ref_path);
  const Burst& burst = loaded.burst;

  std::vector<SweepRow> rows;
  auto add_arms = [&](const std::vector<AblationArm>& arms) {
    const double bilinear = run_bilinear_arm(burst, reference, eval).report.psnr;
    for (const AblationArm& arm : arms) {
      SweepRow row;
      row.parameter = "arm";
      row.value = static_cast<double>(rows.size());
      row.result = run_arm(burst, arm, cfg, reference, eval);
      row.result.hr = Image();
      row.bilinear_psnr = bilinear;
      rows.push_back(std::move(row));
    }
  };

  if (a.suite == "table2") {
    add_arms(table2_arms());
  } else if (a.suite == "table3") {
    add_arms(table3_arms());
  } else if (a.suite == "frames") {
    std::vector<double> values;
    for (int n : {1, 2, 4, 8, 16}) {
      if (n <= burst.num_frames()) values.push_back(n);
    }
    rows = sweep(burst, BurstSpec{}, reference, SweepParameter::kNumFrames, values, cfg, eval);
  } else if (a.suite == "ffscale") {
    rows = sweep(burst, BurstSpec{}, reference, SweepParameter::kFfSigma, {1, 3, 10, 30}, cfg,
                 eval);
  } else if (a.suite == "shift") {
    if (!loaded.spec) throw IoError("shift suite needs burst.json with the synthesis spec");
    rows = sweep(burst, *loaded.spec, reference, SweepParameter::kMaxShift, {1.0, 4.0}, cfg,
                 eval);
  } else {
    throw std::invalid_argument("unknown suite '" + a.suite +
                                "' (expected table2, table3, frames, ffscale or shift)");
  }

  write_text(results_csv(rows), a.out);
  json j{{"suite", a.suite},
         {"rows", rows},
         {"resolved_config",
          {{"command", "ablate"}, {"burst", a.burst}, {"train", cfg}, {"eval", eval}}}};
  fs::path json_path(a.out);
  json_path.replace_extension(".json");
  write_json(j, json_path);
  std::cout << "wrote " << rows.size() << " rows to " << a.out << '\n';
  return kExitOk;
}

// ----------------------------------------------------------- grad-check

int run_grad_check(std::uint64_t seed, const std::string& out) {
  const std::vector<GradCheckReport> reports = grad_check_suite(seed);
  double worst = 0.0;
  double frozen = 0.0;
  for (const GradCheckReport& r : reports) {
    worst = std::max(worst, r.max_rel_error());
    frozen = std::max(frozen, r.frozen_max_abs());
  }
  const bool pass = worst < kGradTolerance && frozen == 0.0;
  json j{{"seed", seed},
         {"tolerance", kGradTolerance},
         {"max_rel_error", worst},
         {"frozen_max_abs_grad", frozen},
         {"pass", pass},
         {"reports", reports}};
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(j, out);
    std::cout << "max relative error " << worst << (pass ? " (pass)" : " (FAIL)") << '\n';
  }
  return pass ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  CLI::App app{"SuperF multi-image super-resolution with a shared coordinate MLP"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Synthesize an LR burst with known misalignments");
  s->add_option("--hr", synth.hr, "HR PNG (default: procedural satellite-style scene)");
  s->add_option("--scene-size", synth.scene_size, "Procedural scene size when --hr is absent")
      ->capture_default_str();
  s->add_option("--config", synth.config, "BurstSpec JSON; flags below override it");
  s->add_option("--scale", synth.scale, "Upsampling factor s (default 4)");
  s->add_option("--frames", synth.frames, "Number of frames T (default 16)");
  s->add_option("--max-shift", synth.max_shift, "Max |shift| in LR pixels (default 1.0)");
  s->add_option("--max-rotation", synth.max_rotation, "Max |rotation| in degrees (default 0.5)");
  s->add_option("--noise", synth.noise, "Additive noise std (default 0.01)");
  s->add_option("--occlusion-prob", synth.occlusion_prob, "Per-frame occlusion probability (default 0)");
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->required();

  SuperresArgs sr;
  auto* r = app.add_subcommand(
      "superres",
      "Fit the model to a burst. Defaults: 2000 iterations, AdamW lr 2e-3 cosine to 1e-6, "
      "weight decay 0.05, 1 frame per iteration, FF scale 10, encoding dim 256, 4x256 MLP");
  r->add_option("--burst", sr.burst, "Burst directory")->required()->check(CLI::ExistingDirectory);
  r->add_option("--config", sr.config, "TrainConfig JSON")->check(CLI::ExistingFile);
  r->add_option("--out", sr.out, "Output directory")->required();
  r->add_option("--seed", sr.seed, "Overrides the config seed");
  r->add_option("--iterations", sr.iterations, "Overrides the iteration count");
  r->add_option("--loss", sr.loss, "mse or gnll");
  r->add_option("--scale", sr.fallback_scale, "Scale for bursts without burst.json")
      ->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "PSNR/SSIM after crop and color matching");
  e->add_option("--pred", ev.pred, "Predicted HR PNG")->required()->check(CLI::ExistingFile);
  e->add_option("--ref", ev.ref, "Reference HR PNG")->required()->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "report.json path")->required();
  e->add_flag("--brute-align", ev.brute_align, "Brute-force align before scoring");
  e->add_flag("--no-color-match", ev.no_color_match, "Skip per-channel color matching");
  e->add_option("--crop", ev.crop, "Boundary crop in HR pixels")->capture_default_str();
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint for alignment error (needs --burst)");
  e->add_option("--burst", ev.burst, "Burst directory with ground-truth transforms");

  AblateArgs ab;
  auto* b = app.add_subcommand("ablate", "Run an ablation suite or sensitivity sweep");
  b->add_option("--burst", ab.burst, "Burst directory")->required()->check(CLI::ExistingDirectory);
  b->add_option("--suite", ab.suite, "table2, table3, frames, ffscale or shift")->required();
  b->add_option("--out", ab.out, "results.csv path")->required();
  b->add_option("--config", ab.config, "TrainConfig JSON")->check(CLI::ExistingFile);
  b->add_option("--ref", ab.ref, "HR reference (default: <burst>/hr_reference.png)");
  b->add_option("--seed", ab.seed, "Overrides the config seed");
  b->add_option("--iterations", ab.iterations, "Overrides the iteration count");
  b->add_option("--crop", ab.crop, "Boundary crop in HR pixels")->capture_default_str();

  std::uint64_t gc_seed = 1;
  std::string gc_out;
  auto* g = app.add_subcommand("grad-check", "Finite-difference check of every gradient");
  g->add_option("--seed", gc_seed, "Random seed")->capture_default_str();
  g->add_option("--out", gc_out, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*s) return run_synth(synth);
    if (*r) return run_superres(sr);
    if (*e) return run_eval(ev);
    if (*b) return run_ablate(ab);
    if (*g) return run_grad_check(gc_seed, gc_out);
  } catch (const NumericalError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const json::exception& err) {
    std::cerr << "error: invalid JSON value: " << err.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
