#include "superf/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "superf/rng.hpp"
#include "superf/trainer.hpp"

namespace superf {
namespace {

constexpr int kMaxRefinements = 2;

}  // namespace

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const SegmentCheck& s : segments) {
    if (s.trainable) m = std::max(m, s.max_rel_error);
  }
  return m;
}

double GradCheckReport::frozen_max_abs() const {
  double m = 0.0;
  for (const SegmentCheck& s : segments) {
    if (!s.trainable) m = std::max(m, s.max_abs_analytic);
  }
  return m;
}

void to_json(nlohmann::json& j, const GradCheckReport& r) {
  nlohmann::json segs = nlohmann::json::array();
  for (const SegmentCheck& s : r.segments) {
    segs.push_back({{"name", s.name},
                    {"kind", s.kind},
                    {"trainable", s.trainable},
                    {"entries", s.entries},
                    {"max_abs_analytic", s.max_abs_analytic},
                    {"max_abs_numeric", s.max_abs_numeric},
                    {"max_rel_error", s.max_rel_error},
                    {"kink_refinements", s.refined}});
  }
  j = nlohmann::json{{"label", r.label},
                     {"loss", r.loss},
                     {"max_rel_error", r.max_rel_error()},
                     {"frozen_max_abs_grad", r.frozen_max_abs()},
                     {"segments", std::move(segs)}};
}

double full_loss(const InrModel& model, const Burst& burst, const TrainConfig& config,
                 std::vector<double>* grad) {
  const int frames = model.num_frames();
  const LossNormalization norm =
      config.sum_loss ? LossNormalization::kSum : LossNormalization::kMean;
  double total = 0.0;
  if (grad) grad->assign(model.params().size(), 0.0);
  for (int t = 0; t < frames; ++t) {
    GradTape tape(model.params());
    const LrPrediction p =
        render_lr_prediction(tape, model, t, burst.lr_height(), burst.lr_width(), burst.scale,
                             config.supersample, config.logvar_pooling);
    const Eigen::MatrixXd target = image_to_matrix(burst.frames[t]);
    const auto loss = p.log_var ? tape.gnll(p.rgb, *p.log_var, target, {}, norm)
                                : tape.mse(p.rgb, target, {}, norm);
    total += tape.scalar(loss);
    if (grad) {
      const std::vector<double> g = tape.backward(loss);
      for (std::size_t k = 0; k < g.size(); ++k) (*grad)[k] += g[k] / frames;
    }
  }
  return total / frames;
}

GradCheckReport finite_difference_check(const InrModel& model, const Burst& burst,
                                        const TrainConfig& config, double eps) {
  GradCheckReport report;
  std::vector<double> analytic;
  report.loss = full_loss(model, burst, config, &analytic);

  InrModel probe = model;
  auto& values = probe.params().flat();
  for (std::size_t id = 0; id < model.params().num_segments(); ++id) {
    const Segment& seg = model.params().segment(id);
    SegmentCheck check;
    check.name = seg.name;
    check.kind = to_string(seg.kind);
    check.trainable = seg.trainable;
    check.entries = seg.length();
    for (std::size_t k = 0; k < seg.length(); ++k) {
      check.max_abs_analytic =
          std::max(check.max_abs_analytic, std::abs(analytic[seg.offset + k]));
    }
    if (seg.trainable) {
      for (std::size_t k = 0; k < seg.length(); ++k) {
        double& p = values[seg.offset + k];
        const double orig = p;
        auto central = [&](double h) {
          p = orig + h;
          const double up = full_loss(probe, burst, config);
          p = orig - h;
          const double down = full_loss(probe, burst, config);
          p = orig;
          return (up - down) / (2.0 * h);
        };
        // A ReLU kink inside [p - h, p + h] spoils the central difference.
        // Smooth pieces give estimates that agree across step sizes, so
        // shrink the step until two successive estimates agree.
        double numeric = central(eps);
        for (int refine = 0; refine < kMaxRefinements; ++refine) {
          const double finer = central(eps * std::pow(0.1, refine + 1));
          const bool agree = std::abs(finer - numeric) <= 1e-9 + 1e-6 * std::abs(finer);
          numeric = finer;
          if (agree) break;
          ++check.refined;
        }
        check.max_abs_numeric = std::max(check.max_abs_numeric, std::abs(numeric));
        check.max_abs_diff =
            std::max(check.max_abs_diff, std::abs(numeric - analytic[seg.offset + k]));
      }
      const double scale = std::max(check.max_abs_analytic, check.max_abs_numeric);
      check.max_rel_error = scale > 0.0 ? check.max_abs_diff / scale : 0.0;
    }
    report.segments.push_back(std::move(check));
  }
  return report;
}

ToyProblem make_toy_problem(const TrainConfig& toggles, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, 0x70f);
  // Smooth random HR scene: a few low-frequency sinusoids per channel.
  Image hr(16, 16, 3);
  for (int c = 0; c < 3; ++c) {
    const double fx = rng.uniform(0.5, 2.0), fy = rng.uniform(0.5, 2.0);
    const double ph = rng.uniform(0.0, 6.28);
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) {
        hr.at(i, j, c) = 0.5 + 0.3 * std::sin(fx * j * 0.4 + fy * i * 0.3 + ph);
      }
    }
  }
  BurstSpec spec;
  spec.num_frames = 2;
  spec.scale = 2;
  spec.seed = seed;
  Burst burst = synthesize_burst(hr, spec);

  TrainConfig cfg = toggles;
  cfg.mlp_depth = 2;
  cfg.mlp_width = 8;
  cfg.pe_dim = 32;
  cfg.ff_sigma = 3.0;
  cfg.seed = seed;

  InrModel model = init_model(ModelConfig::from_train(cfg, 2, 3), seed);
  ParamStore& p = model.params();
  // Move every trainable parameter off its special initial value so no
  // gradient is trivially zero.
  for (std::size_t id = 0; id < p.num_segments(); ++id) {
    const Segment& seg = p.segment(id);
    if (!seg.trainable) continue;
    auto v = p.values(id);
    switch (seg.kind) {
      case SegmentKind::kAlignment:
        for (double& x : v) x += rng.uniform(-0.03, 0.03);
        break;
      case SegmentKind::kSpectral:
        for (double& x : v) x += rng.uniform(-0.1, 0.1);
        break;
      case SegmentKind::kMlpBias:
      case SegmentKind::kTransformBias:
        for (double& x : v) x += rng.uniform(-0.2, 0.2);
        break;
      case SegmentKind::kTransformWeight:
        for (double& x : v) x += rng.uniform(-0.05, 0.05);
        break;
      default:
        break;
    }
  }
  return {std::move(burst), cfg, std::move(model)};
}

std::vector<GradCheckReport> grad_check_suite(std::uint64_t seed) {
  std::vector<GradCheckReport> out;
  for (LossType loss : {LossType::kMse, LossType::kGnll}) {
    for (int mask = 0; mask < 8; ++mask) {
      TrainConfig toggles;
      toggles.loss = loss;
      toggles.direct_t = (mask & 4) != 0;
      toggles.supersample = (mask & 2) != 0;
      toggles.fixed_base_frame = (mask & 1) != 0;
      ToyProblem toy = make_toy_problem(toggles, seed);
      GradCheckReport r = finite_difference_check(toy.model, toy.burst, toy.config);
      r.label = std::string(to_string(loss)) + " direct_t=" + (toggles.direct_t ? "1" : "0") +
                " supersample=" + (toggles.supersample ? "1" : "0") +
                " fixed_base_frame=" + (toggles.fixed_base_frame ? "1" : "0");
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace superf
