#include "superf/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "superf/adamw.hpp"
#include "superf/affine.hpp"
#include "superf/rng.hpp"

namespace superf {
namespace {

constexpr std::uint64_t kFrameStream = 0xf4a3e;

std::span<const std::uint8_t> mask_span(const Mask* mask) {
  if (!mask) return {};
  return mask->values;
}

}  // namespace

double RunLog::mean_seconds_per_iteration() const {
  if (entries.empty()) return 0.0;
  double total = 0.0;
  for (const Entry& e : entries) total += e.seconds;
  return total / static_cast<double>(entries.size());
}

void to_json(nlohmann::json& j, const RunLog& log) {
  nlohmann::json iters = nlohmann::json::array();
  for (std::size_t k = 0; k < log.entries.size(); ++k) {
    const auto& e = log.entries[k];
    nlohmann::json align = nlohmann::json::array();
    for (const FrameTransform& t : log.alignment[k]) align.push_back({t.dx, t.dy, t.alpha});
    iters.push_back({{"iter", e.iteration},
                     {"frame", e.frame},
                     {"loss", e.loss},
                     {"lr", e.lr},
                     {"alignment", std::move(align)}});
  }
  j = nlohmann::json{{"alignment_units", "dx, dy in LR pixels; alpha in degrees"},
                     {"iterations", std::move(iters)}};
}

Eigen::MatrixXd image_to_matrix(const Image& img) {
  return Eigen::Map<const Eigen::MatrixXd>(img.data().data(), img.channels(),
                                           static_cast<Eigen::Index>(img.pixel_count()));
}

Image matrix_to_image(const Eigen::MatrixXd& m, int rows, int cols) {
  if (m.cols() != static_cast<Eigen::Index>(rows) * cols) {
    throw DimensionError("matrix_to_image: column count does not match grid");
  }
  Image img(rows, cols, static_cast<int>(m.rows()));
  Eigen::Map<Eigen::MatrixXd>(img.data().data(), m.rows(), m.cols()) = m;
  return img;
}

LrPrediction render_lr_prediction(GradTape& tape, const InrModel& model, int t, int lr_rows,
                                  int lr_cols, int s, bool supersample, LogVarPooling pooling) {
  if (lr_rows < 1 || lr_cols < 1 || s < 1) throw DimensionError("render: invalid grid size");
  LrPrediction out;
  if (!supersample) {
    const auto f = model.forward(tape, to_matrix(make_grid(lr_rows, lr_cols)), t);
    out.rgb = f.rgb;
    out.log_var = f.log_var;
    return out;
  }
  const int hr_rows = lr_rows * s;
  const int hr_cols = lr_cols * s;
  const auto f = model.forward(tape, to_matrix(make_grid(hr_rows, hr_cols)), t);
  out.rgb = tape.avg_pool(f.rgb, hr_rows, hr_cols, s);
  if (f.log_var) {
    out.log_var = pooling == LogVarPooling::kMeanLog
                      ? tape.avg_pool(*f.log_var, hr_rows, hr_cols, s)
                      : tape.log_mean_exp_pool(*f.log_var, hr_rows, hr_cols, s);
  }
  return out;
}

Image render_lr_image(const InrModel& model, int t, int lr_rows, int lr_cols, int s,
                      bool supersample, Image* log_var, LogVarPooling pooling) {
  GradTape tape(model.params());
  const LrPrediction p = render_lr_prediction(tape, model, t, lr_rows, lr_cols, s, supersample,
                                              pooling);
  if (log_var) {
    if (!p.log_var) throw std::logic_error("model has no log-variance head");
    *log_var = matrix_to_image(tape.value(*p.log_var), lr_rows, lr_cols);
  }
  return matrix_to_image(tape.value(p.rgb), lr_rows, lr_cols);
}

double mse_loss(const Image& pred, const Image& target, const Mask* mask) {
  if (!pred.same_shape(target)) throw DimensionError("mse_loss: shape mismatch");
  ParamStore none;
  GradTape tape(none);
  const auto p = tape.constant(image_to_matrix(pred));
  return tape.scalar(tape.mse(p, image_to_matrix(target), mask_span(mask)));
}

double gnll_loss(const Image& pred, const Image& log_var, const Image& target,
                 const Mask* mask) {
  if (!pred.same_shape(target) || !pred.same_shape(log_var)) {
    throw DimensionError("gnll_loss: shape mismatch");
  }
  ParamStore none;
  GradTape tape(none);
  const auto p = tape.constant(image_to_matrix(pred));
  const auto s = tape.constant(image_to_matrix(log_var));
  return tape.scalar(tape.gnll(p, s, image_to_matrix(target), mask_span(mask)));
}

std::vector<FrameTransform> estimated_transforms(const InrModel& model, int lr_rows,
                                                 int lr_cols) {
  std::vector<FrameTransform> out(model.num_frames());
  for (int t = 0; t < model.num_frames(); ++t) {
    const Eigen::Vector3d a = model.frame_alignment(t);
    out[t] = {a[0] * lr_cols, a[1] * lr_rows, rad_to_deg(a[2])};
  }
  return out;
}

TrainResult optimize(const Burst& input, const TrainConfig& config) {
  config.validate();
  input.validate();
  const Burst burst = config.multi_frame ? input : input.prefix(1);
  const int frames = burst.num_frames();
  const int rows = burst.lr_height();
  const int cols = burst.lr_width();
  const int s = burst.scale;

  InrModel model =
      init_model(ModelConfig::from_train(config, frames, burst.channels()), config.seed);
  AdamWState state = AdamWState::for_params(model.params());
  AdamWOptions opts;
  opts.weight_decay = config.weight_decay;
  opts.beta1 = config.beta1;
  opts.beta2 = config.beta2;
  opts.eps = config.adam_eps;
  opts.decay_all = config.decay_all;
  const LossNormalization norm =
      config.sum_loss ? LossNormalization::kSum : LossNormalization::kMean;

  std::vector<Eigen::MatrixXd> targets;
  targets.reserve(frames);
  for (const Image& f : burst.frames) targets.push_back(image_to_matrix(f));

  Rng frame_rng = Rng::substream(config.seed, kFrameStream);
  RunLog log;
  log.entries.reserve(config.iterations);
  log.alignment.reserve(config.iterations);

  for (int iter = 1; iter <= config.iterations; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    const int t = frames > 1 ? static_cast<int>(frame_rng.below(frames)) : 0;

    GradTape tape(model.params());
    const LrPrediction pred = render_lr_prediction(tape, model, t, rows, cols, s,
                                                   config.supersample, config.logvar_pooling);
    GradTape::NodeId loss;
    try {
      loss = pred.log_var ? tape.gnll(pred.rgb, *pred.log_var, targets[t], {}, norm)
                          : tape.mse(pred.rgb, targets[t], {}, norm);
    } catch (const NumericalError& e) {
      throw TrainingAborted(std::string(e.what()) + " at iteration " + std::to_string(iter) +
                                ", frame " + std::to_string(t),
                            iter, t);
    }
    const double loss_value = tape.scalar(loss);
    if (!std::isfinite(loss_value)) {
      throw TrainingAborted("non-finite loss at iteration " + std::to_string(iter) +
                                ", frame " + std::to_string(t),
                            iter, t);
    }
    const std::vector<double> grads = tape.backward(loss);
    opts.lr = cosine_lr(iter, config.iterations, config.base_lr, config.min_lr);
    try {
      adamw_step(model.params(), grads, state, opts);
    } catch (const NumericalError& e) {
      throw TrainingAborted(std::string(e.what()) + " at iteration " + std::to_string(iter) +
                                ", frame " + std::to_string(t),
                            iter, t);
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.entries.push_back({iter, t, loss_value, opts.lr, seconds});
    log.alignment.push_back(estimated_transforms(model, rows, cols));
  }
  return {std::move(model), std::move(log)};
}

Image render_hr(const InrModel& model, int hr_rows, int hr_cols) {
  const Eigen::MatrixXd rgb = evaluate_decode(model, to_matrix(make_grid(hr_rows, hr_cols)));
  return matrix_to_image(rgb, hr_rows, hr_cols).clamped();
}

Image render_uncertainty(const InrModel& model, int t, int rows, int cols) {
  if (!model.config().gnll) throw std::logic_error("render_uncertainty requires a GNLL model");
  Eigen::MatrixXd log_var;
  evaluate_frame(model, to_matrix(make_grid(rows, cols)), t, &log_var);
  return matrix_to_image(log_var.array().exp().matrix(), rows, cols);
}

}  // namespace superf
