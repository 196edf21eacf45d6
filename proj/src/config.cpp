#include "superf/config.hpp"

#include <stdexcept>

namespace superf {

const char* to_string(LossType loss) { return loss == LossType::kMse ? "mse" : "gnll"; }

LossType loss_from_string(const std::string& s) {
  if (s == "mse") return LossType::kMse;
  if (s == "gnll") return LossType::kGnll;
  throw std::invalid_argument("unknown loss '" + s + "' (expected mse or gnll)");
}

void TrainConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
  if (!(base_lr > 0.0) || min_lr < 0.0 || min_lr > base_lr) {
    throw std::invalid_argument("config: need 0 <= min_lr <= base_lr, base_lr > 0");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("config: weight_decay must be >= 0");
  if (pe_dim < 2 || pe_dim % 2 != 0) throw std::invalid_argument("config: pe_dim must be even");
  if (mlp_width < 1 || mlp_depth < 1 || transform_mlp_width < 1) {
    throw std::invalid_argument("config: MLP sizes must be positive");
  }
  if (!(ff_sigma > 0.0)) throw std::invalid_argument("config: ff_sigma must be > 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{
      {"iterations", c.iterations},
      {"base_lr", c.base_lr},
      {"min_lr", c.min_lr},
      {"weight_decay", c.weight_decay},
      {"betas", {c.beta1, c.beta2}},
      {"adam_eps", c.adam_eps},
      {"decay_all", c.decay_all},
      {"loss", to_string(c.loss)},
      {"logvar_pooling", c.logvar_pooling == LogVarPooling::kMeanLog ? "mean_log" : "log_mean"},
      {"sum_loss", c.sum_loss},
      {"ff_sigma", c.ff_sigma},
      {"pe_dim", c.pe_dim},
      {"mlp_width", c.mlp_width},
      {"mlp_depth", c.mlp_depth},
      {"transform_mlp_width", c.transform_mlp_width},
      {"ff_encoding", c.ff_encoding},
      {"multi_frame", c.multi_frame},
      {"align", c.align},
      {"direct_t", c.direct_t},
      {"supersample", c.supersample},
      {"fixed_base_frame", c.fixed_base_frame},
      {"seed", c.seed},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const char* known[] = {"iterations", "base_lr", "min_lr", "weight_decay", "betas",
                                "adam_eps", "decay_all", "loss", "logvar_pooling", "sum_loss",
                                "ff_sigma", "pe_dim", "mlp_width", "mlp_depth",
                                "transform_mlp_width", "ff_encoding", "multi_frame", "align",
                                "direct_t", "supersample", "fixed_base_frame", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw std::invalid_argument("config: unknown train option '" + key + "'");
    }
  }
  TrainConfig d;
  c.iterations = j.value("iterations", d.iterations);
  c.base_lr = j.value("base_lr", d.base_lr);
  c.min_lr = j.value("min_lr", d.min_lr);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  if (j.contains("betas")) {
    const auto& b = j.at("betas");
    if (!b.is_array() || b.size() != 2) throw std::invalid_argument("config: betas must be [b1, b2]");
    c.beta1 = b[0].get<double>();
    c.beta2 = b[1].get<double>();
  }
  c.adam_eps = j.value("adam_eps", d.adam_eps);
  c.decay_all = j.value("decay_all", d.decay_all);
  c.loss = loss_from_string(j.value("loss", std::string(to_string(d.loss))));
  const std::string pooling = j.value("logvar_pooling", std::string("mean_log"));
  if (pooling == "mean_log") c.logvar_pooling = LogVarPooling::kMeanLog;
  else if (pooling == "log_mean") c.logvar_pooling = LogVarPooling::kLogMean;
  else throw std::invalid_argument("config: logvar_pooling must be mean_log or log_mean");
  c.sum_loss = j.value("sum_loss", d.sum_loss);
  c.ff_sigma = j.value("ff_sigma", d.ff_sigma);
  c.pe_dim = j.value("pe_dim", d.pe_dim);
  c.mlp_width = j.value("mlp_width", d.mlp_width);
  c.mlp_depth = j.value("mlp_depth", d.mlp_depth);
  c.transform_mlp_width = j.value("transform_mlp_width", d.transform_mlp_width);
  c.ff_encoding = j.value("ff_encoding", d.ff_encoding);
  c.multi_frame = j.value("multi_frame", d.multi_frame);
  c.align = j.value("align", d.align);
  c.direct_t = j.value("direct_t", d.direct_t);
  c.supersample = j.value("supersample", d.supersample);
  c.fixed_base_frame = j.value("fixed_base_frame", d.fixed_base_frame);
  c.seed = j.value("seed", d.seed);
  c.validate();
}

void to_json(nlohmann::json& j, const BurstSpec& s) {
  j = nlohmann::json{
      {"num_frames", s.num_frames},
      {"scale", s.scale},
      {"max_shift", s.max_shift},
      {"max_rotation", s.max_rotation},
      {"noise_sigma", s.noise_sigma},
      {"spectral_scale_range", {s.spectral_scale_range.first, s.spectral_scale_range.second}},
      {"spectral_shift_range", {s.spectral_shift_range.first, s.spectral_shift_range.second}},
      {"occlusion_prob", s.occlusion_prob},
      {"occlusion_max_frac", s.occlusion_max_frac},
      {"seed", s.seed},
  };
}

void from_json(const nlohmann::json& j, BurstSpec& s) {
  BurstSpec d;
  s.num_frames = j.value("num_frames", d.num_frames);
  s.scale = j.value("scale", d.scale);
  s.max_shift = j.value("max_shift", d.max_shift);
  s.max_rotation = j.value("max_rotation", d.max_rotation);
  s.noise_sigma = j.value("noise_sigma", d.noise_sigma);
  if (j.contains("spectral_scale_range")) {
    s.spectral_scale_range = {j["spectral_scale_range"][0].get<double>(),
                              j["spectral_scale_range"][1].get<double>()};
  }
  if (j.contains("spectral_shift_range")) {
    s.spectral_shift_range = {j["spectral_shift_range"][0].get<double>(),
                              j["spectral_shift_range"][1].get<double>()};
  }
  s.occlusion_prob = j.value("occlusion_prob", d.occlusion_prob);
  s.occlusion_max_frac = j.value("occlusion_max_frac", d.occlusion_max_frac);
  s.seed = j.value("seed", d.seed);
  s.validate();
}

void to_json(nlohmann::json& j, const EvalOptions& e) {
  j = nlohmann::json{{"brute_align", e.brute_align},
                     {"color_match", e.color_match},
                     {"crop_margin", e.crop_margin}};
}

void from_json(const nlohmann::json& j, EvalOptions& e) {
  EvalOptions d;
  e.brute_align = j.value("brute_align", d.brute_align);
  e.color_match = j.value("color_match", d.color_match);
  e.crop_margin = j.value("crop_margin", d.crop_margin);
}

void to_json(nlohmann::json& j, const FrameTransform& t) {
  j = nlohmann::json{{"dx", t.dx}, {"dy", t.dy}, {"alpha_deg", t.alpha}};
}

void from_json(const nlohmann::json& j, FrameTransform& t) {
  t.dx = j.at("dx").get<double>();
  t.dy = j.at("dy").get<double>();
  t.alpha = j.at("alpha_deg").get<double>();
}

std::uint64_t config_hash(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace superf
