#include "superf/model.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fast_trig.hpp"
#include "superf/rng.hpp"

namespace superf {
namespace {

constexpr const char* kCheckpointFormat = "superf-checkpoint-v1";
constexpr Eigen::Index kEvalChunk = 4096;

std::string layer_name(const char* prefix, int layer, const char* what) {
  return std::string(prefix) + "." + std::to_string(layer) + "." + what;
}

void fill_uniform(std::span<double> values, double bound, Rng& rng) {
  for (double& v : values) v = rng.uniform(-bound, bound);
}

}  // namespace

Eigen::MatrixXd encode(const Eigen::Matrix2Xd& coords, const FourierEncoding& enc) {
  const Eigen::Index m = enc.basis.rows();
  Eigen::MatrixXd phase = enc.basis.leftCols<2>() * coords;
  phase.colwise() += enc.basis.col(2);
  phase *= 2.0 * std::numbers::pi;
  Eigen::MatrixXd sines(m, coords.cols());
  Eigen::MatrixXd cosines(m, coords.cols());
  detail::sincos_array(phase.data(), sines.data(), cosines.data(),
                       static_cast<std::size_t>(phase.size()));
  Eigen::MatrixXd out(2 * m, coords.cols());
  out.topRows(m) = cosines;
  out.bottomRows(m) = sines;
  return out;
}

Eigen::Matrix2Xd to_matrix(const CoordGrid& grid) {
  Eigen::Matrix2Xd out(2, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out(0, static_cast<Eigen::Index>(k)) = grid.points[k].x;
    out(1, static_cast<Eigen::Index>(k)) = grid.points[k].y;
  }
  return out;
}

ModelConfig ModelConfig::from_train(const TrainConfig& cfg, int num_frames, int channels) {
  ModelConfig m;
  m.num_frames = num_frames;
  m.channels = channels;
  m.ff_encoding = cfg.ff_encoding;
  m.ff_sigma = cfg.ff_sigma;
  m.pe_dim = cfg.pe_dim;
  m.width = cfg.mlp_width;
  m.depth = cfg.mlp_depth;
  m.gnll = cfg.loss == LossType::kGnll;
  m.transform = cfg.direct_t ? TransformMode::kDirect : TransformMode::kTransformMlp;
  m.fixed_base_frame = cfg.fixed_base_frame;
  m.optimize_alignment = cfg.align;
  m.transform_width = cfg.transform_mlp_width;
  return m;
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"num_frames", c.num_frames},
                     {"channels", c.channels},
                     {"ff_encoding", c.ff_encoding},
                     {"ff_sigma", c.ff_sigma},
                     {"pe_dim", c.pe_dim},
                     {"width", c.width},
                     {"depth", c.depth},
                     {"gnll", c.gnll},
                     {"transform", c.transform == TransformMode::kDirect ? "direct" : "mlp"},
                     {"fixed_base_frame", c.fixed_base_frame},
                     {"optimize_alignment", c.optimize_alignment},
                     {"transform_width", c.transform_width}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.num_frames = j.at("num_frames").get<int>();
  c.channels = j.at("channels").get<int>();
  c.ff_encoding = j.at("ff_encoding").get<bool>();
  c.ff_sigma = j.at("ff_sigma").get<double>();
  c.pe_dim = j.at("pe_dim").get<int>();
  c.width = j.at("width").get<int>();
  c.depth = j.at("depth").get<int>();
  c.gnll = j.at("gnll").get<bool>();
  c.transform = j.at("transform").get<std::string>() == "direct" ? TransformMode::kDirect
                                                                  : TransformMode::kTransformMlp;
  c.fixed_base_frame = j.at("fixed_base_frame").get<bool>();
  c.optimize_alignment = j.at("optimize_alignment").get<bool>();
  c.transform_width = j.at("transform_width").get<int>();
}

InrModel::InrModel(ModelConfig config, ParamStore params)
    : config_(config), params_(std::move(params)) {
  index_segments();
}

void InrModel::index_segments() {
  if (config_.ff_encoding) basis_ = params_.find("fourier_basis");
  weights_.clear();
  biases_.clear();
  for (int l = 0; l < config_.depth; ++l) {
    weights_.push_back(params_.find(layer_name("mlp", l, "weight")));
    biases_.push_back(params_.find(layer_name("mlp", l, "bias")));
  }
  alignment_.clear();
  spectral_.clear();
  transform_.clear();
  for (int t = 0; t < config_.num_frames; ++t) {
    if (config_.transform == TransformMode::kDirect) {
      alignment_.push_back(params_.find("align." + std::to_string(t)));
    }
    spectral_.push_back(params_.find("spectral." + std::to_string(t)));
  }
  if (config_.transform == TransformMode::kTransformMlp) {
    for (int l = 0; l < 2; ++l) {
      transform_.push_back(params_.find(layer_name("tmlp", l, "weight")));
      transform_.push_back(params_.find(layer_name("tmlp", l, "bias")));
    }
  }
}

FourierEncoding InrModel::encoding() const {
  if (!basis_) throw std::logic_error("model has no Fourier encoding");
  return {Eigen::MatrixXd(params_.matrix(*basis_)), config_.ff_sigma};
}

std::optional<ParamStore::SegmentId> InrModel::alignment_segment(int t) const {
  if (config_.transform != TransformMode::kDirect) return std::nullopt;
  return alignment_.at(t);
}

GradTape::NodeId InrModel::transform_mlp_node(GradTape& tape, int t) const {
  Eigen::MatrixXd input(1, 1);
  input(0, 0) = static_cast<double>(t + 1) / config_.num_frames;
  const auto x = tape.constant(std::move(input));
  const auto h = tape.relu(
      tape.linear(x, tape.parameter(transform_[0]), tape.parameter(transform_[1])));
  return tape.linear(h, tape.parameter(transform_[2]), tape.parameter(transform_[3]));
}

GradTape::NodeId InrModel::alignment_node(GradTape& tape, int t) const {
  if (config_.transform == TransformMode::kDirect) return tape.parameter(alignment_.at(t));
  if (t == 0 && config_.fixed_base_frame) return tape.constant(Eigen::MatrixXd::Zero(3, 1));
  return transform_mlp_node(tape, t);
}

InrModel::FrameOutputs InrModel::forward(GradTape& tape, const Eigen::Matrix2Xd& coords,
                                         int t) const {
  if (t < 0 || t >= config_.num_frames) {
    throw std::out_of_range("frame index " + std::to_string(t) + " outside [0, " +
                            std::to_string(config_.num_frames) + ")");
  }
  const bool fixed_base = t == 0 && config_.fixed_base_frame;
  GradTape::NodeId u;
  if (fixed_base) {
    u = tape.constant(coords);
  } else {
    u = tape.affine_coords(coords, alignment_node(tape, t));
  }

  const GradTape::NodeId x = decode(tape, u);

  FrameOutputs out;
  const int c = config_.channels;
  const auto rgb = config_.gnll ? tape.slice_rows(x, 0, c) : x;
  out.rgb = fixed_base ? rgb : tape.spectral_map(rgb, tape.parameter(spectral_[t]));
  if (config_.gnll) out.log_var = tape.slice_rows(x, c * (t + 1), c);
  return out;
}

GradTape::NodeId InrModel::decode(GradTape& tape, GradTape::NodeId coords) const {
  GradTape::NodeId x =
      config_.ff_encoding
          ? tape.fourier_features(coords, Eigen::MatrixXd(params_.matrix(*basis_)))
          : coords;
  for (int l = 0; l < config_.depth; ++l) {
    x = tape.linear(x, tape.parameter(weights_[l]), tape.parameter(biases_[l]));
    if (l + 1 < config_.depth) x = tape.relu(x);
  }
  return x;
}

Eigen::Vector3d InrModel::frame_alignment(int t) const {
  if (t < 0 || t >= config_.num_frames) throw std::out_of_range("frame index out of range");
  if (config_.transform == TransformMode::kDirect) {
    const auto v = params_.values(alignment_[t]);
    return {v[0], v[1], v[2]};
  }
  return transform_mlp_g(*this, t);
}

Eigen::VectorXd InrModel::frame_spectral(int t) const {
  const auto v = params_.values(spectral_.at(t));
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

InrModel init_model(const ModelConfig& config, std::uint64_t seed) {
  if (config.num_frames < 1 || config.channels < 1 || config.depth < 1 || config.width < 1) {
    throw std::invalid_argument("init_model: invalid model configuration");
  }
  Rng rng = Rng::substream(seed, 0x5eed);
  ParamStore params;

  int in_dim = 2;
  if (config.ff_encoding) {
    if (config.pe_dim % 2 != 0) throw std::invalid_argument("init_model: pe_dim must be even");
    const auto id = params.add("fourier_basis", config.pe_dim / 2, 3,
                               SegmentKind::kFourierBasis, false);
    for (double& v : params.values(id)) v = config.ff_sigma * rng.normal();
    in_dim = config.pe_dim;
  }

  for (int l = 0; l < config.depth; ++l) {
    const bool last = l + 1 == config.depth;
    const int out_dim = last ? config.output_dim() : config.width;
    const auto w = params.add(layer_name("mlp", l, "weight"), out_dim, in_dim,
                              SegmentKind::kMlpWeight, true);
    // Same bounds as torch.nn.Linear's default initialization.
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
    fill_uniform(params.values(w), bound, rng);
    const auto b =
        params.add(layer_name("mlp", l, "bias"), out_dim, 1, SegmentKind::kMlpBias, true);
    if (!last) fill_uniform(params.values(b), bound, rng);
    in_dim = out_dim;
  }

  const bool direct = config.transform == TransformMode::kDirect;
  for (int t = 0; t < config.num_frames; ++t) {
    const bool base_fixed = t == 0 && config.fixed_base_frame;
    if (direct) {
      params.add("align." + std::to_string(t), 3, 1, SegmentKind::kAlignment,
                 config.optimize_alignment && !base_fixed);
    }
    const auto sp = params.add("spectral." + std::to_string(t), 2 * config.channels, 1,
                               SegmentKind::kSpectral, !base_fixed);
    auto v = params.values(sp);
    for (int c = 0; c < config.channels; ++c) v[c] = 1.0;
  }

  if (!direct) {
    const int w = config.transform_width;
    const bool train = config.optimize_alignment;
    const auto w1 = params.add("tmlp.0.weight", w, 1, SegmentKind::kTransformWeight, train);
    const auto b1 = params.add("tmlp.0.bias", w, 1, SegmentKind::kTransformBias, train);
    fill_uniform(params.values(w1), 1.0, rng);
    fill_uniform(params.values(b1), 1.0, rng);
    params.add("tmlp.1.weight", 3, w, SegmentKind::kTransformWeight, train);
    params.add("tmlp.1.bias", 3, 1, SegmentKind::kTransformBias, train);
  }
  return InrModel(config, std::move(params));
}

Eigen::Vector3d transform_mlp_g(const InrModel& model, int t) {
  if (model.config().transform != TransformMode::kTransformMlp) {
    throw std::logic_error("transform_mlp_g called on a direct-parameterized model");
  }
  if (t < 0 || t >= model.num_frames()) throw std::out_of_range("frame index out of range");
  if (t == 0 && model.config().fixed_base_frame) return Eigen::Vector3d::Zero();
  const ParamStore& p = model.params();
  const double x = static_cast<double>(t + 1) / model.num_frames();
  const Eigen::VectorXd h =
      (p.matrix(p.find("tmlp.0.weight")) * x + p.matrix(p.find("tmlp.0.bias"))).cwiseMax(0.0);
  return p.matrix(p.find("tmlp.1.weight")) * h + p.matrix(p.find("tmlp.1.bias"));
}

Eigen::MatrixXd evaluate_frame(const InrModel& model, const Eigen::Matrix2Xd& coords, int t,
                               Eigen::MatrixXd* log_var) {
  const Eigen::Index n = coords.cols();
  const int c = model.channels();
  Eigen::MatrixXd rgb(c, n);
  const bool want_var = log_var != nullptr && model.config().gnll;
  if (want_var) log_var->resize(c, n);
  for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
    const Eigen::Index len = std::min(kEvalChunk, n - start);
    GradTape tape(model.params());
    const auto out = model.forward(tape, coords.middleCols(start, len), t);
    rgb.middleCols(start, len) = tape.value(out.rgb);
    if (want_var) log_var->middleCols(start, len) = tape.value(*out.log_var);
  }
  return rgb;
}

Eigen::MatrixXd evaluate_decode(const InrModel& model, const Eigen::Matrix2Xd& coords) {
  const Eigen::Index n = coords.cols();
  const int c = model.channels();
  Eigen::MatrixXd rgb(c, n);
  for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
    const Eigen::Index len = std::min(kEvalChunk, n - start);
    GradTape tape(model.params());
    const auto h = model.decode(tape, tape.constant(coords.middleCols(start, len)));
    rgb.middleCols(start, len) = tape.value(h).topRows(c);
  }
  return rgb;
}

nlohmann::json checkpoint_json(const InrModel& model, const nlohmann::json& run_config) {
  nlohmann::json segs = nlohmann::json::array();
  const ParamStore& p = model.params();
  for (std::size_t id = 0; id < p.num_segments(); ++id) {
    const Segment& s = p.segment(id);
    const auto v = p.values(id);
    segs.push_back({{"name", s.name},
                    {"kind", to_string(s.kind)},
                    {"rows", s.rows},
                    {"cols", s.cols},
                    {"trainable", s.trainable},
                    {"values", std::vector<double>(v.begin(), v.end())}});
  }
  return {{"format", kCheckpointFormat},
          {"model", model.config()},
          {"run_config", run_config},
          {"config_hash", config_hash(run_config)},
          {"segments", std::move(segs)}};
}

InrModel model_from_checkpoint(const nlohmann::json& j) {
  if (j.value("format", std::string()) != kCheckpointFormat) {
    throw std::invalid_argument("not a superf checkpoint");
  }
  const ModelConfig cfg = j.at("model").get<ModelConfig>();
  InrModel model = init_model(cfg, 0);
  ParamStore& p = model.params();
  const auto& segs = j.at("segments");
  if (segs.size() != p.num_segments()) {
    throw std::invalid_argument("checkpoint segment count does not match model layout");
  }
  for (std::size_t id = 0; id < segs.size(); ++id) {
    const auto& s = segs[id];
    const Segment& seg = p.segment(id);
    if (s.at("name").get<std::string>() != seg.name || s.at("rows").get<int>() != seg.rows ||
        s.at("cols").get<int>() != seg.cols) {
      throw std::invalid_argument("checkpoint segment '" + s.at("name").get<std::string>() +
                                  "' does not match model layout");
    }
    const auto values = s.at("values").get<std::vector<double>>();
    if (values.size() != seg.length()) throw std::invalid_argument("checkpoint segment length");
    std::copy(values.begin(), values.end(), p.values(id).begin());
    p.set_trainable(id, s.at("trainable").get<bool>());
  }
  return model;
}

void save_checkpoint(const InrModel& model, const nlohmann::json& run_config,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_json(model, run_config).dump() << "\n";
}

InrModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  return model_from_checkpoint(nlohmann::json::parse(in));
}

}  // namespace superf
