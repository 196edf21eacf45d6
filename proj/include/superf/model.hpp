#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "superf/config.hpp"
#include "superf/image.hpp"
#include "superf/params.hpp"
#include "superf/tape.hpp"

namespace superf {

/// Random Fourier feature basis: m frequency rows over homogeneous (x, y, 1).
struct FourierEncoding {
  Eigen::MatrixXd basis;  // m x 3
  double sigma = 10.0;

  int dim() const { return 2 * static_cast<int>(basis.rows()); }
};

/// Fourier features for each column of `coords` (2 x N): a 2m x N matrix with
/// cosines in the top m rows and sines in the bottom m rows.
Eigen::MatrixXd encode(const Eigen::Matrix2Xd& coords, const FourierEncoding& enc);

Eigen::Matrix2Xd to_matrix(const CoordGrid& grid);

enum class TransformMode { kDirect, kTransformMlp };

/// Structural description of an InrModel; everything needed to rebuild the
/// parameter layout.
struct ModelConfig {
  int num_frames = 1;
  int channels = 3;
  bool ff_encoding = true;
  double ff_sigma = 10.0;
  int pe_dim = 256;
  int width = 256;
  int depth = 4;
  bool gnll = false;
  TransformMode transform = TransformMode::kDirect;
  bool fixed_base_frame = true;
  bool optimize_alignment = true;
  int transform_width = 32;

  static ModelConfig from_train(const TrainConfig& cfg, int num_frames, int channels);
  /// Rows of the final layer: C for MSE, (T + 1) C with per-frame log-variances.
  int output_dim() const { return gnll ? (num_frames + 1) * channels : channels; }
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Shared coordinate MLP plus per-frame alignment and spectral projection.
/// Frames are indexed from 0; frame 0 is the base frame.
class InrModel {
 public:
  struct FrameOutputs {
    GradTape::NodeId rgb = -1;
    std::optional<GradTape::NodeId> log_var;
  };

  InrModel(ModelConfig config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  int num_frames() const { return config_.num_frames; }
  int channels() const { return config_.channels; }

  FourierEncoding encoding() const;

  /// Records one frame's forward pass at coordinates `coords` (2 x N):
  /// u = A_t v, h = MLP(encode(u)), rgb = rho_t(h_rgb).
  FrameOutputs forward(GradTape& tape, const Eigen::Matrix2Xd& coords, int t) const;

  /// Shared MLP applied to already-transformed coordinates; all head rows.
  GradTape::NodeId decode(GradTape& tape, GradTape::NodeId coords) const;

  /// Current (dx, dy, alpha) estimate for frame t, normalized units and radians.
  Eigen::Vector3d frame_alignment(int t) const;
  /// Current per-band (scales, shifts) for frame t.
  Eigen::VectorXd frame_spectral(int t) const;

  std::optional<ParamStore::SegmentId> alignment_segment(int t) const;
  ParamStore::SegmentId spectral_segment(int t) const { return spectral_.at(t); }

 private:
  void index_segments();
  GradTape::NodeId alignment_node(GradTape& tape, int t) const;
  GradTape::NodeId transform_mlp_node(GradTape& tape, int t) const;

  ModelConfig config_;
  ParamStore params_;
  std::optional<ParamStore::SegmentId> basis_;
  std::vector<ParamStore::SegmentId> weights_;
  std::vector<ParamStore::SegmentId> biases_;
  std::vector<ParamStore::SegmentId> alignment_;
  std::vector<ParamStore::SegmentId> spectral_;
  std::vector<ParamStore::SegmentId> transform_;  // W1, b1, W2, b2
};

/// Fresh model: weights and hidden biases ~ U(+-1/sqrt(fan_in)), zero final
/// bias (so log-variance heads start near unit variance), zero alignment,
/// identity spectral projections, Fourier basis ~ N(0, sigma^2).
/// Deterministic for a given seed.
InrModel init_model(const ModelConfig& config, std::uint64_t seed);

/// Frame-index-conditioned transform network output (dx, dy, alpha) for
/// frame t; frame 0 is identity when the base frame is fixed.
/// Throws std::logic_error in direct mode.
Eigen::Vector3d transform_mlp_g(const InrModel& model, int t);

/// Untaped evaluation in chunks of points. Returns the projected RGB rows and,
/// when the model carries log-variance heads and `log_var` is non-null, the
/// log-variance rows for frame t.
Eigen::MatrixXd evaluate_frame(const InrModel& model, const Eigen::Matrix2Xd& coords, int t,
                               Eigen::MatrixXd* log_var = nullptr);

/// Untaped shared decode (identity transform, no spectral projection), RGB rows.
Eigen::MatrixXd evaluate_decode(const InrModel& model, const Eigen::Matrix2Xd& coords);

nlohmann::json checkpoint_json(const InrModel& model, const nlohmann::json& run_config);
InrModel model_from_checkpoint(const nlohmann::json& j);
void save_checkpoint(const InrModel& model, const nlohmann::json& run_config,
                     const std::filesystem::path& path);
InrModel load_checkpoint(const std::filesystem::path& path);

}  // namespace superf
