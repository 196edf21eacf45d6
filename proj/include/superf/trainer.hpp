#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "superf/burst.hpp"
#include "superf/config.hpp"
#include "superf/model.hpp"
#include "superf/tape.hpp"

namespace superf {

/// Per-iteration record of one optimization run.
struct RunLog {
  struct Entry {
    int iteration = 0;
    int frame = 0;
    double loss = 0.0;
    double lr = 0.0;
    double seconds = 0.0;
  };
  std::vector<Entry> entries;
  /// Alignment estimates after every iteration: [iter][frame] -> (dx, dy) LR
  /// pixels and alpha in degrees.
  std::vector<std::vector<FrameTransform>> alignment;

  std::size_t size() const { return entries.size(); }
  double mean_seconds_per_iteration() const;
};

void to_json(nlohmann::json& j, const RunLog& log);

/// Raised when the loss becomes non-finite during optimization.
class TrainingAborted : public NumericalError {
 public:
  TrainingAborted(const std::string& what, int iteration, int frame)
      : NumericalError(what), iteration_(iteration), frame_(frame) {}
  int iteration() const { return iteration_; }
  int frame() const { return frame_; }

 private:
  int iteration_;
  int frame_;
};

struct LrPrediction {
  GradTape::NodeId rgb = -1;
  std::optional<GradTape::NodeId> log_var;
};

/// Records the LR prediction of frame t. With supersampling the model is
/// evaluated on the (lr_rows * s) x (lr_cols * s) grid and average-pooled;
/// without it the model is evaluated on the LR pixel-center grid directly.
LrPrediction render_lr_prediction(GradTape& tape, const InrModel& model, int t, int lr_rows,
                                  int lr_cols, int s, bool supersample,
                                  LogVarPooling pooling = LogVarPooling::kMeanLog);

/// Convenience: untaped LR prediction as an image (and LR log-variance image).
Image render_lr_image(const InrModel& model, int t, int lr_rows, int lr_cols, int s,
                      bool supersample, Image* log_var = nullptr,
                      LogVarPooling pooling = LogVarPooling::kMeanLog);

/// Image <-> (channels x pixels) matrix, sharing the interleaved layout.
Eigen::MatrixXd image_to_matrix(const Image& img);
Image matrix_to_image(const Eigen::MatrixXd& m, int rows, int cols);

double mse_loss(const Image& pred, const Image& target, const Mask* mask = nullptr);
double gnll_loss(const Image& pred, const Image& log_var, const Image& target,
                 const Mask* mask = nullptr);

struct TrainResult {
  InrModel model;
  RunLog log;
};

/// Fits a model to the burst: one uniformly sampled frame per iteration,
/// AdamW with cosine schedule. Throws TrainingAborted on a non-finite loss.
TrainResult optimize(const Burst& burst, const TrainConfig& config);

/// Base-frame decode on the HR grid, RGB only, clamped to [0,1].
Image render_hr(const InrModel& model, int hr_rows, int hr_cols);

/// exp(log-variance) of frame t on a rows x cols pixel-center grid.
/// Throws std::logic_error for models without log-variance heads.
Image render_uncertainty(const InrModel& model, int t, int rows, int cols);

/// (dx, dy) in LR pixels and alpha in degrees for every frame.
std::vector<FrameTransform> estimated_transforms(const InrModel& model, int lr_rows, int lr_cols);

}  // namespace superf
