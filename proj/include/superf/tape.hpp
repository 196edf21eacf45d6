#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "superf/params.hpp"

namespace superf {

enum class LossNormalization { kMean, kSum };

/// Ordered record of forward primitive applications over a fixed set of
/// primitives. Each recorded primitive stores what its vector-Jacobian
/// product needs; backward() replays them in exact reverse order.
///
/// Node values are (rows x points) matrices: channels or features down the
/// rows, one column per coordinate. Images map onto this layout directly.
class GradTape {
 public:
  using NodeId = int;

  explicit GradTape(const ParamStore& params) : params_(&params) {}

  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  // Leaves.
  NodeId constant(Eigen::MatrixXd value);
  /// Snapshot of a parameter segment. Receives gradient only if trainable.
  NodeId parameter(ParamStore::SegmentId segment);

  // Primitives.
  /// u = R(alpha) (v - c) + c + delta for the 2 x N coordinates v; `params`
  /// is a 3-vector (dx, dy, alpha).
  NodeId affine_coords(const Eigen::Matrix2Xd& coords, NodeId params);
  /// [cos(2 pi B u~), sin(2 pi B u~)] with u~ = (u, 1); basis is m x 3, frozen.
  NodeId fourier_features(NodeId coords, const Eigen::MatrixXd& basis);
  NodeId linear(NodeId x, NodeId weight, NodeId bias);
  NodeId relu(NodeId x);
  NodeId slice_rows(NodeId x, int start, int count);
  /// out = scale (.) h + shift per row; `params` is 2C x 1 (scales, shifts).
  NodeId spectral_map(NodeId h, NodeId params);
  /// s x s block mean over columns laid out as a rows x cols grid.
  NodeId avg_pool(NodeId x, int grid_rows, int grid_cols, int s);
  /// log of the block mean of exp(x).
  NodeId log_mean_exp_pool(NodeId x, int grid_rows, int grid_cols, int s);
  NodeId sum_squares(NodeId x);
  /// Mean (or sum) of squared error. `excluded` marks columns to skip.
  NodeId mse(NodeId pred, const Eigen::MatrixXd& target,
             std::span<const std::uint8_t> excluded = {},
             LossNormalization norm = LossNormalization::kMean);
  /// 1/2 [s + r^2 exp(-s)] averaged (or summed) over entries.
  NodeId gnll(NodeId pred, NodeId log_var, const Eigen::MatrixXd& target,
              std::span<const std::uint8_t> excluded = {},
              LossNormalization norm = LossNormalization::kMean);

  const Eigen::MatrixXd& value(NodeId id) const { return nodes_.at(id).value; }
  bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }
  double scalar(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  /// Gradient of the scalar node `loss` with respect to the full parameter
  /// vector (frozen segments are zero). A tape can be replayed only once.
  std::vector<double> backward(NodeId loss);

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    bool requires_grad = false;
    std::function<void()> backward;
  };

  NodeId push(Eigen::MatrixXd value, bool requires_grad);
  Eigen::MatrixXd& grad(NodeId id);

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<std::pair<NodeId, ParamStore::SegmentId>> leaves_;
  std::vector<double>* param_grad_ = nullptr;
  bool replayed_ = false;
};

}  // namespace superf
