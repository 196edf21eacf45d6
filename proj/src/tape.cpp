#include "superf/tape.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fast_trig.hpp"

namespace superf {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

// Per-column inclusion weights and the normalizer for a masked reduction.
Eigen::RowVectorXd column_weights(Eigen::Index cols, std::span<const std::uint8_t> excluded,
                                  Eigen::Index rows, LossNormalization norm, double& scale) {
  Eigen::RowVectorXd w = Eigen::RowVectorXd::Ones(cols);
  if (!excluded.empty()) {
    if (static_cast<Eigen::Index>(excluded.size()) != cols) {
      throw std::invalid_argument("loss mask length does not match prediction");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (excluded[j]) w[j] = 0.0;
    }
  }
  const double count = w.sum() * static_cast<double>(rows);
  if (norm == LossNormalization::kMean) {
    if (count <= 0.0) throw std::invalid_argument("loss mask excludes every pixel");
    scale = 1.0 / count;
  } else {
    scale = 1.0;
  }
  return w;
}

}  // namespace

GradTape::NodeId GradTape::push(Eigen::MatrixXd value, bool requires_grad) {
  if (replayed_) throw std::logic_error("tape already replayed; record a new forward pass");
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

Eigen::MatrixXd& GradTape::grad(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

double GradTape::scalar(NodeId id) const {
  const Eigen::MatrixXd& v = value(id);
  if (v.size() != 1) throw std::invalid_argument("node is not a scalar");
  return v(0, 0);
}

GradTape::NodeId GradTape::constant(Eigen::MatrixXd value) {
  return push(std::move(value), false);
}

GradTape::NodeId GradTape::parameter(ParamStore::SegmentId segment) {
  const Segment& seg = params_->segment(segment);
  const NodeId id = push(Eigen::MatrixXd(params_->matrix(segment)), seg.trainable);
  if (seg.trainable) {
    leaves_.emplace_back(id, segment);
    nodes_[id].backward = [this, id, segment] {
      const Segment& s = params_->segment(segment);
      const Eigen::MatrixXd& g = nodes_[id].grad;
      Eigen::Map<Eigen::MatrixXd>(param_grad_->data() + s.offset, s.rows, s.cols) += g;
    };
  }
  return id;
}

GradTape::NodeId GradTape::affine_coords(const Eigen::Matrix2Xd& coords, NodeId params) {
  const Eigen::MatrixXd& p = value(params);
  if (p.size() != 3) throw std::invalid_argument("affine_coords: expected 3 parameters");
  const double dx = p(0), dy = p(1), alpha = p(2);
  const double c = std::cos(alpha), s = std::sin(alpha);
  Eigen::Matrix2Xd centered = coords.array() - 0.5;
  Eigen::Matrix2d rot;
  rot << c, -s, s, c;
  Eigen::MatrixXd out = rot * centered;
  out.row(0).array() += 0.5 + dx;
  out.row(1).array() += 0.5 + dy;
  const NodeId id = push(std::move(out), requires_grad(params));
  if (nodes_[id].requires_grad) {
    nodes_[id].backward = [this, id, params, centered = std::move(centered), c, s] {
      const Eigen::MatrixXd& g = nodes_[id].grad;
      Eigen::MatrixXd& gp = grad(params);
      gp(0) += g.row(0).sum();
      gp(1) += g.row(1).sum();
      // dR/dalpha = [[-s, -c], [c, -s]]
      const Eigen::RowVectorXd dux = -s * centered.row(0) - c * centered.row(1);
      const Eigen::RowVectorXd duy = c * centered.row(0) - s * centered.row(1);
      gp(2) += g.row(0).dot(dux) + g.row(1).dot(duy);
    };
  }
  return id;
}

GradTape::NodeId GradTape::fourier_features(NodeId coords, const Eigen::MatrixXd& basis) {
  const Eigen::MatrixXd& u = value(coords);
  if (u.rows() != 2 || basis.cols() != 3) {
    throw std::invalid_argument("fourier_features: expected 2 x N coords and m x 3 basis");
  }
  const Eigen::Index m = basis.rows();
  const Eigen::Index n = u.cols();
  Eigen::MatrixXd phase = basis.leftCols<2>() * u;
  phase.colwise() += basis.col(2);
  phase *= kTwoPi;
  Eigen::MatrixXd sines(m, n);
  Eigen::MatrixXd cosines(m, n);
  detail::sincos_array(phase.data(), sines.data(), cosines.data(),
                       static_cast<std::size_t>(phase.size()));
  Eigen::MatrixXd out(2 * m, n);
  out.topRows(m) = cosines;
  out.bottomRows(m) = sines;
  const NodeId id = push(std::move(out), requires_grad(coords));
  if (nodes_[id].requires_grad) {
    nodes_[id].backward = [this, id, coords, m, bxy = Eigen::MatrixXd(basis.leftCols<2>())] {
      const Eigen::MatrixXd& g = nodes_[id].grad;
      const Eigen::MatrixXd& f = nodes_[id].value;
      // d cos = -sin dphi, d sin = cos dphi
      const Eigen::MatrixXd dphase =
          (f.bottomRows(m).array() * -g.topRows(m).array() +
           f.topRows(m).array() * g.bottomRows(m).array()).matrix();
      grad(coords).noalias() += kTwoPi * (bxy.transpose() * dphase);
    };
  }
  return id;
}

GradTape::NodeId GradTape::linear(NodeId x, NodeId weight, NodeId bias) {
  const Eigen::MatrixXd& w = value(weight);
  const Eigen::MatrixXd& b = value(bias);
  const Eigen::MatrixXd& xv = value(x);
  if (w.cols() != xv.rows() || b.rows() != w.rows() || b.cols() != 1) {
    throw std::invalid_argument("linear: shape mismatch");
  }
  Eigen::MatrixXd out(w.rows(), xv.cols());
  out.noalias() = w * xv;
  out.colwise() += b.col(0);
  const bool rg = requires_grad(x) || requires_grad(weight) || requires_grad(bias);
  const NodeId id = push(std::move(out), rg);
  if (rg) {
    nodes_[id].backward = [this, id, x, weight, bias] {
      const Eigen::MatrixXd& g = nodes_[id].grad;
      if (nodes_[weight].requires_grad) grad(weight).noalias() += g * nodes_[x].value.transpose();
      if (nodes_[bias].requires_grad) grad(bias).col(0) += g.rowwise().sum();
      if (nodes_[x].requires_grad) grad(x).noalias() += nodes_[weight].value.transpose() * g;
    };
  }
  return id;
}

GradTape::NodeId GradTape::relu(NodeId x) {
  const NodeId id = push(value(x).cwiseMax(0.0), requires_grad(x));
  if (nodes_[id].requires_grad) {
    nodes_[id].backward = [this, id, x] {
      const Eigen::MatrixXd& g = nodes_[id].grad;
      grad(x).array() += (nodes_[id].value.array() > 0.0).select(g.array(), 0.0);
    };
  }
  return id;
}

GradTape::NodeId GradTape::slice_rows(NodeId x, int start, int count) {
  const Eigen::MatrixXd& xv = value(x);
  if (start < 0 || count <= 0 || start + count > xv.rows()) {
    throw std::invalid_argument("slice_rows: range out of bounds");
  }
  const NodeId id = push(xv.middleRows(start, count), requires_grad(x));
  if (nodes_[id].requires_grad) {
    nodes_[id].backward = [this, id, x, start, count] {
      grad(x).middleRows(start, count) += nodes_[id].grad;
    };
  }
  return id;
}

GradTape::NodeId GradTape::spectral_map(NodeId h, NodeId params) {
  const Eigen::MatrixXd& hv = value(h);
  const Eigen::MatrixXd& p = value(params);
  const Eigen::Index c = hv.rows();
  if (p.size() != 2 * c) throw std::invalid_argument("spectral_map: expected 2C parameters");
  const Eigen::VectorXd scale = p.reshaped().head(c);
  const Eigen::VectorXd shift = p.reshaped().tail(c);
  Eigen::MatrixXd out = scale.asDiagonal() * hv;
  out.colwise() += shift;
  const bool rg = requires_grad(h) || requires_grad(params);
  const NodeId id = push(std::move(out), rg);
  if (rg) {
    nodes_[id].backward = [this, id, h, params, scale, c] {
      const Eigen::MatrixXd& g = nodes_[id].grad;
      if (nodes_[h].requires_grad) grad(h) += scale.asDiagonal() * g;
      if (nodes_[params].requires_grad) {
        Eigen::MatrixXd& gp = grad(params);
        const Eigen::VectorXd gs = (g.array() * nodes_[h].value.array()).rowwise().sum();
        const Eigen::VectorXd go = g.rowwise().sum();
        for (Eigen::Index k = 0; k < c; ++k) {
          gp(k) += gs(k);
          gp(c + k) += go(k);
        }
      }
    };
  }
  return id;
}

GradTape::NodeId GradTape::avg_pool(NodeId x, int grid_rows, int grid_cols, int s) {
  const Eigen::MatrixXd& xv = value(x);
  if (static_cast<Eigen::Index>(grid_rows) * grid_cols != xv.cols() || grid_rows % s != 0 ||
      grid_cols % s != 0) {
    throw std::invalid_argument("avg_pool: grid does not match or is not divisible");
  }
  const int orows = grid_rows / s, ocols = grid_cols / s;
  const double inv = 1.0 / (static_cast<double>(s) * s);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(xv.rows(), static_cast<Eigen::Index>(orows) * ocols);
  for (int i = 0; i < grid_rows; ++i) {
    for (int j = 0; j < grid_cols; ++j) {
      out.col((i / s) * ocols + j / s) += xv.col(static_cast<Eigen::Index>(i) * grid_cols + j);
    }
  }
  out *= inv;
  const NodeId id = push(std::move(out), requires_grad(x));
  if (nodes_[id].requires_grad) {
    nodes_[id].backward = [this, id, x, grid_rows, grid_cols, s, ocols, inv] {
      const Eigen::MatrixXd& g = nodes_[id].grad;
      Eigen::MatrixXd& gx = grad(x);
      for (int i = 0; i < grid_rows; ++i) {
        for (int j = 0; j < grid_cols; ++j) {
          gx.col(static_cast<Eigen::Index>(i) * grid_cols + j) += inv * g.col((i / s) * ocols + j / s);
        }
      }
    };
  }
  return id;
}

GradTape::NodeId GradTape::log_mean_exp_pool(NodeId x, int grid_rows, int grid_cols, int s) {
  const Eigen::MatrixXd& xv = value(x);
  if (static_cast<Eigen::Index>(grid_rows) * grid_cols != xv.cols() || grid_rows % s != 0 ||
      grid_cols % s != 0) {
    throw std::invalid_argument("log_mean_exp_pool: grid does not match or is not divisible");
  }
  const int ocols = grid_cols / s;
  const Eigen::Index nout = static_cast<Eigen::Index>(grid_rows / s) * ocols;
  // Stabilized by the per-block maximum.
  Eigen::MatrixXd block_max = Eigen::MatrixXd::Constant(xv.rows(), nout, -INFINITY);
  for (int i = 0; i < grid_rows; ++i) {
    for (int j = 0; j < grid_cols; ++j) {
      auto dst = block_max.col((i / s) * ocols + j / s);
      dst = dst.cwiseMax(xv.col(static_cast<Eigen::Index>(i) * grid_cols + j));
    }
  }
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(xv.rows(), nout);
  for (int i = 0; i < grid_rows; ++i) {
    for (int j = 0; j < grid_cols; ++j) {
      const Eigen::Index o = (i / s) * ocols + j / s;
      sums.col(o).array() +=
          (xv.col(static_cast<Eigen::Index>(i) * grid_cols + j) - block_max.col(o)).array().exp();
    }
  }
  const double inv = 1.0 / (static_cast<double>(s) * s);
  Eigen::MatrixXd out = ((sums * inv).array().log() + block_max.array()).matrix();
  const NodeId id = push(std::move(out), requires_grad(x));
  if (nodes_[id].requires_grad) {
    nodes_[id].backward = [this, id, x, grid_rows, grid_cols, s, ocols, inv] {
      const Eigen::MatrixXd& g = nodes_[id].grad;
      const Eigen::MatrixXd& y = nodes_[id].value;
      const Eigen::MatrixXd& xv2 = nodes_[x].value;
      Eigen::MatrixXd& gx = grad(x);
      // d/dx_k log(mean exp x) = inv * exp(x_k - y)
      for (int i = 0; i < grid_rows; ++i) {
        for (int j = 0; j < grid_cols; ++j) {
          const Eigen::Index k = static_cast<Eigen::Index>(i) * grid_cols + j;
          const Eigen::Index o = (i / s) * ocols + j / s;
          gx.col(k).array() += inv * g.col(o).array() * (xv2.col(k) - y.col(o)).array().exp();
        }
      }
    };
  }
  return id;
}

GradTape::NodeId GradTape::sum_squares(NodeId x) {
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = value(x).squaredNorm();
  const NodeId id = push(std::move(out), requires_grad(x));
  if (nodes_[id].requires_grad) {
    nodes_[id].backward = [this, id, x] {
      grad(x) += 2.0 * nodes_[id].grad(0, 0) * nodes_[x].value;
    };
  }
  return id;
}

GradTape::NodeId GradTape::mse(NodeId pred, const Eigen::MatrixXd& target,
                               std::span<const std::uint8_t> excluded, LossNormalization norm) {
  const Eigen::MatrixXd& p = value(pred);
  require_same_shape(p, target, "mse");
  double scale = 1.0;
  const Eigen::RowVectorXd w = column_weights(p.cols(), excluded, p.rows(), norm, scale);
  Eigen::MatrixXd residual = p - target;
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = scale * (residual.array().square().colwise().sum() * w.array()).sum();
  const NodeId id = push(std::move(out), requires_grad(pred));
  if (nodes_[id].requires_grad) {
    nodes_[id].backward = [this, id, pred, residual = std::move(residual), w, scale] {
      const double g = nodes_[id].grad(0, 0);
      grad(pred) += (2.0 * g * scale) * (residual * w.asDiagonal());
    };
  }
  return id;
}

GradTape::NodeId GradTape::gnll(NodeId pred, NodeId log_var, const Eigen::MatrixXd& target,
                                std::span<const std::uint8_t> excluded, LossNormalization norm) {
  const Eigen::MatrixXd& p = value(pred);
  const Eigen::MatrixXd& s = value(log_var);
  require_same_shape(p, target, "gnll");
  require_same_shape(p, s, "gnll");
  if (!s.allFinite()) throw NumericalError("gnll: non-finite log-variance");
  double scale = 1.0;
  const Eigen::RowVectorXd w = column_weights(p.cols(), excluded, p.rows(), norm, scale);
  Eigen::MatrixXd residual = p - target;
  Eigen::MatrixXd inv_var = (-s.array()).exp().matrix();
  const Eigen::ArrayXXd terms = s.array() + residual.array().square() * inv_var.array();
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = 0.5 * scale * (terms.colwise().sum() * w.array()).sum();
  const bool rg = requires_grad(pred) || requires_grad(log_var);
  const NodeId id = push(std::move(out), rg);
  if (rg) {
    nodes_[id].backward = [this, id, pred, log_var, residual = std::move(residual),
                           inv_var = std::move(inv_var), w, scale] {
      const double g = nodes_[id].grad(0, 0) * scale;
      if (nodes_[pred].requires_grad) {
        grad(pred) += g * ((residual.array() * inv_var.array()).matrix() * w.asDiagonal());
      }
      if (nodes_[log_var].requires_grad) {
        const Eigen::MatrixXd d =
            (0.5 * (1.0 - residual.array().square() * inv_var.array())).matrix();
        grad(log_var) += g * (d * w.asDiagonal());
      }
    };
  }
  return id;
}

std::vector<double> GradTape::backward(NodeId loss) {
  if (replayed_) throw std::logic_error("tape already replayed; record a new forward pass");
  if (value(loss).size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  replayed_ = true;
  std::vector<double> out(params_->size(), 0.0);
  param_grad_ = &out;
  if (nodes_[loss].requires_grad) {
    grad(loss)(0, 0) = 1.0;
    for (NodeId id = loss; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.requires_grad && n.backward && n.grad.size() != 0) n.backward();
    }
  }
  param_grad_ = nullptr;
  return out;
}

}  // namespace superf
