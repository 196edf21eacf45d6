#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "superf/params.hpp"

namespace superf {

struct AdamWOptions {
  double lr = 2e-3;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decay every trainable segment instead of only MLP weight matrices.
  bool decay_all = false;
};

/// Moment estimates over the trainable parameters, concatenated in segment
/// order. Every step updates every trainable segment; a frame that was not
/// sampled sees a zero gradient and keeps coasting on its first moment.
struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  std::vector<std::size_t> segment_offsets;  // into m/v; npos for frozen segments

  static AdamWState for_params(const ParamStore& params);
};

/// One decoupled-weight-decay Adam update. `grads` is aligned with the full
/// parameter vector. Throws NumericalError naming the segment if a gradient
/// entry is not finite; nothing is modified in that case.
void adamw_step(ParamStore& params, std::span<const double> grads, AdamWState& state,
                const AdamWOptions& options);

/// min + (base - min) (1 + cos(pi iter / total)) / 2
double cosine_lr(int iter, int total, double base = 2e-3, double min = 1e-6);

}  // namespace superf
