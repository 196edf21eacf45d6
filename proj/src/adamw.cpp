#include "superf/adamw.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace superf {
namespace {
constexpr std::size_t kNoSlot = static_cast<std::size_t>(-1);
}

AdamWState AdamWState::for_params(const ParamStore& params) {
  AdamWState st;
  std::size_t n = 0;
  for (const Segment& s : params.segments()) {
    if (s.trainable) {
      st.segment_offsets.push_back(n);
      n += s.length();
    } else {
      st.segment_offsets.push_back(kNoSlot);
    }
  }
  st.m.assign(n, 0.0);
  st.v.assign(n, 0.0);
  return st;
}

void adamw_step(ParamStore& params, std::span<const double> grads, AdamWState& state,
                const AdamWOptions& options) {
  if (grads.size() != params.size()) {
    throw std::invalid_argument("adamw_step: gradient length does not match parameters");
  }
  if (state.segment_offsets.size() != params.num_segments()) {
    throw std::invalid_argument("adamw_step: optimizer state built for different parameters");
  }
  // Validate before mutating anything.
  for (std::size_t id = 0; id < params.num_segments(); ++id) {
    const Segment& seg = params.segment(id);
    if (!seg.trainable) continue;
    for (std::size_t k = 0; k < seg.length(); ++k) {
      if (!std::isfinite(grads[seg.offset + k])) {
        throw NumericalError("non-finite gradient in segment '" + seg.name + "' at element " +
                             std::to_string(k));
      }
    }
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  auto& values = params.flat();
  for (std::size_t id = 0; id < params.num_segments(); ++id) {
    const Segment& seg = params.segment(id);
    if (!seg.trainable) continue;
    const std::size_t slot = state.segment_offsets[id];
    if (slot == kNoSlot) throw std::logic_error("adamw_step: trainability changed after init");
    const double lr = options.lr;
    const bool decay = options.decay_all || seg.is_weight_matrix();
    const double decay_factor = decay ? 1.0 - lr * options.weight_decay : 1.0;
    for (std::size_t k = 0; k < seg.length(); ++k) {
      double& p = values[seg.offset + k];
      const double g = grads[seg.offset + k];
      double& m = state.m[slot + k];
      double& v = state.v[slot + k];
      p *= decay_factor;
      m = options.beta1 * m + (1.0 - options.beta1) * g;
      v = options.beta2 * v + (1.0 - options.beta2) * g * g;
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      p -= lr * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

double cosine_lr(int iter, int total, double base, double min) {
  if (total <= 0 || iter < 0 || iter > total) {
    throw std::invalid_argument("cosine_lr: need 0 <= iter <= total, total > 0");
  }
  return min + 0.5 * (base - min) *
                   (1.0 + std::cos(std::numbers::pi * static_cast<double>(iter) / total));
}

}  // namespace superf
