#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "splatcal/backward.hpp"
#include "splatcal/config.hpp"

namespace splatcal {

// One Adam scalar update. `t` is the 1-based step count.
inline void adam_update(double grad, double& m, double& v, double& x, int t, double lr,
                        double beta1, double beta2, double eps) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad * grad;
  const double m_hat = m / (1.0 - std::pow(beta1, t));
  const double v_hat = v / (1.0 - std::pow(beta2, t));
  x -= lr * m_hat / (std::sqrt(v_hat) + eps);
}

// Exponential interpolation of the position learning rate over training.
inline double position_lr_at(const CalibConfig& cfg, int iter) {
  const double frac = std::min(1.0, static_cast<double>(iter) / cfg.total_iters);
  return cfg.lr_position * std::pow(cfg.lr_position_final / cfg.lr_position, frac);
}

// First/second moment accumulators, one slot per parameter.
struct OptimizerState {
  std::vector<double> m_position, v_position;    // 3 per gaussian
  std::vector<double> m_log_scale, v_log_scale;  // 3 per gaussian
  std::vector<double> m_rotation, v_rotation;    // 4 per gaussian
  std::vector<double> m_opacity, v_opacity;      // 1 per gaussian
  std::vector<double> m_color, v_color;          // 3 per gaussian
  int step_count = 0;
  int skipped_nonfinite = 0;

  void init(size_t n);
  void append(size_t extra);
  void compact(const std::vector<uint8_t>& keep);
  size_t size() const { return m_opacity.size(); }
};

// Adam step with per-group learning rates; quaternions are renormalized and
// colors projected back to [0,1] afterwards. Gaussians with non-finite
// gradients are skipped and counted.
void step(OptimizerState& state, const GaussianGradients& grads,
          std::vector<GaussianPrimitive>& gaussians, int iter, const CalibConfig& cfg);

}  // namespace splatcal
