#include "splatcal/adam.hpp"

#include <algorithm>

namespace splatcal {

void OptimizerState::init(size_t n) {
  m_position.assign(n * 3, 0.0);
  v_position.assign(n * 3, 0.0);
  m_log_scale.assign(n * 3, 0.0);
  v_log_scale.assign(n * 3, 0.0);
  m_rotation.assign(n * 4, 0.0);
  v_rotation.assign(n * 4, 0.0);
  m_opacity.assign(n, 0.0);
  v_opacity.assign(n, 0.0);
  m_color.assign(n * 3, 0.0);
  v_color.assign(n * 3, 0.0);
  step_count = 0;
  skipped_nonfinite = 0;
}

void OptimizerState::append(size_t extra) {
  m_position.resize(m_position.size() + extra * 3, 0.0);
  v_position.resize(v_position.size() + extra * 3, 0.0);
  m_log_scale.resize(m_log_scale.size() + extra * 3, 0.0);
  v_log_scale.resize(v_log_scale.size() + extra * 3, 0.0);
  m_rotation.resize(m_rotation.size() + extra * 4, 0.0);
  v_rotation.resize(v_rotation.size() + extra * 4, 0.0);
  m_opacity.resize(m_opacity.size() + extra, 0.0);
  v_opacity.resize(v_opacity.size() + extra, 0.0);
  m_color.resize(m_color.size() + extra * 3, 0.0);
  v_color.resize(v_color.size() + extra * 3, 0.0);
}

namespace {

void compact_group(std::vector<double>& vec, const std::vector<uint8_t>& keep, int stride) {
  size_t dst = 0;
  for (size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i])
      continue;
    for (int k = 0; k < stride; ++k)
      vec[dst * stride + k] = vec[i * stride + k];
    ++dst;
  }
  vec.resize(dst * stride);
}

}  // namespace

void OptimizerState::compact(const std::vector<uint8_t>& keep) {
  compact_group(m_position, keep, 3);
  compact_group(v_position, keep, 3);
  compact_group(m_log_scale, keep, 3);
  compact_group(v_log_scale, keep, 3);
  compact_group(m_rotation, keep, 4);
  compact_group(v_rotation, keep, 4);
  compact_group(m_opacity, keep, 1);
  compact_group(v_opacity, keep, 1);
  compact_group(m_color, keep, 3);
  compact_group(v_color, keep, 3);
}

void step(OptimizerState& state, const GaussianGradients& grads,
          std::vector<GaussianPrimitive>& gaussians, int iter, const CalibConfig& cfg) {
  require(state.size() == gaussians.size(), "optimizer state size %zu != gaussian count %zu",
          state.size(), gaussians.size());
  ++state.step_count;
  const int t = state.step_count;
  const double lr_pos = position_lr_at(cfg, iter);
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2, eps = cfg.adam_eps;

  for (size_t i = 0; i < gaussians.size(); ++i) {
    if (!grads.finite(i)) {
      ++state.skipped_nonfinite;
      continue;
    }
    GaussianPrimitive& g = gaussians[i];
    for (int k = 0; k < 3; ++k) {
      adam_update(grads.position[i][k], state.m_position[i * 3 + k],
                  state.v_position[i * 3 + k], g.position[k], t, lr_pos, b1, b2, eps);
      adam_update(grads.log_scale[i][k], state.m_log_scale[i * 3 + k],
                  state.v_log_scale[i * 3 + k], g.log_scale[k], t, cfg.lr_scale, b1, b2, eps);
      adam_update(grads.color[i][k], state.m_color[i * 3 + k], state.v_color[i * 3 + k],
                  g.color[k], t, cfg.lr_color, b1, b2, eps);
    }
    for (int k = 0; k < 4; ++k)
      adam_update(grads.rotation[i][k], state.m_rotation[i * 4 + k],
                  state.v_rotation[i * 4 + k], g.rotation[k], t, cfg.lr_rotation, b1, b2, eps);
    adam_update(grads.opacity_logit[i], state.m_opacity[i], state.v_opacity[i],
                g.opacity_logit, t, cfg.lr_opacity, b1, b2, eps);
    g.normalize_rotation();
    for (int k = 0; k < 3; ++k)
      g.color[k] = std::clamp(g.color[k], 0.0, 1.0);
  }
}

}  // namespace splatcal
