#pragma once

#include <vector>

#include "splatcal/camera.hpp"
#include "splatcal/gaussian.hpp"
#include "splatcal/renderer.hpp"

namespace splatcal {

// Per-Gaussian partials of the scalar photometric loss. Culled or
// masked-out Gaussians keep exactly zero entries.
struct GaussianGradients {
  std::vector<Eigen::Vector3d> position;
  std::vector<Eigen::Vector3d> log_scale;
  std::vector<Eigen::Vector4d> rotation;  // projected to the quaternion tangent
  std::vector<double> opacity_logit;
  std::vector<Eigen::Vector3d> color;
  std::vector<double> pos2d_grad_norm;  // |dL/d mean2d|, densification signal

  void resize(size_t n) {
    position.assign(n, Eigen::Vector3d::Zero());
    log_scale.assign(n, Eigen::Vector3d::Zero());
    rotation.assign(n, Eigen::Vector4d::Zero());
    opacity_logit.assign(n, 0.0);
    color.assign(n, Eigen::Vector3d::Zero());
    pos2d_grad_norm.assign(n, 0.0);
  }
  bool finite(size_t i) const {
    return position[i].allFinite() && log_scale[i].allFinite() && rotation[i].allFinite() &&
           std::isfinite(opacity_logit[i]) && color[i].allFinite();
  }
};

struct BackwardResult {
  double loss = 0;
  GaussianGradients grads;
  RenderOutput render;  // the forward pass the gradients correspond to
};

// Analytic gradients of photometric_loss(render(gaussians, camera, keep), gt)
// w.r.t. every unmasked Gaussian's parameters.
BackwardResult backward(const std::vector<GaussianPrimitive>& gaussians, const Camera& camera,
                        const Image& gt, double lambda1, const RenderOptions& options = {},
                        const std::vector<uint8_t>* keep = nullptr,
                        const std::vector<double>* alpha_scale = nullptr);

}  // namespace splatcal
