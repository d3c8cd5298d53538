#pragma once

#include <Eigen/Dense>
#include <vector>

#include "splatcal/camera.hpp"
#include "splatcal/image.hpp"

namespace splatcal {

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// One anisotropic 3D Gaussian. Opacity is kept as a logit and scale as
// per-axis log standard deviations so optimizer steps stay unconstrained;
// activations happen at use sites.
struct GaussianPrimitive {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d log_scale = Eigen::Vector3d::Zero();
  Eigen::Vector4d rotation = Eigen::Vector4d(1, 0, 0, 0);  // (w, x, y, z), unit norm
  double opacity_logit = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();  // RGB in [0,1]
  double dcp_score = 0.0;                           // accumulated anomaly evidence

  double opacity() const { return sigmoid(opacity_logit); }
  Eigen::Vector3d scales() const { return log_scale.array().exp(); }

  void normalize_rotation() {
    const double n = rotation.norm();
    if (n > 0)
      rotation /= n;
  }

  bool finite() const {
    return position.allFinite() && log_scale.allFinite() && rotation.allFinite() &&
           std::isfinite(opacity_logit) && color.allFinite() && std::isfinite(dcp_score);
  }
};

inline Eigen::Matrix3d rotation_matrix(const Eigen::Vector4d& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

// World-space covariance R * diag(s^2) * R^T.
inline Eigen::Matrix3d world_covariance(const GaussianPrimitive& g) {
  Eigen::Vector4d q = g.rotation;
  const double n = q.norm();
  if (n > 0)
    q /= n;
  const Eigen::Matrix3d r = rotation_matrix(q);
  const Eigen::Vector3d s = g.scales();
  return r * s.cwiseProduct(s).asDiagonal() * r.transpose();
}

// Scene container: Gaussians plus training views (camera + ground truth)
// and a disjoint held-out test rig.
struct Scene {
  std::vector<GaussianPrimitive> gaussians;
  std::vector<Camera> train_cameras;
  std::vector<Image> train_images;
  std::vector<Camera> test_cameras;
  std::vector<Image> test_images;

  void validate() const;
};

}  // namespace splatcal
