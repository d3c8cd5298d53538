#pragma once

#include <Eigen/Dense>

#include "splatcal/error.hpp"

namespace splatcal {

// Pinhole camera. Extrinsics map world points into the camera frame:
// cam = rot * p + trans, with +z looking forward and pixel coordinates
// u = fx*x/z + cx, v = fy*y/z + cy measured in pixel-center space.
struct Camera {
  int id = 0;
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;
  double near = 0.01, far = 100.0;
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Eigen::Vector3d trans = Eigen::Vector3d::Zero();

  Eigen::Vector3d world_to_cam(const Eigen::Vector3d& p) const { return rot * p + trans; }

  Eigen::Vector3d center() const { return -rot.transpose() * trans; }

  void validate() const {
    require(width >= 8 && height >= 8, "camera %d: dimensions %dx%d below minimum 8", id, width,
            height);
    require(fx > 0 && fy > 0, "camera %d: non-positive focal length", id);
    require(near > 0 && near < far, "camera %d: invalid clip range [%g, %g]", id, near, far);
    const double ortho = (rot.transpose() * rot - Eigen::Matrix3d::Identity())
                             .cwiseAbs()
                             .maxCoeff();
    require(ortho <= 1e-6, "camera %d: extrinsic rotation not orthonormal (err %g)", id, ortho);
  }
};

// Rows of the returned rotation are the camera axes (right, down-ish, forward).
inline Camera make_look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                           const Eigen::Vector3d& up, double fov_deg, int width, int height,
                           double near, double far) {
  Camera cam;
  const Eigen::Vector3d z = (target - eye).normalized();
  Eigen::Vector3d x = up.cross(z);
  require(x.norm() > 1e-9, "look-at direction parallel to up vector");
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  cam.rot.row(0) = x;
  cam.rot.row(1) = y;
  cam.rot.row(2) = z;
  cam.trans = -cam.rot * eye;
  cam.width = width;
  cam.height = height;
  const double f = 0.5 * width / std::tan(0.5 * fov_deg * M_PI / 180.0);
  cam.fx = cam.fy = f;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.near = near;
  cam.far = far;
  return cam;
}

}  // namespace splatcal
