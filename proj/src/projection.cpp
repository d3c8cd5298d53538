#include "splatcal/projection.hpp"

#include <algorithm>

namespace splatcal {

ProjectionResult project(const std::vector<GaussianPrimitive>& gaussians, const Camera& camera,
                         const std::vector<uint8_t>* keep) {
  ProjectionResult res;
  res.splats.reserve(gaussians.size());
  const Eigen::Matrix3d& rot = camera.rot;
  for (size_t i = 0; i < gaussians.size(); ++i) {
    if (keep && !(*keep)[i])
      continue;
    const auto& g = gaussians[i];
    const Eigen::Vector3d cam = camera.world_to_cam(g.position);
    const double z = cam.z();
    if (!(z > camera.near && z < camera.far))
      continue;

    Projected2DGaussian p;
    p.depth = z;
    p.source_index = static_cast<int>(i);
    p.mean2d.x() = camera.fx * cam.x() / z + camera.cx;
    p.mean2d.y() = camera.fy * cam.y() / z + camera.cy;

    Eigen::Matrix<double, 2, 3> jac;
    jac << camera.fx / z, 0, -camera.fx * cam.x() / (z * z),
        0, camera.fy / z, -camera.fy * cam.y() / (z * z);
    const Eigen::Matrix3d cov_cam = rot * world_covariance(g) * rot.transpose();
    const Eigen::Matrix2d cov2d = jac * cov_cam * jac.transpose();
    p.cov_xx = cov2d(0, 0) + kCovLowPass;
    p.cov_xy = cov2d(0, 1);
    p.cov_yy = cov2d(1, 1) + kCovLowPass;

    const double det = p.cov_xx * p.cov_yy - p.cov_xy * p.cov_xy;
    if (!(det > 1e-12) || !std::isfinite(det)) {
      ++res.skipped_singular;
      continue;
    }
    // guard band: the splat's own 3-sigma extent around the frustum
    const double mid = 0.5 * (p.cov_xx + p.cov_yy);
    const double lam_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    const double r = kSplatSigmaExtent * std::sqrt(lam_max);
    if (p.mean2d.x() + r < 0 || p.mean2d.x() - r > camera.width || p.mean2d.y() + r < 0 ||
        p.mean2d.y() - r > camera.height)
      continue;
    res.splats.push_back(p);
  }
  std::sort(res.splats.begin(), res.splats.end(),
            [](const Projected2DGaussian& a, const Projected2DGaussian& b) {
              if (a.depth != b.depth)
                return a.depth < b.depth;
              return a.source_index < b.source_index;
            });
  return res;
}

double median_of(std::vector<double> values) {
  require(!values.empty(), "median of empty list");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1)
    return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double median_scene_depth(const std::vector<GaussianPrimitive>& gaussians,
                          const Camera& camera) {
  const ProjectionResult proj = project(gaussians, camera);
  require(!proj.splats.empty(), "no visible gaussians");
  std::vector<double> depths;
  depths.reserve(proj.splats.size());
  for (const auto& s : proj.splats)
    depths.push_back(s.depth);
  return median_of(std::move(depths));
}

}  // namespace splatcal
