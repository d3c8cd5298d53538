#pragma once

#include <optional>
#include <vector>

#include "splatcal/camera.hpp"
#include "splatcal/gaussian.hpp"

namespace splatcal {

// EWA-style 2D footprint of one Gaussian in pixel space.
struct Projected2DGaussian {
  Eigen::Vector2d mean2d = Eigen::Vector2d::Zero();
  double cov_xx = 0, cov_xy = 0, cov_yy = 0;  // after the low-pass floor
  double depth = 0;                           // camera-space z
  int source_index = -1;
};

struct ProjectionResult {
  std::vector<Projected2DGaussian> splats;  // depth-sorted, ties by source_index
  int skipped_singular = 0;
};

// Added to the 2D covariance diagonal before inversion (anti-alias floor).
constexpr double kCovLowPass = 0.3;
// Splats are rasterized within the bounding box of this many sigmas.
constexpr double kSplatSigmaExtent = 3.0;

// Culls Gaussians outside (near, far) or whose 3-sigma box misses the image.
// `keep`, when present, drops masked-out Gaussians before sorting.
ProjectionResult project(const std::vector<GaussianPrimitive>& gaussians, const Camera& camera,
                         const std::vector<uint8_t>* keep = nullptr);

// Median camera-space depth over non-culled Gaussians; even counts average
// the two middle values. Throws when everything is culled.
double median_scene_depth(const std::vector<GaussianPrimitive>& gaussians,
                          const Camera& camera);

double median_of(std::vector<double> values);

}  // namespace splatcal
