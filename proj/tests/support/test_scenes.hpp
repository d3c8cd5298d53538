#pragma once

#include "splatcal/camera.hpp"
#include "splatcal/gaussian.hpp"
#include "splatcal/rng.hpp"

namespace splatcal::testing {

// Camera at the origin looking down +z.
Camera axis_camera(int width, int height, double fov_deg = 60.0, double near = 0.1,
                   double far = 50.0);

// Scenes for finite-difference gradient checks: wide splats whose 3-sigma
// boxes cover the whole image (no truncation boundary inside the frame),
// depths separated well beyond the FD step, opacities low enough that the
// transmittance floor is never reached. The loss stays smooth at every
// sampled parameter point.
std::vector<GaussianPrimitive> random_fd_gaussians(RandomStream& rng, int count,
                                                   const Camera& camera);

// Unconstrained random scenes for renderer equivalence tests.
std::vector<GaussianPrimitive> random_render_gaussians(RandomStream& rng, int count,
                                                       const Camera& camera);

Image random_image(RandomStream& rng, int width, int height, double lo = 0.0, double hi = 1.0);

// Floater slab in front of an opaque textured surface; flagged splats all lie
// nearer than any surface splat, so every ray is prefix-clean.
struct FloaterField {
  std::vector<GaussianPrimitive> gaussians;
  std::vector<uint8_t> flags;
  Camera camera;
};

FloaterField make_floater_field(RandomStream& rng, int n_floaters, double opacity_lo,
                                double opacity_hi, const Eigen::Vector3d& mean_color,
                                double color_std, bool anti_correlated = false);

}  // namespace splatcal::testing
