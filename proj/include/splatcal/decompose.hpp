#pragma once

#include <vector>

#include "splatcal/renderer.hpp"

namespace splatcal {

// Exact split of the rendering equation into floater and surface parts:
// C = C_F + T_F * C_surf on rays where flagged splats precede unflagged ones.
struct FloaterDecomposition {
  Image c_f;                      // aggregated floater color
  std::vector<double> t_f;        // floater-only transmittance per pixel
  Image c_surf;                   // surface rendered from unflagged splats
  Eigen::Vector3d a_est = Eigen::Vector3d::Zero();  // blend-weighted mean floater color
};

FloaterDecomposition decompose(const std::vector<GaussianPrimitive>& gaussians,
                               const Camera& camera, const std::vector<uint8_t>& floater_flags,
                               const RenderOptions& options = {});

// Mean relative error of the ambient-color approximation C_F ~ A * (1 - T_F)
// over floater-touched pixels. Throws when nothing is touched.
double haze_approx_error(const FloaterDecomposition& decomp);

}  // namespace splatcal
