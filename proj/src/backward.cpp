#include "splatcal/backward.hpp"

#include <cmath>

#include "splatcal/loss.hpp"

namespace splatcal {

namespace {

// Gradients w.r.t. one splat's 2D quantities, accumulated over pixels.
struct SplatGrad2D {
  double mean[2] = {0, 0};
  double conic[3] = {0, 0, 0};  // A, B, C of the inverse covariance
  double alpha = 0;             // activated opacity
  double color[3] = {0, 0, 0};
};

// d(rotation matrix)/d(quaternion component), at a unit quaternion.
Eigen::Matrix3d rotation_partial(const Eigen::Vector4d& q, int k) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Eigen::Matrix3d m;
  switch (k) {
    case 0:
      m << 0, -z, y, z, 0, -x, -y, x, 0;
      break;
    case 1:
      m << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
      break;
    case 2:
      m << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
      break;
    default:
      m << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
      break;
  }
  return 2.0 * m;
}

}  // namespace

BackwardResult backward(const std::vector<GaussianPrimitive>& gaussians, const Camera& camera,
                        const Image& gt, double lambda1, const RenderOptions& options,
                        const std::vector<uint8_t>* keep,
                        const std::vector<double>* alpha_scale) {
  if (keep)
    require(keep->size() == gaussians.size(), "mask length %zu != gaussian count %zu",
            keep->size(), gaussians.size());
  const ProjectionResult proj = project(gaussians, camera, keep);
  const RasterPlan plan = build_raster_plan(proj.splats, gaussians, camera, alpha_scale);

  BackwardResult res;
  res.render = composite_forward(plan, camera, options, gaussians.size());
  res.render.skipped_singular = proj.skipped_singular;
  res.grads.resize(gaussians.size());

  Image pixel_grad;
  res.loss = photometric_loss_backward(res.render.color, gt, lambda1, &pixel_grad);

  const int n_tiles = plan.tiles_x * plan.tiles_y;
  std::vector<std::vector<SplatGrad2D>> tile_grads(n_tiles);

  parallel_tiles(n_tiles, options.threads, [&](int tile) {
    const auto& list = plan.tile_splats[tile];
    auto& grads = tile_grads[tile];
    grads.assign(list.size(), SplatGrad2D{});
    const int tx = tile % plan.tiles_x, ty = tile / plan.tiles_x;
    const int px0 = tx * kTileSize, px1 = std::min(camera.width, px0 + kTileSize);
    const int py0 = ty * kTileSize, py1 = std::min(camera.height, py0 + kTileSize);
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        const double cpix[3] = {res.render.color.at(py, px, 0), res.render.color.at(py, px, 1),
                                res.render.color.at(py, px, 2)};
        const double gpix[3] = {pixel_grad.at(py, px, 0), pixel_grad.at(py, px, 1),
                                pixel_grad.at(py, px, 2)};
        double t = 1.0;
        double prefix[3] = {0, 0, 0};
        const double cx = px + 0.5, cy = py + 0.5;
        for (size_t li = 0; li < list.size(); ++li) {
          const PreparedSplat& s = plan.splats[list[li]];
          if (px < s.x0 || px > s.x1 || py < s.y0 || py > s.y1)
            continue;
          const double dx = cx - s.mean_x, dy = cy - s.mean_y;
          const double power =
              -0.5 * (s.conic_a * dx * dx + 2.0 * s.conic_b * dx * dy + s.conic_c * dy * dy);
          const double gauss = std::exp(power);
          const double a_raw = s.alpha * gauss;
          const double a = std::min(kAlphaClamp, a_raw);
          if (a <= 0)
            continue;
          const double w = a * t;
          SplatGrad2D& sg = grads[li];
          double d_a = 0;
          for (int c = 0; c < 3; ++c) {
            sg.color[c] += gpix[c] * w;
            const double s_after = cpix[c] - prefix[c] - w * s.color[c];
            d_a += gpix[c] * (t * s.color[c] - s_after / (1.0 - a));
            prefix[c] += w * s.color[c];
          }
          if (a_raw < kAlphaClamp) {
            sg.alpha += d_a * gauss;
            const double d_power = d_a * s.alpha * gauss;
            sg.conic[0] += d_power * (-0.5 * dx * dx);
            sg.conic[1] += d_power * (-dx * dy);
            sg.conic[2] += d_power * (-0.5 * dy * dy);
            const double d_dx = d_power * (-(s.conic_a * dx + s.conic_b * dy));
            const double d_dy = d_power * (-(s.conic_b * dx + s.conic_c * dy));
            sg.mean[0] -= d_dx;
            sg.mean[1] -= d_dy;
          }
          t *= 1.0 - a;
          if (t < kMinTransmittance)
            break;
        }
      }
    }
  });

  // deterministic reduction: tile order, then per-splat chain to 3D parameters
  std::vector<SplatGrad2D> splat_grads(plan.splats.size());
  for (int tile = 0; tile < n_tiles; ++tile) {
    const auto& list = plan.tile_splats[tile];
    for (size_t li = 0; li < list.size(); ++li) {
      const SplatGrad2D& src = tile_grads[tile][li];
      SplatGrad2D& dst = splat_grads[list[li]];
      dst.mean[0] += src.mean[0];
      dst.mean[1] += src.mean[1];
      for (int k = 0; k < 3; ++k) {
        dst.conic[k] += src.conic[k];
        dst.color[k] += src.color[k];
      }
      dst.alpha += src.alpha;
    }
  }

  for (size_t pi = 0; pi < plan.splats.size(); ++pi) {
    const PreparedSplat& s = plan.splats[pi];
    const SplatGrad2D& sg = splat_grads[pi];
    const int gi = s.source_index;
    const GaussianPrimitive& g = gaussians[gi];

    // recompute the projection chain for this splat
    const Eigen::Vector3d cam = camera.world_to_cam(g.position);
    const double zc = cam.z();
    Eigen::Vector3d j1(camera.fx / zc, 0, -camera.fx * cam.x() / (zc * zc));
    Eigen::Vector3d j2(0, camera.fy / zc, -camera.fy * cam.y() / (zc * zc));

    Eigen::Vector4d qn = g.rotation;
    const double qnorm = qn.norm();
    qn /= qnorm;
    const Eigen::Matrix3d rot3 = rotation_matrix(qn);
    const Eigen::Vector3d scale = g.scales();
    const Eigen::Matrix3d m3 = rot3 * scale.asDiagonal();
    const Eigen::Matrix3d sigma = m3 * m3.transpose();
    const Eigen::Matrix3d v3 = camera.rot * sigma * camera.rot.transpose();

    const double caa = j1.dot(v3 * j1) + kCovLowPass;
    const double cab = j1.dot(v3 * j2);
    const double cbb = j2.dot(v3 * j2) + kCovLowPass;
    const double det = caa * cbb - cab * cab;
    const double inv_det2 = 1.0 / (det * det);

    // conic = inverse of the regularized 2x2 covariance
    const double d_A = sg.conic[0], d_B = sg.conic[1], d_C = sg.conic[2];
    const double d_caa =
        inv_det2 * (d_A * (-cbb * cbb) + d_B * (cab * cbb) + d_C * (-cab * cab));
    const double d_cab = inv_det2 * (d_A * (2 * cab * cbb) + d_B * (-(det + 2 * cab * cab)) +
                                     d_C * (2 * caa * cab));
    const double d_cbb =
        inv_det2 * (d_A * (-cab * cab) + d_B * (cab * caa) + d_C * (-caa * caa));

    const Eigen::Matrix3d d_v3 = d_caa * (j1 * j1.transpose()) + d_cab * (j1 * j2.transpose()) +
                                 d_cbb * (j2 * j2.transpose());
    const Eigen::Vector3d d_j1 = 2.0 * d_caa * (v3 * j1) + d_cab * (v3 * j2);
    const Eigen::Vector3d d_j2 = 2.0 * d_cbb * (v3 * j2) + d_cab * (v3 * j1);

    const Eigen::Matrix3d d_sigma = camera.rot.transpose() * d_v3 * camera.rot;
    const Eigen::Matrix3d d_m3 = (d_sigma + d_sigma.transpose()) * m3;
    Eigen::Vector3d d_log_scale;
    Eigen::Matrix3d d_rot3;
    for (int k = 0; k < 3; ++k) {
      d_rot3.col(k) = d_m3.col(k) * scale[k];
      d_log_scale[k] = d_m3.col(k).dot(rot3.col(k)) * scale[k];
    }
    Eigen::Vector4d d_qn;
    for (int k = 0; k < 4; ++k)
      d_qn[k] = (d_rot3.array() * rotation_partial(qn, k).array()).sum();
    const Eigen::Vector4d d_q = (d_qn - qn * qn.dot(d_qn)) / qnorm;

    // camera-space position from the Jacobian entries and the 2D mean
    double d_x = d_j1[2] * (-camera.fx / (zc * zc));
    double d_y = d_j2[2] * (-camera.fy / (zc * zc));
    double d_z = d_j1[0] * (-camera.fx / (zc * zc)) +
                 d_j1[2] * (2.0 * camera.fx * cam.x() / (zc * zc * zc)) +
                 d_j2[1] * (-camera.fy / (zc * zc)) +
                 d_j2[2] * (2.0 * camera.fy * cam.y() / (zc * zc * zc));
    d_x += sg.mean[0] * camera.fx / zc;
    d_z += sg.mean[0] * (-camera.fx * cam.x() / (zc * zc));
    d_y += sg.mean[1] * camera.fy / zc;
    d_z += sg.mean[1] * (-camera.fy * cam.y() / (zc * zc));

    auto& grads = res.grads;
    grads.position[gi] = camera.rot.transpose() * Eigen::Vector3d(d_x, d_y, d_z);
    grads.log_scale[gi] = d_log_scale;
    grads.rotation[gi] = d_q;
    const double raw_alpha = s.alpha / s.opacity_scale;
    grads.opacity_logit[gi] = sg.alpha * s.opacity_scale * raw_alpha * (1.0 - raw_alpha);
    grads.color[gi] = Eigen::Vector3d(sg.color[0], sg.color[1], sg.color[2]);
    grads.pos2d_grad_norm[gi] = std::hypot(sg.mean[0], sg.mean[1]);
  }
  return res;
}

}  // namespace splatcal
