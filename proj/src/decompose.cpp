#include "splatcal/decompose.hpp"

#include <cmath>

namespace splatcal {

FloaterDecomposition decompose(const std::vector<GaussianPrimitive>& gaussians,
                               const Camera& camera, const std::vector<uint8_t>& floater_flags,
                               const RenderOptions& options) {
  require(floater_flags.size() == gaussians.size(), "floater flag length %zu != gaussians %zu",
          floater_flags.size(), gaussians.size());
  const ProjectionResult proj = project(gaussians, camera);
  const RasterPlan plan = build_raster_plan(proj.splats, gaussians, camera);

  FloaterDecomposition out;
  out.c_f = Image(camera.width, camera.height, 3, 0.0);
  out.c_surf = Image(camera.width, camera.height, 3, 0.0);
  out.t_f.assign(static_cast<size_t>(camera.width) * camera.height, 1.0);

  const int n_tiles = plan.tiles_x * plan.tiles_y;
  parallel_tiles(n_tiles, options.threads, [&](int tile) {
    const auto& list = plan.tile_splats[tile];
    const int tx = tile % plan.tiles_x, ty = tile / plan.tiles_x;
    const int px0 = tx * kTileSize, px1 = std::min(camera.width, px0 + kTileSize);
    const int py0 = ty * kTileSize, py1 = std::min(camera.height, py0 + kTileSize);
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        double tf = 1.0, ts = 1.0;
        const double cx = px + 0.5, cy = py + 0.5;
        for (size_t li = 0; li < list.size(); ++li) {
          const PreparedSplat& s = plan.splats[list[li]];
          if (px < s.x0 || px > s.x1 || py < s.y0 || py > s.y1)
            continue;
          const double dx = cx - s.mean_x, dy = cy - s.mean_y;
          const double power =
              -0.5 * (s.conic_a * dx * dx + 2.0 * s.conic_b * dx * dy + s.conic_c * dy * dy);
          const double a = std::min(kAlphaClamp, s.alpha * std::exp(power));
          if (a <= 0)
            continue;
          if (floater_flags[s.source_index]) {
            for (int c = 0; c < 3; ++c)
              out.c_f.at(py, px, c) += s.color[c] * a * tf;
            tf *= 1.0 - a;
          } else {
            for (int c = 0; c < 3; ++c)
              out.c_surf.at(py, px, c) += s.color[c] * a * ts;
            ts *= 1.0 - a;
          }
          // same termination rule as the full renderer (full T = tf * ts)
          if (tf * ts < kMinTransmittance)
            break;
        }
        out.t_f[static_cast<size_t>(py) * camera.width + px] = tf;
      }
    }
  });

  // a_est: blend-weight-weighted mean floater color; per pixel the flagged
  // blend weights sum to 1 - t_f.
  Eigen::Vector3d num = Eigen::Vector3d::Zero();
  double den = 0;
  for (int py = 0; py < camera.height; ++py)
    for (int px = 0; px < camera.width; ++px) {
      for (int c = 0; c < 3; ++c)
        num[c] += out.c_f.at(py, px, c);
      den += 1.0 - out.t_f[static_cast<size_t>(py) * camera.width + px];
    }
  if (den > 0)
    out.a_est = num / den;
  return out;
}

double haze_approx_error(const FloaterDecomposition& decomp) {
  double total = 0;
  size_t touched = 0;
  for (int py = 0; py < decomp.c_f.height; ++py)
    for (int px = 0; px < decomp.c_f.width; ++px) {
      const double tf = decomp.t_f[static_cast<size_t>(py) * decomp.c_f.width + px];
      if (!(tf < 1.0))
        continue;
      const double opacity = 1.0 - tf;
      double sq = 0;
      for (int c = 0; c < 3; ++c) {
        const double d = decomp.c_f.at(py, px, c) - decomp.a_est[c] * opacity;
        sq += d * d;
      }
      total += std::sqrt(sq) / std::max(opacity, 1e-3);
      ++touched;
    }
  require(touched > 0, "no floater coverage");
  return total / static_cast<double>(touched);
}

}  // namespace splatcal
