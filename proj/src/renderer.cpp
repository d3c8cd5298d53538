#include "splatcal/renderer.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

namespace splatcal {

void parallel_tiles(int n_tiles, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n_tiles));
  if (threads == 1) {
    for (int t = 0; t < n_tiles; ++t)
      fn(t);
    return;
  }
  std::atomic<int> next{0};
  auto work = [&]() {
    while (true) {
      const int t = next.fetch_add(1);
      if (t >= n_tiles)
        break;
      fn(t);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i)
    pool.emplace_back(work);
  work();
  for (auto& th : pool)
    th.join();
}

RasterPlan build_raster_plan(const std::vector<Projected2DGaussian>& projected,
                             const std::vector<GaussianPrimitive>& gaussians,
                             const Camera& camera, const std::vector<double>* alpha_scale) {
  RasterPlan plan;
  plan.tiles_x = (camera.width + kTileSize - 1) / kTileSize;
  plan.tiles_y = (camera.height + kTileSize - 1) / kTileSize;
  plan.tile_splats.resize(static_cast<size_t>(plan.tiles_x) * plan.tiles_y);
  plan.splats.reserve(projected.size());

  for (const auto& p : projected) {
    PreparedSplat s;
    const double det = p.cov_xx * p.cov_yy - p.cov_xy * p.cov_xy;
    s.conic_a = p.cov_yy / det;
    s.conic_b = -p.cov_xy / det;
    s.conic_c = p.cov_xx / det;
    s.mean_x = p.mean2d.x();
    s.mean_y = p.mean2d.y();
    s.depth = p.depth;
    s.source_index = p.source_index;
    const auto& g = gaussians[p.source_index];
    s.opacity_scale = alpha_scale ? (*alpha_scale)[p.source_index] : 1.0;
    s.alpha = g.opacity() * s.opacity_scale;
    for (int c = 0; c < 3; ++c)
      s.color[c] = g.color[c];
    // pixel centers inside the 3-sigma ellipse bounding box
    const double rx = kSplatSigmaExtent * std::sqrt(p.cov_xx);
    const double ry = kSplatSigmaExtent * std::sqrt(p.cov_yy);
    s.x0 = std::max(0, static_cast<int>(std::ceil(s.mean_x - rx - 0.5)));
    s.x1 = std::min(camera.width - 1, static_cast<int>(std::floor(s.mean_x + rx - 0.5)));
    s.y0 = std::max(0, static_cast<int>(std::ceil(s.mean_y - ry - 0.5)));
    s.y1 = std::min(camera.height - 1, static_cast<int>(std::floor(s.mean_y + ry - 0.5)));
    if (s.x0 > s.x1 || s.y0 > s.y1)
      continue;
    const int splat_idx = static_cast<int>(plan.splats.size());
    plan.splats.push_back(s);
    const int tx0 = s.x0 / kTileSize, tx1 = s.x1 / kTileSize;
    const int ty0 = s.y0 / kTileSize, ty1 = s.y1 / kTileSize;
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx)
        plan.tile_splats[static_cast<size_t>(ty) * plan.tiles_x + tx].push_back(splat_idx);
  }
  return plan;
}

RenderOutput composite_forward(const RasterPlan& plan, const Camera& camera,
                               const RenderOptions& options, size_t n_gaussians) {
  RenderOutput out;
  out.color = Image(camera.width, camera.height, 3, 0.0);
  out.depth_map.assign(static_cast<size_t>(camera.width) * camera.height, 0.0);
  out.transmittance.assign(static_cast<size_t>(camera.width) * camera.height, 1.0);
  out.contributions.assign(n_gaussians, Contribution{});

  const int n_tiles = plan.tiles_x * plan.tiles_y;
  // per-tile contribution partials, merged in tile order for determinism
  std::vector<std::vector<Contribution>> tile_contrib(n_tiles);

  parallel_tiles(n_tiles, options.threads, [&](int tile) {
    const auto& list = plan.tile_splats[tile];
    auto& contrib = tile_contrib[tile];
    contrib.assign(list.size(), Contribution{});
    const int tx = tile % plan.tiles_x, ty = tile / plan.tiles_x;
    const int px0 = tx * kTileSize, px1 = std::min(camera.width, px0 + kTileSize);
    const int py0 = ty * kTileSize, py1 = std::min(camera.height, py0 + kTileSize);
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        double t = 1.0;
        double rgb[3] = {0, 0, 0};
        double sum_w = 0, sum_wd = 0;
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
          const double w = a * t;
          rgb[0] += w * s.color[0];
          rgb[1] += w * s.color[1];
          rgb[2] += w * s.color[2];
          sum_w += w;
          sum_wd += w * s.depth;
          Contribution& cr = contrib[li];
          if (w > cr.max_weight)
            cr.max_weight = w;
          if (w > options.vis_epsilon)
            ++cr.pixel_count;
          t *= 1.0 - a;
          if (t < kMinTransmittance)
            break;
        }
        const size_t pix = static_cast<size_t>(py) * camera.width + px;
        out.color.at(py, px, 0) = rgb[0];
        out.color.at(py, px, 1) = rgb[1];
        out.color.at(py, px, 2) = rgb[2];
        out.depth_map[pix] = sum_w > 0 ? sum_wd / sum_w : 0.0;
        out.transmittance[pix] = t;
      }
    }
  });

  for (int tile = 0; tile < n_tiles; ++tile) {
    const auto& list = plan.tile_splats[tile];
    for (size_t li = 0; li < list.size(); ++li) {
      const Contribution& c = tile_contrib[tile][li];
      Contribution& dst = out.contributions[plan.splats[list[li]].source_index];
      dst.max_weight = std::max(dst.max_weight, c.max_weight);
      dst.pixel_count += c.pixel_count;
    }
  }
  return out;
}

RenderOutput render(const std::vector<GaussianPrimitive>& gaussians, const Camera& camera,
                    const RenderOptions& options, const std::vector<uint8_t>* keep,
                    const std::vector<double>* alpha_scale) {
  if (keep)
    require(keep->size() == gaussians.size(), "mask length %zu != gaussian count %zu",
            keep->size(), gaussians.size());
  const ProjectionResult proj = project(gaussians, camera, keep);
  const RasterPlan plan = build_raster_plan(proj.splats, gaussians, camera, alpha_scale);
  RenderOutput out = composite_forward(plan, camera, options, gaussians.size());
  out.skipped_singular = proj.skipped_singular;
  return out;
}

}  // namespace splatcal
