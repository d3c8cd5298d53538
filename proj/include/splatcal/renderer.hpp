#pragma once

#include <functional>
#include <vector>

#include "splatcal/image.hpp"
#include "splatcal/projection.hpp"

namespace splatcal {

constexpr double kAlphaClamp = 0.99;
constexpr double kMinTransmittance = 1e-4;
constexpr int kTileSize = 16;

struct RenderOptions {
  double vis_epsilon = 1e-4;
  int threads = 1;
};

// Per-Gaussian footprint record of one forward pass.
struct Contribution {
  double max_weight = 0;  // max per-pixel blend weight
  int pixel_count = 0;    // pixels with blend weight > vis_epsilon
};

struct RenderOutput {
  Image color;                            // H x W x 3
  std::vector<double> depth_map;          // blend-weighted expected depth
  std::vector<double> transmittance;      // final T per pixel
  std::vector<Contribution> contributions;  // one per scene Gaussian
  int skipped_singular = 0;

  bool visible(size_t i, double vis_epsilon) const {
    return contributions[i].max_weight > vis_epsilon;
  }
};

// Splat with inverted covariance and pixel bounds, ready to composite.
struct PreparedSplat {
  double mean_x, mean_y;
  double conic_a, conic_b, conic_c;
  double alpha;          // activated opacity times alpha_scale
  double opacity_scale;  // survivor compensation factor (1 when unused)
  double color[3];
  double depth;
  int source_index;
  int x0, x1, y0, y1;  // inclusive pixel bounds
};

struct RasterPlan {
  std::vector<PreparedSplat> splats;          // depth order
  std::vector<std::vector<int>> tile_splats;  // indices into splats, per tile
  int tiles_x = 0, tiles_y = 0;
};

// `alpha_scale`, when present, multiplies each Gaussian's activated opacity
// (used for 1/(1-P) dropout-survivor compensation).
RasterPlan build_raster_plan(const std::vector<Projected2DGaussian>& projected,
                             const std::vector<GaussianPrimitive>& gaussians,
                             const Camera& camera,
                             const std::vector<double>* alpha_scale = nullptr);

// Forward compositing over a prepared plan; `n_gaussians` sizes the
// contribution record.
RenderOutput composite_forward(const RasterPlan& plan, const Camera& camera,
                               const RenderOptions& options, size_t n_gaussians);

// Front-to-back alpha compositing over depth-sorted splats:
// C = sum_i c_i a_i prod_{j<i} (1 - a_j), a_i = opacity * exp(-0.5 d^T conic d)
// clamped to kAlphaClamp, with early termination below kMinTransmittance.
RenderOutput render(const std::vector<GaussianPrimitive>& gaussians, const Camera& camera,
                    const RenderOptions& options = {},
                    const std::vector<uint8_t>* keep = nullptr,
                    const std::vector<double>* alpha_scale = nullptr);

// Runs `fn(tile_index)` over [0, n_tiles) on `threads` workers.
void parallel_tiles(int n_tiles, int threads, const std::function<void(int)>& fn);

}  // namespace splatcal
