#pragma once

#include <vector>

#include "splatcal/config.hpp"
#include "splatcal/image.hpp"

namespace splatcal {

struct DcpReport {
  Image dark;            // per-pixel channel minimum, 1 channel
  Image dark_smoothed;   // box-averaged dark channel
  std::vector<uint8_t> bad_mask;  // row-major anomaly indicator
  double violation_ratio = 0;     // bad pixels / all pixels
};

// Per-pixel minimum across color channels (no spatial minimum).
Image dark_channel(const Image& image);

// Box mean over window x window with replicated borders; window must be odd.
Image local_average(const Image& map, int window);

// bad(u) = (smoothed(u) > tau1) && (dark(u) > tau2); returns the mask and
// the global violation ratio.
std::pair<std::vector<uint8_t>, double> anomaly_mask(const Image& dark,
                                                     const Image& dark_smoothed, double tau1,
                                                     double tau2);

DcpReport analyze_dcp(const Image& image, const CalibConfig& cfg);

// View-level accumulation: scores[i] += ratio for every visible index.
void accumulate_scores(std::vector<double>& scores, double ratio,
                       const std::vector<size_t>& visible);

struct PruneDecision {
  double threshold_lambda = 0;      // eta * t_prune
  std::vector<size_t> pruned_indices;  // current positions, ascending
  bool reset_applied = false;
  bool refused_empty = false;       // pruning would have emptied the scene
};

// Periodic reliability pruning: remove i with score > lambda and activated
// opacity < alpha_min. Refuses to empty the scene.
PruneDecision select_prune(const std::vector<double>& scores,
                           const std::vector<double>& activated_opacity,
                           const CalibConfig& cfg);

}  // namespace splatcal
