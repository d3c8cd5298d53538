#pragma once

#include <cstdint>
#include <string>

namespace splatcal {

enum class TauCenterMode { MedianDepth, Fixed };

// Every knob of CDGD, DCP-GP, training and densification in one place.
// Defaults follow the reference training recipe; see README for the file format.
struct CalibConfig {
  // continuous depth-guided dropout
  double lambda_base = 0.3;     // lower bound of the depth weight
  double kappa = 10.0;          // sigmoid steepness
  TauCenterMode tau_center_mode = TauCenterMode::MedianDepth;
  double tau_fixed = 1.0;       // used when tau_center_mode == Fixed
  bool global_tau = false;      // one tau for all views instead of per-view median
  bool invert_importance = true;  // importance = 1 - minmax(depth): near gets the full score
  bool dropout_rescale = false;   // 1/(1-P) compensation for survivors
  int dropout_end_iter = 0;       // 0 = active for the whole run

  // piecewise (DDGS) baseline
  double d_near = 2.0;
  double d_middle = 4.0;
  double lambda_middle = 0.5;
  double lambda_far = 0.25;

  // dark-channel pruning
  double tau1 = 0.10;      // local (smoothed) dark-channel threshold
  double tau2 = 0.05;      // pixel dark-channel threshold
  double alpha_min = 0.05; // prune opacity gate
  double eta = 0.5;        // prune sensitivity, lambda = eta * t_prune
  int t_prune = 1000;      // prune interval
  int t_start = 5000;      // DCP warm-up iterations
  int dcp_window = 15;     // local-average window side, odd
  bool score_reset = true; // zero scores after each prune event

  // training
  int total_iters = 10000;
  double lambda1 = 0.2;       // SSIM weight in the loss
  double vis_epsilon = 1e-4;  // min blend weight counting as visible
  uint64_t seed = 0;
  int log_interval = 500;
  int checkpoint_interval = 1000;
  int threads = 1;

  // optimizer (per-group learning rates; position decays exponentially)
  double lr_position = 1.6e-4;
  double lr_position_final = 1.6e-6;
  double lr_color = 2.5e-3;
  double lr_opacity = 5e-2;
  double lr_scale = 5e-3;
  double lr_rotation = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-15;

  // densification
  int densify_interval = 500;
  int densify_from = 500;
  int densify_until = 5000;
  double densify_grad_threshold = 2e-4;   // on mean 2D position-gradient norm
  double densify_scale_rel = 0.01;        // split when max scale > rel * scene extent
  double cull_opacity = 0.005;            // standard low-opacity cull
  int max_gaussians = 400000;             // densification safety cap

  void validate() const;

  // key=value text round trip
  static CalibConfig load(const std::string& path);
  void apply_override(const std::string& key, const std::string& value);
  std::string serialize() const;
  void save(const std::string& path) const;
};

std::string to_string(TauCenterMode mode);

}  // namespace splatcal
