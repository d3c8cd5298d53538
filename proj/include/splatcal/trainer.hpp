#pragma once

#include <optional>
#include <string>
#include <vector>

#include "splatcal/adam.hpp"
#include "splatcal/config.hpp"
#include "splatcal/dcp.hpp"
#include "splatcal/dropout.hpp"
#include "splatcal/gaussian.hpp"
#include "splatcal/metrics.hpp"

namespace splatcal {

enum class Ablation { Baseline, Ddgs, Cdgd, DcpGp, CdgdDcpGp };

Ablation parse_ablation(const std::string& s);
std::string to_string(Ablation a);
DropoutMode ablation_dropout(Ablation a);
bool ablation_prune(Ablation a);

struct TrainEvent {
  int iter = 0;
  enum class Type { Densify, Prune } type = Type::Densify;
  int clones = 0, splits = 0, culled = 0;
  double lambda = 0;
  bool reset = false;
  bool refused_empty = false;
  int count_after = 0;
  std::vector<uint64_t> pruned_ids;  // stable ids removed by DCP-GP

  std::string format() const;
};

struct TrainReportRow {
  int iter = 0;
  double train_loss = 0;
  double test_psnr = 0;
  double test_ssim = 0;
  int gaussian_count = 0;
  int pruned_cum = 0;
  double mean_dcp_score = 0;
  double violation_ratio = 0;
};

struct TrainReport {
  std::vector<TrainReportRow> rows;
  double final_test_psnr = 0;
  double final_test_ssim = 0;

  std::string to_csv() const;
};

struct TrainState {
  std::vector<GaussianPrimitive> gaussians;
  std::vector<uint64_t> ids;  // stable identity across densify/prune
  uint64_t next_id = 0;
  OptimizerState opt;
  int iteration = 0;
  std::vector<double> grad2d_accum;
  std::vector<int> grad2d_count;
  std::vector<TrainEvent> events;
  uint64_t seed = 0;
  double scene_extent = 0;
  std::optional<double> global_tau;
  int initial_count = 0;
  int total_clones = 0, total_splits = 0, total_pruned = 0, total_culled = 0;
  int skipped_singular = 0;

  std::string event_log() const;
};

// Full optimization loop: round-robin views, dropout-masked forward/backward,
// Adam step, periodic densification, DCP accumulation past warm-up and
// periodic reliability pruning. Writes report/events/checkpoints under
// `out_dir` when given.
std::pair<TrainState, TrainReport> train(const Scene& scene, const CalibConfig& config,
                                         Ablation ablation, uint64_t seed,
                                         const std::string& out_dir = "");

// Same loop with the two calibration axes controlled directly.
std::pair<TrainState, TrainReport> train(const Scene& scene, const CalibConfig& config,
                                         DropoutMode mode, bool prune_enabled, uint64_t seed,
                                         const std::string& out_dir = "");

// Clone/split step on the densification schedule plus the standard
// low-opacity cull; returns the logged event.
TrainEvent densify(TrainState& state, const CalibConfig& config);

// Per-view PSNR/SSIM on clean renders, with a trailing mean row.
std::vector<MetricRow> evaluate(const std::vector<GaussianPrimitive>& gaussians,
                                const std::vector<Camera>& cameras,
                                const std::vector<Image>& images,
                                const RenderOptions& options = {});

void write_train_state(const TrainState& state, const std::string& path);

}  // namespace splatcal
