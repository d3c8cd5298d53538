#include "splatcal/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "splatcal/loss.hpp"
#include "splatcal/renderer.hpp"
#include "splatcal/rng.hpp"
#include "splatcal/scene_io.hpp"

namespace fs = std::filesystem;

namespace splatcal {

Ablation parse_ablation(const std::string& s) {
  if (s == "baseline")
    return Ablation::Baseline;
  if (s == "ddgs")
    return Ablation::Ddgs;
  if (s == "cdgd")
    return Ablation::Cdgd;
  if (s == "dcp_gp")
    return Ablation::DcpGp;
  if (s == "cdgd+dcp_gp")
    return Ablation::CdgdDcpGp;
  fail("unknown ablation '%s' (expected baseline|ddgs|cdgd|dcp_gp|cdgd+dcp_gp)", s.c_str());
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::Baseline:
      return "baseline";
    case Ablation::Ddgs:
      return "ddgs";
    case Ablation::Cdgd:
      return "cdgd";
    case Ablation::DcpGp:
      return "dcp_gp";
    default:
      return "cdgd+dcp_gp";
  }
}

DropoutMode ablation_dropout(Ablation a) {
  switch (a) {
    case Ablation::Ddgs:
      return DropoutMode::Ddgs;
    case Ablation::Cdgd:
    case Ablation::CdgdDcpGp:
      return DropoutMode::Cdgd;
    default:
      return DropoutMode::Off;
  }
}

bool ablation_prune(Ablation a) { return a == Ablation::DcpGp || a == Ablation::CdgdDcpGp; }

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string TrainEvent::format() const {
  std::ostringstream out;
  out << "iter=" << iter;
  if (type == Type::Densify) {
    out << " type=densify clones=" << clones << " splits=" << splits << " culled=" << culled
        << " count=" << count_after;
  } else {
    out << " type=prune lambda=" << fmt(lambda) << " pruned=" << pruned_ids.size()
        << " reset=" << (reset ? 1 : 0) << " refused_empty=" << (refused_empty ? 1 : 0)
        << " count=" << count_after << " ids=";
    for (size_t i = 0; i < pruned_ids.size(); ++i) {
      if (i)
        out << ",";
      out << pruned_ids[i];
    }
  }
  return out.str();
}

std::string TrainState::event_log() const {
  std::ostringstream out;
  for (const auto& e : events)
    out << e.format() << "\n";
  return out.str();
}

std::string TrainReport::to_csv() const {
  std::ostringstream out;
  out << "iter,train_loss,test_psnr,test_ssim,gaussians,pruned_cum,mean_dcp_score,"
         "violation_ratio\n";
  for (const auto& r : rows)
    out << r.iter << "," << fmt(r.train_loss) << "," << fmt(r.test_psnr) << ","
        << fmt(r.test_ssim) << "," << r.gaussian_count << "," << r.pruned_cum << ","
        << fmt(r.mean_dcp_score) << "," << fmt(r.violation_ratio) << "\n";
  return out.str();
}

std::vector<MetricRow> evaluate(const std::vector<GaussianPrimitive>& gaussians,
                                const std::vector<Camera>& cameras,
                                const std::vector<Image>& images,
                                const RenderOptions& options) {
  require(!cameras.empty(), "evaluate: no test views");
  require(cameras.size() == images.size(), "evaluate: camera/image count mismatch");
  std::vector<MetricRow> rows;
  double psnr_sum = 0, ssim_sum = 0;
  for (size_t i = 0; i < cameras.size(); ++i) {
    const Image img = render(gaussians, cameras[i], options).color;
    MetricRow row;
    row.view = std::to_string(cameras[i].id);
    row.psnr = psnr(img, images[i]);
    row.ssim = ssim(img, images[i]);
    psnr_sum += row.psnr;
    ssim_sum += row.ssim;
    rows.push_back(row);
  }
  MetricRow mean;
  mean.view = "mean";
  mean.psnr = psnr_sum / cameras.size();
  mean.ssim = ssim_sum / cameras.size();
  rows.push_back(mean);
  return rows;
}

namespace {

// Remove entries where keep == 0, across every per-Gaussian array.
void compact_state(TrainState& state, const std::vector<uint8_t>& keep) {
  size_t dst = 0;
  for (size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i])
      continue;
    if (dst != i) {
      state.gaussians[dst] = state.gaussians[i];
      state.ids[dst] = state.ids[i];
      state.grad2d_accum[dst] = state.grad2d_accum[i];
      state.grad2d_count[dst] = state.grad2d_count[i];
    }
    ++dst;
  }
  state.gaussians.resize(dst);
  state.ids.resize(dst);
  state.grad2d_accum.resize(dst);
  state.grad2d_count.resize(dst);
  state.opt.compact(keep);
}

void append_gaussian(TrainState& state, const GaussianPrimitive& g) {
  state.gaussians.push_back(g);
  state.ids.push_back(state.next_id++);
  state.grad2d_accum.push_back(0.0);
  state.grad2d_count.push_back(0);
  state.opt.append(1);
}

double scene_extent_of(const std::vector<GaussianPrimitive>& gaussians) {
  Eigen::Vector3d lo = gaussians[0].position, hi = gaussians[0].position;
  for (const auto& g : gaussians) {
    lo = lo.cwiseMin(g.position);
    hi = hi.cwiseMax(g.position);
  }
  return (hi - lo).norm();
}

}  // namespace

TrainEvent densify(TrainState& state, const CalibConfig& config) {
  TrainEvent event;
  event.iter = state.iteration;
  event.type = TrainEvent::Type::Densify;

  const size_t n_before = state.gaussians.size();
  const double split_scale = config.densify_scale_rel * state.scene_extent;
  const bool may_grow = static_cast<int>(n_before) < config.max_gaussians;
  for (size_t i = 0; i < n_before && may_grow; ++i) {
    if (state.grad2d_count[i] == 0)
      continue;
    const double mean_grad = state.grad2d_accum[i] / state.grad2d_count[i];
    if (mean_grad <= config.densify_grad_threshold)
      continue;
    GaussianPrimitive g = state.gaussians[i];
    const Eigen::Vector3d sigma = g.scales();
    int axis = 0;
    sigma.maxCoeff(&axis);
    if (sigma[axis] > split_scale) {
      // split: replace the parent by two offset children at reduced scale
      const Eigen::Vector3d dir = rotation_matrix(g.rotation).col(axis);
      const Eigen::Vector3d offset = 0.5 * sigma[axis] * dir;
      g.log_scale.array() -= std::log(1.6);
      GaussianPrimitive a = g, b = g;
      a.position += offset;
      b.position -= offset;
      append_gaussian(state, a);
      append_gaussian(state, b);
      state.gaussians[i].opacity_logit = -1e9;  // parent retired by the cull below
      ++event.splits;
    } else {
      append_gaussian(state, g);
      ++event.clones;
    }
  }

  std::vector<uint8_t> keep(state.gaussians.size(), 1);
  int culled = 0;
  for (size_t i = 0; i < state.gaussians.size(); ++i) {
    if (state.gaussians[i].opacity() < config.cull_opacity) {
      keep[i] = 0;
      ++culled;
    }
  }
  if (culled == static_cast<int>(state.gaussians.size())) {
    std::fill(keep.begin(), keep.end(), 1);  // never empty the scene
    culled = 0;
  }
  event.culled = culled - event.splits;  // retired split parents are not culls
  compact_state(state, keep);
  std::fill(state.grad2d_accum.begin(), state.grad2d_accum.end(), 0.0);
  std::fill(state.grad2d_count.begin(), state.grad2d_count.end(), 0);

  state.total_clones += event.clones;
  state.total_splits += event.splits;
  state.total_culled += event.culled;
  event.count_after = static_cast<int>(state.gaussians.size());
  state.events.push_back(event);
  return event;
}

void write_train_state(const TrainState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '%s'", path.c_str());
  auto put = [&](const void* p, size_t bytes) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(bytes));
  };
  const uint64_t n = state.gaussians.size();
  put("SPTS", 4);
  put(&n, 8);
  const int64_t iter = state.iteration;
  put(&iter, 8);
  put(&state.seed, 8);
  put(state.ids.data(), n * 8);
  std::vector<double> scores(n);
  for (size_t i = 0; i < n; ++i)
    scores[i] = state.gaussians[i].dcp_score;
  put(scores.data(), n * 8);
  put(state.grad2d_accum.data(), n * 8);
  auto put_vec = [&](const std::vector<double>& v) { put(v.data(), v.size() * 8); };
  put_vec(state.opt.m_position);
  put_vec(state.opt.v_position);
  put_vec(state.opt.m_log_scale);
  put_vec(state.opt.v_log_scale);
  put_vec(state.opt.m_rotation);
  put_vec(state.opt.v_rotation);
  put_vec(state.opt.m_opacity);
  put_vec(state.opt.v_opacity);
  put_vec(state.opt.m_color);
  put_vec(state.opt.v_color);
  require(out.good(), "write failed for '%s'", path.c_str());
}

namespace {

void write_checkpoint(const TrainState& state, const std::string& out_dir) {
  char name[64];
  std::snprintf(name, sizeof(name), "ckpt_%06d", state.iteration);
  const fs::path dir = fs::path(out_dir) / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_gaussians_ply(state.gaussians, (dir / "gaussians.ply").string());
  write_train_state(state, (dir / "train_state.bin").string());
}

}  // namespace

std::pair<TrainState, TrainReport> train(const Scene& scene, const CalibConfig& config,
                                         Ablation ablation, uint64_t seed,
                                         const std::string& out_dir) {
  return train(scene, config, ablation_dropout(ablation), ablation_prune(ablation), seed,
               out_dir);
}

std::pair<TrainState, TrainReport> train(const Scene& scene, const CalibConfig& config,
                                         DropoutMode base_mode, bool prune_enabled,
                                         uint64_t seed, const std::string& out_dir) {
  scene.validate();
  config.validate();
  require(!scene.train_cameras.empty(), "train: no training views");

  TrainState state;
  state.gaussians = scene.gaussians;
  for (auto& g : state.gaussians)
    g.dcp_score = 0.0;
  state.ids.resize(state.gaussians.size());
  for (size_t i = 0; i < state.ids.size(); ++i)
    state.ids[i] = i;
  state.next_id = state.ids.size();
  state.opt.init(state.gaussians.size());
  state.grad2d_accum.assign(state.gaussians.size(), 0.0);
  state.grad2d_count.assign(state.gaussians.size(), 0);
  state.seed = seed;
  state.scene_extent = scene_extent_of(state.gaussians);
  state.initial_count = static_cast<int>(state.gaussians.size());

  TrainReport report;
  RenderOptions opts;
  opts.vis_epsilon = config.vis_epsilon;
  opts.threads = config.threads;

  const int n_views = static_cast<int>(scene.train_cameras.size());

  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    require(fs::is_directory(out_dir), "cannot create output directory '%s'", out_dir.c_str());
  }

  // one tau for all views, from the union of initial per-view visible depths
  if (config.global_tau && base_mode == DropoutMode::Cdgd &&
      config.tau_center_mode == TauCenterMode::MedianDepth) {
    std::vector<double> all_depths;
    for (const auto& cam : scene.train_cameras) {
      const ProjectionResult proj = project(state.gaussians, cam);
      for (const auto& s : proj.splats)
        all_depths.push_back(s.depth);
    }
    require(!all_depths.empty(), "no visible gaussians");
    state.global_tau = median_of(std::move(all_depths));
  }

  double interval_loss = 0;
  int interval_count = 0;
  double latest_ratio = 0;

  for (int t = 1; t <= config.total_iters; ++t) {
    state.iteration = t;
    const int view = (t - 1) % n_views;
    const Camera& cam = scene.train_cameras[view];
    const Image& gt = scene.train_images[view];

    DropoutMode mode = base_mode;
    if (config.dropout_end_iter > 0 && t > config.dropout_end_iter)
      mode = DropoutMode::Off;

    DropoutPlan plan;
    std::vector<double> alpha_scale;
    if (mode == DropoutMode::Off) {
      plan.mask.assign(state.gaussians.size(), 1);
    } else {
      const ProjectionResult proj = project(state.gaussians, cam);
      plan = make_plan(proj.splats, state.gaussians.size(), config, mode,
                       combine_seed(seed, static_cast<uint64_t>(t)), state.global_tau);
      if (config.dropout_rescale) {
        // survivors compensate for the expected dropped mass
        alpha_scale.assign(state.gaussians.size(), 1.0);
        for (size_t v = 0; v < proj.splats.size(); ++v) {
          const int src = proj.splats[v].source_index;
          if (plan.mask[src])
            alpha_scale[src] = 1.0 / (1.0 - std::min(plan.probability[v], 0.99));
        }
      }
    }

    BackwardResult bw = backward(state.gaussians, cam, gt, config.lambda1, opts, &plan.mask,
                                 alpha_scale.empty() ? nullptr : &alpha_scale);
    state.skipped_singular += bw.render.skipped_singular;
    step(state.opt, bw.grads, state.gaussians, t, config);

    for (size_t i = 0; i < state.gaussians.size(); ++i) {
      if (bw.render.visible(i, config.vis_epsilon)) {
        state.grad2d_accum[i] += bw.grads.pos2d_grad_norm[i];
        state.grad2d_count[i] += 1;
      }
    }
    interval_loss += bw.loss;
    ++interval_count;

    if (t % config.densify_interval == 0 && t >= config.densify_from &&
        t <= config.densify_until)
      densify(state, config);

    if (t >= config.t_start) {
      const RenderOutput clean = render(state.gaussians, cam, opts);
      const DcpReport dcp = analyze_dcp(clean.color, config);
      latest_ratio = dcp.violation_ratio;
      std::vector<size_t> visible;
      for (size_t i = 0; i < state.gaussians.size(); ++i)
        if (clean.visible(i, config.vis_epsilon))
          visible.push_back(i);
      std::vector<double> scores(state.gaussians.size());
      for (size_t i = 0; i < scores.size(); ++i)
        scores[i] = state.gaussians[i].dcp_score;
      accumulate_scores(scores, dcp.violation_ratio, visible);
      for (size_t i = 0; i < scores.size(); ++i)
        state.gaussians[i].dcp_score = scores[i];

      if (prune_enabled && t > config.t_start && (t - config.t_start) % config.t_prune == 0) {
        std::vector<double> opacity(state.gaussians.size());
        for (size_t i = 0; i < opacity.size(); ++i)
          opacity[i] = state.gaussians[i].opacity();
        for (size_t i = 0; i < scores.size(); ++i)
          scores[i] = state.gaussians[i].dcp_score;
        const PruneDecision dec = select_prune(scores, opacity, config);
        TrainEvent event;
        event.iter = t;
        event.type = TrainEvent::Type::Prune;
        event.lambda = dec.threshold_lambda;
        event.refused_empty = dec.refused_empty;
        event.reset = config.score_reset;
        std::vector<uint8_t> keep(state.gaussians.size(), 1);
        for (size_t idx : dec.pruned_indices) {
          keep[idx] = 0;
          event.pruned_ids.push_back(state.ids[idx]);
        }
        compact_state(state, keep);
        if (config.score_reset)
          for (auto& g : state.gaussians)
            g.dcp_score = 0.0;
        state.total_pruned += static_cast<int>(event.pruned_ids.size());
        event.count_after = static_cast<int>(state.gaussians.size());
        state.events.push_back(event);
      }
    }

    require(!state.gaussians.empty(), "train: gaussian count reached zero");

    if (t % config.log_interval == 0 || t == config.total_iters) {
      TrainReportRow row;
      row.iter = t;
      row.train_loss = interval_count ? interval_loss / interval_count : 0.0;
      interval_loss = 0;
      interval_count = 0;
      if (!scene.test_cameras.empty()) {
        const auto metrics =
            evaluate(state.gaussians, scene.test_cameras, scene.test_images, opts);
        row.test_psnr = metrics.back().psnr;
        row.test_ssim = metrics.back().ssim;
      }
      row.gaussian_count = static_cast<int>(state.gaussians.size());
      row.pruned_cum = state.total_pruned;
      double score_sum = 0;
      for (const auto& g : state.gaussians)
        score_sum += g.dcp_score;
      row.mean_dcp_score = score_sum / state.gaussians.size();
      row.violation_ratio = latest_ratio;
      report.rows.push_back(row);
    }

    if (!out_dir.empty() && t % config.checkpoint_interval == 0)
      write_checkpoint(state, out_dir);
  }

  if (!report.rows.empty()) {
    report.final_test_psnr = report.rows.back().test_psnr;
    report.final_test_ssim = report.rows.back().test_ssim;
  }

  if (!out_dir.empty()) {
    std::ofstream csv((fs::path(out_dir) / "report.csv").string(), std::ios::binary);
    csv << report.to_csv();
    std::ofstream ev((fs::path(out_dir) / "events.log").string(), std::ios::binary);
    ev << state.event_log();
    write_gaussians_ply(state.gaussians, (fs::path(out_dir) / "final_gaussians.ply").string());
  }
  return {std::move(state), std::move(report)};
}

}  // namespace splatcal
