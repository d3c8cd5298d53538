#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "splatcal/renderer.hpp"
#include "splatcal/scenegen.hpp"
#include "splatcal/trainer.hpp"
#include "support/test_scenes.hpp"

using namespace splatcal;
namespace fs = std::filesystem;

namespace {

// small benchmark used across trainer tests
Scene tiny_scene(uint64_t seed, int surface = 300, int floaters = 0) {
  SceneSpec spec;
  spec.tmpl = SceneTemplate::TwoPlaneBox;
  spec.surface_count = surface;
  spec.camera_count = 3;
  spec.test_camera_count = 2;
  spec.image_size = 48;
  spec.seed = seed;
  Scene scene = generate(spec);
  if (floaters > 0) {
    FloaterSpec fspec = default_floater_spec(spec);
    fspec.count = floaters;
    inject_floaters(scene, fspec, seed + 1);
  }
  return scene;
}

CalibConfig short_config() {
  CalibConfig cfg;
  cfg.total_iters = 120;
  cfg.t_start = 60;
  cfg.t_prune = 20;
  cfg.densify_from = 30;
  cfg.densify_until = 60;
  cfg.densify_interval = 30;
  cfg.log_interval = 40;
  cfg.checkpoint_interval = 60;
  return cfg;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("trainer: baseline preset equals dropout-off with pruning disabled") {
  const Scene scene = tiny_scene(1);
  const CalibConfig cfg = short_config();
  auto [state_a, report_a] = train(scene, cfg, Ablation::Baseline, 5);
  auto [state_b, report_b] = train(scene, cfg, DropoutMode::Off, false, 5);
  CHECK(report_a.to_csv() == report_b.to_csv());
  CHECK(state_a.event_log() == state_b.event_log());
}

TEST_CASE("trainer: identical seeds give byte-identical reports") {
  const Scene scene = tiny_scene(2);
  const CalibConfig cfg = short_config();
  auto [state_a, report_a] = train(scene, cfg, Ablation::CdgdDcpGp, 7);
  auto [state_b, report_b] = train(scene, cfg, Ablation::CdgdDcpGp, 7);
  CHECK(report_a.to_csv() == report_b.to_csv());
  CHECK(state_a.event_log() == state_b.event_log());
  REQUIRE(state_a.gaussians.size() == state_b.gaussians.size());
  for (size_t i = 0; i < state_a.gaussians.size(); ++i)
    CHECK(state_a.gaussians[i].position == state_b.gaussians[i].position);
}

TEST_CASE("trainer: thread count does not change the result") {
  const Scene scene = tiny_scene(3, 150);
  CalibConfig cfg = short_config();
  cfg.total_iters = 40;
  cfg.t_start = 20;
  auto [state_a, report_a] = train(scene, cfg, Ablation::Cdgd, 9);
  cfg.threads = 4;
  auto [state_b, report_b] = train(scene, cfg, Ablation::Cdgd, 9);
  CHECK(report_a.to_csv() == report_b.to_csv());
  for (size_t i = 0; i < state_a.gaussians.size(); ++i)
    CHECK(state_a.gaussians[i].position == state_b.gaussians[i].position);
}

TEST_CASE("trainer: single gaussian fits a constant patch") {
  // one wide splat against a constant ground-truth patch
  Scene scene;
  Camera cam = testing::axis_camera(32, 32);
  cam.id = 0;
  GaussianPrimitive g;
  g.position = Eigen::Vector3d(0, 0, 3.0);
  g.log_scale.setConstant(std::log(3.0 * 32 / cam.fx));
  g.opacity_logit = logit(0.93);
  g.color = Eigen::Vector3d(0.15, 0.7, 0.35);
  scene.gaussians.push_back(g);
  scene.train_cameras.push_back(cam);
  scene.train_images.emplace_back(32, 32, 3, 0.4);

  CalibConfig cfg;
  cfg.total_iters = 600;
  cfg.t_start = 599;
  cfg.densify_from = 700;  // densification disabled
  cfg.densify_until = 0;
  cfg.log_interval = 10;
  auto [state, report] = train(scene, cfg, Ablation::Baseline, 3);
  REQUIRE(report.rows.size() == 60);
  // interval-mean loss is monotone past iteration 100 (per-step Adam
  // transients average out at this granularity)
  for (size_t k = 10; k + 1 < report.rows.size(); ++k)
    CHECK(report.rows[k + 1].train_loss <= report.rows[k].train_loss + 1e-9);
  CHECK(report.rows.back().train_loss < 1e-3);
}

TEST_CASE("trainer: schedule conformance on a short run") {
  const Scene scene = tiny_scene(4, 250, 80);
  CalibConfig cfg = short_config();
  cfg.alpha_min = 0.2;  // encourage some pruning on this short run
  cfg.eta = 0.05;       // lambda = 1
  auto [state, report] = train(scene, cfg, Ablation::CdgdDcpGp, 11);

  int densify_events = 0, prune_events = 0;
  for (const auto& e : state.events) {
    if (e.type == TrainEvent::Type::Densify) {
      ++densify_events;
      CHECK(e.iter % cfg.densify_interval == 0);
      CHECK(e.iter >= cfg.densify_from);
      CHECK(e.iter <= cfg.densify_until);
    } else {
      ++prune_events;
      CHECK(e.iter > cfg.t_start);
      CHECK((e.iter - cfg.t_start) % cfg.t_prune == 0);
      CHECK(e.lambda == doctest::Approx(cfg.eta * cfg.t_prune));
    }
  }
  CHECK(densify_events == 2);  // iters 30 and 60
  CHECK(prune_events == 3);    // iters 80, 100, 120

  // count reconciliation from the event log
  const int expected = state.initial_count + state.total_clones + state.total_splits -
                       state.total_pruned - state.total_culled;
  CHECK(static_cast<int>(state.gaussians.size()) == expected);
}

TEST_CASE("trainer: scores never accumulate before the warm-up") {
  const Scene scene = tiny_scene(5, 200);
  CalibConfig cfg = short_config();
  cfg.total_iters = 50;
  cfg.t_start = 49;
  auto [state, report] = train(scene, cfg, Ablation::DcpGp, 13);
  // only iterations 49 and 50 accumulate; bound is iterations since start
  for (const auto& g : state.gaussians)
    CHECK(g.dcp_score <= 2.0 + 1e-12);
}

TEST_CASE("trainer: dcp scores are bounded by the window length") {
  const Scene scene = tiny_scene(6, 200);
  CalibConfig cfg = short_config();
  auto [state, report] = train(scene, cfg, Ablation::CdgdDcpGp, 15);
  // score_reset=true: between prune events scores stay below t_prune + 1
  for (const auto& g : state.gaussians)
    CHECK(g.dcp_score <= cfg.t_prune + 1.0 + 1e-12);
}

TEST_CASE("densify: below-threshold gradients change nothing") {
  TrainState state;
  state.iteration = 10;
  GaussianPrimitive g;
  g.log_scale.setConstant(std::log(0.01));
  g.opacity_logit = logit(0.5);
  state.gaussians = {g};
  state.ids = {0};
  state.next_id = 1;
  state.opt.init(1);
  state.grad2d_accum = {1e-6};
  state.grad2d_count = {1};
  state.scene_extent = 10.0;
  CalibConfig cfg;
  const TrainEvent e = densify(state, cfg);
  CHECK(e.clones == 0);
  CHECK(e.splits == 0);
  CHECK(state.gaussians.size() == 1);
}

TEST_CASE("densify: small over-threshold gaussian is cloned, sharing parameters") {
  TrainState state;
  state.iteration = 10;
  GaussianPrimitive g;
  g.position = Eigen::Vector3d(1, 2, 3);
  g.log_scale.setConstant(std::log(0.01));  // below 1% of extent
  g.opacity_logit = logit(0.5);
  g.color = Eigen::Vector3d(0.2, 0.4, 0.6);
  state.gaussians = {g};
  state.ids = {0};
  state.next_id = 1;
  state.opt.init(1);
  state.grad2d_accum = {1.0};
  state.grad2d_count = {1};
  state.scene_extent = 10.0;
  CalibConfig cfg;
  const TrainEvent e = densify(state, cfg);
  CHECK(e.clones == 1);
  CHECK(e.splits == 0);
  REQUIRE(state.gaussians.size() == 2);
  CHECK(state.gaussians[1].position == g.position);
  CHECK(state.gaussians[1].color == g.color);
  CHECK(state.ids[1] == 1);
  CHECK(state.opt.size() == 2);
}

TEST_CASE("densify: large over-threshold gaussian splits into two offset children") {
  TrainState state;
  state.iteration = 10;
  GaussianPrimitive g;
  g.position = Eigen::Vector3d(0, 0, 5);
  g.log_scale = Eigen::Vector3d(std::log(0.5), std::log(0.1), std::log(0.1));
  g.opacity_logit = logit(0.5);
  state.gaussians = {g};
  state.ids = {0};
  state.next_id = 1;
  state.opt.init(1);
  state.grad2d_accum = {1.0};
  state.grad2d_count = {1};
  state.scene_extent = 10.0;  // 1% of extent = 0.1 < 0.5 -> split
  CalibConfig cfg;
  const TrainEvent e = densify(state, cfg);
  CHECK(e.splits == 1);
  CHECK(e.clones == 0);
  REQUIRE(state.gaussians.size() == 2);  // parent retired, two children
  const Eigen::Vector3d mid = 0.5 * (state.gaussians[0].position + state.gaussians[1].position);
  CHECK((mid - g.position).norm() < 1e-12);
  CHECK((state.gaussians[0].position - state.gaussians[1].position).norm() ==
        doctest::Approx(0.5).epsilon(1e-9));  // 2 * 0.5 * sigma_max
  for (int k = 0; k < 3; ++k)
    CHECK(state.gaussians[0].log_scale[k] ==
          doctest::Approx(g.log_scale[k] - std::log(1.6)).epsilon(1e-12));
}

TEST_CASE("evaluate: perfect render and mean row") {
  const Scene scene = tiny_scene(8, 150);
  // evaluating the generated scene against its own (quantized) ground truth
  const auto rows = evaluate(scene.gaussians, scene.test_cameras, scene.test_images);
  REQUIRE(rows.size() == scene.test_cameras.size() + 1);
  double psnr_sum = 0, ssim_sum = 0;
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    psnr_sum += rows[i].psnr;
    ssim_sum += rows[i].ssim;
  }
  CHECK(rows.back().view == "mean");
  CHECK(rows.back().psnr == doctest::Approx(psnr_sum / scene.test_cameras.size()));
  CHECK(rows.back().ssim == doctest::Approx(ssim_sum / scene.test_cameras.size()));

  // exact-match case: sentinel psnr and unit ssim
  Scene exact = scene;
  exact.test_images.clear();
  for (const auto& cam : exact.test_cameras)
    exact.test_images.push_back(render(exact.gaussians, cam).color);
  const auto perfect = evaluate(exact.gaussians, exact.test_cameras, exact.test_images);
  CHECK(perfect.back().psnr == 99.0);
  CHECK(perfect.back().ssim == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trainer: output files are deterministic across runs") {
  const fs::path dir = fs::temp_directory_path() / "splatcal_tests" / "train_files";
  fs::remove_all(dir);
  const Scene scene = tiny_scene(9, 150);
  CalibConfig cfg = short_config();
  train(scene, cfg, Ablation::CdgdDcpGp, 21, (dir / "a").string());
  train(scene, cfg, Ablation::CdgdDcpGp, 21, (dir / "b").string());
  for (const char* name : {"report.csv", "events.log", "final_gaussians.ply"})
    CHECK(file_bytes(dir / "a" / name) == file_bytes(dir / "b" / name));
  CHECK(file_bytes(dir / "a" / "ckpt_000060" / "train_state.bin") ==
        file_bytes(dir / "b" / "ckpt_000060" / "train_state.bin"));
  CHECK(file_bytes(dir / "a" / "ckpt_000120" / "gaussians.ply") ==
        file_bytes(dir / "b" / "ckpt_000120" / "gaussians.ply"));
}

TEST_CASE("trainer: evaluation ignores dropout masks") {
  // identical final states must evaluate identically whether or not training
  // used dropout; evaluate() always renders clean
  const Scene scene = tiny_scene(10, 120);
  const auto rows_a = evaluate(scene.gaussians, scene.test_cameras, scene.test_images);
  const auto rows_b = evaluate(scene.gaussians, scene.test_cameras, scene.test_images);
  CHECK(rows_a.back().psnr == rows_b.back().psnr);
}
