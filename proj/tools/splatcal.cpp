// splatcal: scene generation, calibrated training, rendering and analysis
// around depth-guided dropout and dark-channel-guided pruning.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "splatcal/dcp.hpp"
#include "splatcal/decompose.hpp"
#include "splatcal/image_io.hpp"
#include "splatcal/metrics.hpp"
#include "splatcal/renderer.hpp"
#include "splatcal/scene_io.hpp"
#include "splatcal/scenegen.hpp"
#include "splatcal/trainer.hpp"

namespace fs = std::filesystem;
using namespace splatcal;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;  // 0 = unset
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "config file (key=value lines)");
  cmd->add_option("--out", args->out_dir, "output directory");
  cmd->add_option("--set", args->overrides, "config override key=value (repeatable)");
  cmd->add_option("--seed", args->seed, "random seed")->each([args](const std::string&) {
    args->seed_given = true;
  });
  cmd->add_option("--threads", args->threads, "worker threads (env SPLATCAL_THREADS fallback)");
}

CalibConfig resolve_config(const CommonArgs& args,
                           const std::map<std::string, std::string>& flag_overrides) {
  CalibConfig cfg;
  if (!args.config_path.empty())
    cfg = CalibConfig::load(args.config_path);
  for (const std::string& kv : args.overrides) {
    const size_t eq = kv.find('=');
    require(eq != std::string::npos, "--set expects key=value, got '%s'", kv.c_str());
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [key, value] : flag_overrides)
    cfg.apply_override(key, value);
  if (args.seed_given)
    cfg.seed = args.seed;
  if (args.threads > 0) {
    cfg.threads = args.threads;
  } else if (const char* env = std::getenv("SPLATCAL_THREADS")) {
    cfg.apply_override("threads", env);
  }
  cfg.validate();
  return cfg;
}

// Snapshot written before any outputs so a run is reproducible from it.
void write_snapshot(const CalibConfig& cfg, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(fs::is_directory(out_dir), "cannot create output directory '%s'", out_dir.c_str());
  cfg.save((fs::path(out_dir) / "config.resolved.cfg").string());
}

Image gray_to_ppm(const Image& map) {
  Image img(map.width, map.height, 3);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = map.at(y, x);
  return img;
}

std::vector<std::string> list_ppm(const std::string& dir) {
  require(fs::is_directory(dir), "'%s' is not a directory", dir.c_str());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ppm")
      names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  require(!names.empty(), "no .ppm images in '%s'", dir.c_str());
  return names;
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double idx = p * (v.size() - 1);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (idx - lo);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale gaussian splatting trainer with dual-domain calibration"};
  app.require_subcommand(1);

  // gen-scene
  auto* gen = app.add_subcommand("gen-scene", "generate a synthetic benchmark scene");
  CommonArgs gen_args;
  add_common(gen, &gen_args);
  std::string tmpl = "two-plane-box";
  SceneSpec spec;
  gen->add_option("--template", tmpl, "textured-wall|two-plane-box|sphere-field");
  gen->add_option("--surface-count", spec.surface_count, "surface gaussian count");
  gen->add_option("--cameras", spec.camera_count, "training cameras");
  gen->add_option("--test-cameras", spec.test_camera_count, "held-out cameras");
  gen->add_option("--rig-radius", spec.rig_radius, "camera rig radius");
  gen->add_option("--arc", spec.arc_half_deg, "rig half-arc in degrees");
  gen->add_option("--image-size", spec.image_size, "square image side");
  gen->add_option("--init-jitter", spec.init_position_jitter,
                  "surface position jitter applied after ground truth is rendered");

  // inject-floaters
  auto* inj = app.add_subcommand("inject-floaters", "plant a floater field into a scene");
  CommonArgs inj_args;
  add_common(inj, &inj_args);
  std::string inj_scene;
  FloaterSpec fspec;
  std::vector<double> slab_box, color_mean;
  inj->add_option("--scene", inj_scene, "input scene directory")->required();
  inj->add_option("--count", fspec.count, "floater count");
  inj->add_option("--opacity-lo", fspec.opacity_lo, "opacity range low");
  inj->add_option("--opacity-hi", fspec.opacity_hi, "opacity range high");
  inj->add_option("--color-std", fspec.color_std, "per-channel color stddev");
  inj->add_option("--color-mean", color_mean, "floater mean color r g b")->expected(3);
  inj->add_option("--scale-lo", fspec.scale_lo, "floater sigma low");
  inj->add_option("--scale-hi", fspec.scale_hi, "floater sigma high");
  inj->add_option("--slab", slab_box, "slab x0 y0 z0 x1 y1 z1")->expected(6);

  // train
  auto* tr = app.add_subcommand("train", "optimize a scene");
  CommonArgs tr_args;
  add_common(tr, &tr_args);
  std::string tr_scene, ablation_name = "baseline", dropout_flag;
  std::map<std::string, std::string> tr_flags;
  tr->add_option("--scene", tr_scene, "scene directory")->required();
  tr->add_option("--ablation", ablation_name, "baseline|ddgs|cdgd|dcp_gp|cdgd+dcp_gp");
  tr->add_option("--dropout", dropout_flag, "override dropout mode: off|ddgs|cdgd");
  auto flag_opt = [&tr, &tr_flags](const char* flag, const char* key, const char* help) {
    tr->add_option(flag)->description(help)->each([&tr_flags, key](const std::string& v) {
      tr_flags[key] = v;
    });
  };
  flag_opt("--lambda-base", "lambda_base", "CDGD weight floor");
  flag_opt("--kappa", "kappa", "CDGD sigmoid steepness");
  flag_opt("--tau1", "tau1", "local dark-channel threshold");
  flag_opt("--tau2", "tau2", "pixel dark-channel threshold");
  flag_opt("--alpha-min", "alpha_min", "prune opacity gate");
  flag_opt("--eta", "eta", "prune sensitivity");
  flag_opt("--t-prune", "t_prune", "prune interval");
  flag_opt("--t-start", "t_start", "DCP warm-up iterations");
  flag_opt("--iters", "total_iters", "training iterations");
  flag_opt("--d-near", "d_near", "DDGS near threshold");
  flag_opt("--d-middle", "d_middle", "DDGS middle threshold");
  flag_opt("--lambda-middle", "lambda_middle", "DDGS middle factor");
  flag_opt("--lambda-far", "lambda_far", "DDGS far factor");

  // render
  auto* rd = app.add_subcommand("render", "render scene views to images + depth maps");
  CommonArgs rd_args;
  add_common(rd, &rd_args);
  std::string rd_scene, rd_split = "all";
  rd->add_option("--scene", rd_scene, "scene directory")->required();
  rd->add_option("--split", rd_split, "train|test|all");

  // analyze-dcp
  auto* ad = app.add_subcommand("analyze-dcp", "dark-channel maps and violation ratios");
  CommonArgs ad_args;
  add_common(ad, &ad_args);
  std::string ad_images;
  ad->add_option("--images", ad_images, "directory of .ppm images")->required();

  // analyze-decompose
  auto* dc = app.add_subcommand("analyze-decompose",
                                "floater/surface decomposition of flagged gaussians");
  CommonArgs dc_args;
  add_common(dc, &dc_args);
  std::string dc_scene, dc_flags;
  dc->add_option("--scene", dc_scene, "scene directory")->required();
  dc->add_option("--flags", dc_flags, "floater_flags.txt path")->required();

  // calibrate-dcp
  auto* cal = app.add_subcommand("calibrate-dcp", "suggest tau1/tau2 from render statistics");
  CommonArgs cal_args;
  add_common(cal, &cal_args);
  std::string cal_images;
  cal->add_option("--images", cal_images, "directory of warm-up renders (.ppm)")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "PSNR/SSIM over paired image directories");
  CommonArgs ev_args;
  add_common(ev, &ev_args);
  std::string dir_a, dir_b;
  ev->add_option("--dir-a", dir_a, "rendered images")->required();
  ev->add_option("--dir-b", dir_b, "reference images")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0)
      return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  CalibConfig cfg;
  CommonArgs* args = nullptr;
  try {
    if (gen->parsed())
      args = &gen_args;
    else if (inj->parsed())
      args = &inj_args;
    else if (tr->parsed())
      args = &tr_args;
    else if (rd->parsed())
      args = &rd_args;
    else if (ad->parsed())
      args = &ad_args;
    else if (dc->parsed())
      args = &dc_args;
    else if (cal->parsed())
      args = &cal_args;
    else
      args = &ev_args;
    cfg = resolve_config(*args, tr->parsed() ? tr_flags : std::map<std::string, std::string>{});
  } catch (const SplatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    write_snapshot(cfg, args->out_dir);
    const fs::path out(args->out_dir);
    RenderOptions ropts;
    ropts.vis_epsilon = cfg.vis_epsilon;
    ropts.threads = cfg.threads;

    if (gen->parsed()) {
      spec.tmpl = parse_template(tmpl);
      spec.seed = cfg.seed;
      spec.threads = cfg.threads;
      const Scene scene = generate(spec);
      save_scene(scene, (out / "scene").string());
      std::cout << "scene: " << scene.gaussians.size() << " gaussians, "
                << scene.train_cameras.size() << " train / " << scene.test_cameras.size()
                << " test views -> " << (out / "scene").string() << "\n";
    } else if (inj->parsed()) {
      Scene scene = load_scene(inj_scene);
      if (slab_box.size() == 6) {
        fspec.slab_lo = Eigen::Vector3d(slab_box[0], slab_box[1], slab_box[2]);
        fspec.slab_hi = Eigen::Vector3d(slab_box[3], slab_box[4], slab_box[5]);
      } else {
        double rig = 0;
        for (const auto& c : scene.train_cameras)
          rig += c.center().norm();
        SceneSpec derived;
        derived.rig_radius = rig / scene.train_cameras.size();
        fspec = [&] {
          FloaterSpec d = default_floater_spec(derived);
          d.count = fspec.count;
          d.opacity_lo = fspec.opacity_lo;
          d.opacity_hi = fspec.opacity_hi;
          d.color_std = fspec.color_std;
          d.scale_lo = fspec.scale_lo;
          d.scale_hi = fspec.scale_hi;
          d.color_mean = fspec.color_mean;
          return d;
        }();
      }
      if (color_mean.size() == 3)
        fspec.color_mean = Eigen::Vector3d(color_mean[0], color_mean[1], color_mean[2]);
      const std::vector<uint8_t> flags = inject_floaters(scene, fspec, cfg.seed);
      save_scene(scene, (out / "scene").string());
      std::vector<int> idx;
      for (size_t i = 0; i < flags.size(); ++i)
        if (flags[i])
          idx.push_back(static_cast<int>(i));
      write_flags(idx, (out / "scene" / "floater_flags.txt").string());
      std::cout << "injected " << idx.size() << " floaters -> " << (out / "scene").string()
                << "\n";
    } else if (tr->parsed()) {
      const Scene scene = load_scene(tr_scene);
      const Ablation ablation = parse_ablation(ablation_name);
      const DropoutMode mode = dropout_flag.empty() ? ablation_dropout(ablation)
                                                    : parse_dropout_mode(dropout_flag);
      auto [state, report] =
          train(scene, cfg, mode, ablation_prune(ablation), cfg.seed, args->out_dir);
      std::cout << report.to_csv();
      std::cout << "final_test_psnr=" << report.final_test_psnr
                << " final_test_ssim=" << report.final_test_ssim << " gaussians="
                << state.gaussians.size() << " pruned=" << state.total_pruned << "\n";
    } else if (rd->parsed()) {
      require(rd_split == "train" || rd_split == "test" || rd_split == "all",
              "--split must be train|test|all");
      const Scene scene = load_scene(rd_scene);
      auto render_split = [&](const std::vector<Camera>& cams) {
        for (const auto& cam : cams) {
          const RenderOutput r = render(scene.gaussians, cam, ropts);
          write_ppm(r.color, (out / (std::to_string(cam.id) + ".ppm")).string());
          write_depth(r.depth_map, cam.width, cam.height,
                      (out / (std::to_string(cam.id) + ".dpth")).string());
        }
      };
      if (rd_split == "train" || rd_split == "all")
        render_split(scene.train_cameras);
      if (rd_split == "test" || rd_split == "all")
        render_split(scene.test_cameras);
      std::cout << "rendered to " << args->out_dir << "\n";
    } else if (ad->parsed()) {
      std::ofstream csv((out / "violation_ratios.csv").string(), std::ios::binary);
      csv << "image,violation_ratio\n";
      for (const std::string& name : list_ppm(ad_images)) {
        const Image img = read_ppm((fs::path(ad_images) / name).string());
        const DcpReport rep = analyze_dcp(img, cfg);
        const std::string stem = fs::path(name).stem().string();
        write_ppm(gray_to_ppm(rep.dark), (out / (stem + "_dark.ppm")).string());
        write_ppm(gray_to_ppm(rep.dark_smoothed), (out / (stem + "_dark_avg.ppm")).string());
        Image mask(img.width, img.height, 1);
        for (size_t i = 0; i < rep.bad_mask.size(); ++i)
          mask.data[i] = rep.bad_mask[i] ? 1.0 : 0.0;
        write_ppm(gray_to_ppm(mask), (out / (stem + "_bad.ppm")).string());
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%.10g\n", name.c_str(), rep.violation_ratio);
        csv << line;
        std::cout << name << " violation_ratio=" << rep.violation_ratio << "\n";
      }
    } else if (dc->parsed()) {
      const Scene scene = load_scene(dc_scene);
      const std::vector<int> idx = read_flags(dc_flags);
      std::vector<uint8_t> flags(scene.gaussians.size(), 0);
      for (int i : idx) {
        require(i >= 0 && i < static_cast<int>(flags.size()), "flag index %d out of range", i);
        flags[i] = 1;
      }
      std::ofstream rep((out / "haze_report.txt").string(), std::ios::binary);
      double total = 0;
      for (const auto& cam : scene.train_cameras) {
        const FloaterDecomposition d = decompose(scene.gaussians, cam, flags, ropts);
        const double err = haze_approx_error(d);
        total += err;
        const std::string stem = std::to_string(cam.id);
        write_ppm(d.c_f, (out / (stem + "_cf.ppm")).string());
        write_ppm(d.c_surf, (out / (stem + "_csurf.ppm")).string());
        Image tf(d.c_f.width, d.c_f.height, 1);
        tf.data = d.t_f;
        write_ppm(gray_to_ppm(tf), (out / (stem + "_tf.ppm")).string());
        rep << "view " << cam.id << " haze_approx_error " << err << " a_est " << d.a_est[0]
            << " " << d.a_est[1] << " " << d.a_est[2] << "\n";
      }
      rep << "mean_haze_approx_error " << total / scene.train_cameras.size() << "\n";
      std::cout << "mean haze approx error: " << total / scene.train_cameras.size() << "\n";
    } else if (cal->parsed()) {
      std::vector<double> pooled_dark, pooled_smoothed;
      for (const std::string& name : list_ppm(cal_images)) {
        const Image img = read_ppm((fs::path(cal_images) / name).string());
        const DcpReport rep = analyze_dcp(img, cfg);
        pooled_dark.insert(pooled_dark.end(), rep.dark.data.begin(), rep.dark.data.end());
        pooled_smoothed.insert(pooled_smoothed.end(), rep.dark_smoothed.data.begin(),
                               rep.dark_smoothed.data.end());
      }
      const double t1 = percentile(pooled_smoothed, 0.95);
      const double t2 = percentile(pooled_dark, 0.95);
      std::cout << "suggested tau1=" << t1 << " (95th pct of local-averaged dark channel)\n";
      std::cout << "suggested tau2=" << t2 << " (95th pct of dark channel)\n";
    } else if (ev->parsed()) {
      const auto names = list_ppm(dir_a);
      std::ofstream csv((out / "metrics.csv").string(), std::ios::binary);
      csv << "view,psnr,ssim\n";
      double ps = 0, ss = 0;
      for (const std::string& name : names) {
        const Image a = read_ppm((fs::path(dir_a) / name).string());
        const Image b = read_ppm((fs::path(dir_b) / name).string());
        const double p = psnr(a, b), s = ssim(a, b);
        ps += p;
        ss += s;
        char line[256];
        std::snprintf(line, sizeof(line), "%s,%.10g,%.10g\n", name.c_str(), p, s);
        csv << line;
        std::cout << line;
      }
      char line[256];
      std::snprintf(line, sizeof(line), "mean,%.10g,%.10g\n", ps / names.size(),
                    ss / names.size());
      csv << line;
      std::cout << line;
    }
  } catch (const SplatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
