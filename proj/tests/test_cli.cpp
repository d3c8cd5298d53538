#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "splatcal/config.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin() {
  if (const char* b = std::getenv("SPLATCAL_BIN"))
    return b;
  return SPLATCAL_BIN_PATH;
}

int run(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd = bin() + " " + args + " > " + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path work_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "splatcal_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string small_scene_args(const fs::path& out) {
  return "gen-scene --template two-plane-box --surface-count 200 --cameras 3 --test-cameras 2 "
         "--image-size 48 --seed 5 --out " +
         out.string();
}

}  // namespace

TEST_CASE("cli: unknown flags exit with code 1") {
  CHECK(run("train --no-such-flag") == 1);
  CHECK(run("no-such-subcommand") == 1);
}

TEST_CASE("cli: gen-scene then deterministic train runs") {
  const fs::path dir = work_dir("train_determinism");
  REQUIRE(run(small_scene_args(dir / "gen")) == 0);
  const std::string scene = (dir / "gen" / "scene").string();
  const std::string train_args =
      " --scene " + scene +
      " --ablation cdgd+dcp_gp --seed 7 --set total_iters=60 --set t_start=30 "
      "--set t_prune=10 --set densify_from=20 --set densify_until=30 "
      "--set densify_interval=10 --set log_interval=20 --set checkpoint_interval=30";
  REQUIRE(run("train" + train_args + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run("train" + train_args + " --out " + (dir / "b").string()) == 0);
  for (const char* name : {"report.csv", "events.log", "final_gaussians.ply",
                           "config.resolved.cfg"})
    CHECK(file_bytes(dir / "a" / name) == file_bytes(dir / "b" / name));
}

TEST_CASE("cli: --dropout overrides the preset's dropout axis") {
  const fs::path dir = work_dir("dropout_flag");
  REQUIRE(run(small_scene_args(dir / "gen")) == 0);
  const std::string scene = (dir / "gen" / "scene").string();
  const std::string common = " --scene " + scene +
                             " --seed 5 --set total_iters=30 --set t_start=15 --set "
                             "log_interval=10 --set densify_from=40";
  REQUIRE(run("train --ablation baseline" + common + " --out " + (dir / "a").string()) == 0);
  REQUIRE(run("train --ablation baseline --dropout cdgd" + common + " --out " +
              (dir / "b").string()) == 0);
  REQUIRE(run("train --ablation cdgd" + common + " --out " + (dir / "c").string()) == 0);
  // the override switches training behavior: b matches the cdgd preset, not baseline
  CHECK(file_bytes(dir / "a" / "report.csv") != file_bytes(dir / "b" / "report.csv"));
  CHECK(file_bytes(dir / "b" / "report.csv") == file_bytes(dir / "c" / "report.csv"));
}

TEST_CASE("cli: config precedence is defaults < file < --set < typed flags") {
  const fs::path dir = work_dir("precedence");
  std::ofstream cfg(dir / "base.cfg");
  cfg << "lambda_base = 0.5\nkappa = 12\ntau1 = 0.2\n";
  cfg.close();
  REQUIRE(run(small_scene_args(dir / "gen")) == 0);
  REQUIRE(run("train --scene " + (dir / "gen" / "scene").string() + " --config " +
              (dir / "base.cfg").string() +
              " --set kappa=14 --set total_iters=10 --set t_start=5 --tau1 0.3 --out " +
              (dir / "run").string()) == 0);
  const splatcal::CalibConfig snapshot =
      splatcal::CalibConfig::load((dir / "run" / "config.resolved.cfg").string());
  CHECK(snapshot.lambda_base == 0.5);  // from file
  CHECK(snapshot.kappa == 14.0);       // --set beats file
  CHECK(snapshot.tau1 == 0.3);         // typed flag beats --set and file
}

TEST_CASE("cli: analyze-dcp ranks floatered renders above clean ones") {
  const fs::path dir = work_dir("dcp");
  REQUIRE(run(small_scene_args(dir / "gen")) == 0);
  const std::string scene = (dir / "gen" / "scene").string();
  REQUIRE(run("inject-floaters --scene " + scene + " --count 250 --seed 3 --out " +
              (dir / "floatered").string()) == 0);
  REQUIRE(run("render --scene " + scene + " --split train --out " +
              (dir / "clean_renders").string()) == 0);
  REQUIRE(run("render --scene " + (dir / "floatered" / "scene").string() +
              " --split train --out " + (dir / "floater_renders").string()) == 0);
  // drop depth maps so the ppm listing is the only input
  for (const auto& e : fs::directory_iterator(dir / "clean_renders"))
    if (e.path().extension() == ".dpth")
      fs::remove(e.path());
  REQUIRE(run("analyze-dcp --images " + (dir / "clean_renders").string() + " --out " +
              (dir / "dcp_clean").string()) == 0);
  REQUIRE(run("analyze-dcp --images " + (dir / "floater_renders").string() + " --out " +
              (dir / "dcp_floater").string()) == 0);

  auto mean_ratio = [](const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    double sum = 0;
    int n = 0;
    while (std::getline(in, line)) {
      const size_t comma = line.rfind(',');
      sum += std::stod(line.substr(comma + 1));
      ++n;
    }
    REQUIRE(n > 0);
    return sum / n;
  };
  const double clean = mean_ratio(dir / "dcp_clean" / "violation_ratios.csv");
  const double floatered = mean_ratio(dir / "dcp_floater" / "violation_ratios.csv");
  CHECK(floatered > clean);
}

TEST_CASE("cli: eval compares render directories") {
  const fs::path dir = work_dir("eval");
  REQUIRE(run(small_scene_args(dir / "gen")) == 0);
  const std::string scene = (dir / "gen" / "scene").string();
  REQUIRE(run("render --scene " + scene + " --split test --out " + (dir / "r").string()) == 0);
  // dir-a carries train ids that the renders directory lacks: runtime failure
  REQUIRE(run("eval --dir-a " + (dir / "gen" / "scene" / "images").string() + " --dir-b " +
              (dir / "r").string() + " --out " + (dir / "metrics").string()) == 2);

  // compare renders against themselves: psnr sentinel, ssim 1
  REQUIRE(run("eval --dir-a " + (dir / "r").string() + " --dir-b " + (dir / "r").string() +
              " --out " + (dir / "metrics2").string(), (dir / "eval.log").string()) == 0);
  const std::string log = file_bytes(dir / "eval.log");
  CHECK(log.find("mean,99,1") != std::string::npos);
}

TEST_CASE("cli: calibrate-dcp prints suggested thresholds") {
  const fs::path dir = work_dir("calibrate");
  REQUIRE(run(small_scene_args(dir / "gen")) == 0);
  REQUIRE(run("render --scene " + (dir / "gen" / "scene").string() + " --split train --out " +
              (dir / "r").string()) == 0);
  REQUIRE(run("calibrate-dcp --images " + (dir / "r").string() + " --out " +
              (dir / "cal").string(), (dir / "cal.log").string()) == 0);
  const std::string log = file_bytes(dir / "cal.log");
  CHECK(log.find("suggested tau1=") != std::string::npos);
  CHECK(log.find("suggested tau2=") != std::string::npos);
}

TEST_CASE("cli: analyze-decompose writes decomposition images and a report") {
  const fs::path dir = work_dir("decompose");
  REQUIRE(run(small_scene_args(dir / "gen")) == 0);
  REQUIRE(run("inject-floaters --scene " + (dir / "gen" / "scene").string() +
              " --count 200 --seed 5 --out " + (dir / "fl").string()) == 0);
  REQUIRE(run("analyze-decompose --scene " + (dir / "fl" / "scene").string() + " --flags " +
              (dir / "fl" / "scene" / "floater_flags.txt").string() + " --out " +
              (dir / "dec").string()) == 0);
  CHECK(fs::exists(dir / "dec" / "haze_report.txt"));
  CHECK(fs::exists(dir / "dec" / "0_cf.ppm"));
  CHECK(fs::exists(dir / "dec" / "0_csurf.ppm"));
}
