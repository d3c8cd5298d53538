#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "splatcal/dropout.hpp"
#include "support/test_scenes.hpp"

using namespace splatcal;

TEST_CASE("depth importance: min-max normalization") {
  const auto d = depth_importance({2, 4, 6});
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d[2] == 1.0);
}

TEST_CASE("depth importance: flat depths collapse to zero") {
  const auto d = depth_importance({3, 3, 3, 3});
  for (double v : d)
    CHECK(v == 0.0);
}

TEST_CASE("depth importance: random lists stay in range and preserve order") {
  RandomStream rng(1);
  std::vector<double> depths;
  for (int i = 0; i < 200; ++i)
    depths.push_back(rng.uniform(0.5, 9.0));
  const auto d = depth_importance(depths);
  const double lo = *std::min_element(depths.begin(), depths.end());
  const double hi = *std::max_element(depths.begin(), depths.end());
  for (size_t i = 0; i < depths.size(); ++i) {
    CHECK(d[i] >= 0.0);
    CHECK(d[i] <= 1.0);
    CHECK(d[i] == doctest::Approx((depths[i] - lo) / (hi - lo)).epsilon(1e-12));
  }
}

TEST_CASE("piecewise probability: branch boundaries") {
  // inclusive near branch at d == d_near
  auto p = piecewise_probability({0.8}, {2.0}, 2.0, 4.0, 0.5, 0.25);
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-15));
  // just above d_near: middle factor applies
  p = piecewise_probability({0.8}, {2.0 + 1e-9}, 2.0, 4.0, 0.5, 0.25);
  CHECK(p[0] == doctest::Approx(0.4).epsilon(1e-12));
  // beyond d_middle: far factor
  p = piecewise_probability({0.8}, {4.5}, 2.0, 4.0, 0.5, 0.25);
  CHECK(p[0] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("piecewise probability: matches an explicit branch classifier") {
  RandomStream rng(2);
  std::vector<double> depths, imp;
  for (int i = 0; i < 500; ++i) {
    depths.push_back(rng.uniform(0.1, 8.0));
    imp.push_back(rng.uniform());
  }
  const double d_near = 2.0, d_middle = 4.0, lm = 0.5, lf = 0.25;
  const auto p = piecewise_probability(imp, depths, d_near, d_middle, lm, lf);
  for (size_t i = 0; i < depths.size(); ++i) {
    double expected;
    if (depths[i] <= d_near)
      expected = imp[i];
    else if (depths[i] <= d_middle)
      expected = lm * imp[i];
    else
      expected = lf * imp[i];
    CHECK(p[i] == expected);
  }
}

TEST_CASE("piecewise probability: rejects bad threshold ordering") {
  CHECK_THROWS_AS(piecewise_probability({0.5}, {1.0}, 4.0, 2.0, 0.5, 0.25), SplatError);
}

TEST_CASE("continuous weight: midpoint, asymptotes, known value") {
  CHECK(continuous_weight(1.0, 0.3, 10.0, 1.0) == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(continuous_weight(1e9, 0.3, 10.0, 1.0) == 0.3);
  CHECK(continuous_weight(-1e9, 0.3, 10.0, 1.0) == 1.0);
  // high-precision evaluation of W(1.2) at kappa=10, tau=1, lambda_base=0.3
  const long double exact = 0.3L + 0.7L / (1.0L + std::exp(2.0L));
  CHECK(continuous_weight(1.2, 0.3, 10.0, 1.0) ==
        doctest::Approx(static_cast<double>(exact)).epsilon(1e-12));
}

TEST_CASE("continuous weight: strictly decreasing, bounded, Lipschitz") {
  const double lb = 0.3, kappa = 10.0, tau = 2.5;
  double prev = continuous_weight(0.0, lb, kappa, tau);
  const double lipschitz = (1 - lb) * kappa / 4.0;
  for (int i = 1; i <= 2000; ++i) {
    const double d = i * 0.005;
    const double w = continuous_weight(d, lb, kappa, tau);
    CHECK(w >= lb);
    CHECK(w <= 1.0);
    CHECK(w < prev + 1e-15);
    CHECK(std::abs(w - prev) <= lipschitz * 0.005 + 1e-12);
    prev = w;
  }
}

TEST_CASE("make_plan: off mode keeps everything with zero probability") {
  RandomStream rng(3);
  const Camera cam = testing::axis_camera(32, 32);
  const auto gs = testing::random_render_gaussians(rng, 50, cam);
  const auto proj = project(gs, cam);
  CalibConfig cfg;
  const DropoutPlan plan = make_plan(proj.splats, gs.size(), cfg, DropoutMode::Off, 9);
  CHECK(plan.mask.size() == gs.size());
  for (uint8_t k : plan.mask)
    CHECK(k == 1);
  for (double p : plan.probability)
    CHECK(p == 0.0);
}

TEST_CASE("make_plan: identical seeds give identical masks, culled stay kept") {
  RandomStream rng(4);
  const Camera cam = testing::axis_camera(32, 32);
  auto gs = testing::random_render_gaussians(rng, 80, cam);
  gs[5].position = Eigen::Vector3d(0, 0, -3.0);  // culled by the near plane
  const auto proj = project(gs, cam);
  CalibConfig cfg;
  const DropoutPlan a = make_plan(proj.splats, gs.size(), cfg, DropoutMode::Cdgd, 123);
  const DropoutPlan b = make_plan(proj.splats, gs.size(), cfg, DropoutMode::Cdgd, 123);
  CHECK(a.mask == b.mask);
  CHECK(a.mask[5] == 1);
  const DropoutPlan c = make_plan(proj.splats, gs.size(), cfg, DropoutMode::Cdgd, 124);
  CHECK(a.mask != c.mask);
}

TEST_CASE("make_plan: probabilities obey P = D * W and stay in [0,1]") {
  RandomStream rng(5);
  const Camera cam = testing::axis_camera(32, 32);
  const auto gs = testing::random_render_gaussians(rng, 120, cam);
  const auto proj = project(gs, cam);
  CalibConfig cfg;
  for (DropoutMode mode : {DropoutMode::Ddgs, DropoutMode::Cdgd}) {
    const DropoutPlan plan = make_plan(proj.splats, gs.size(), cfg, mode, 7);
    for (size_t i = 0; i < plan.probability.size(); ++i) {
      CHECK(plan.probability[i] >= 0.0);
      CHECK(plan.probability[i] <= 1.0);
      if (mode == DropoutMode::Cdgd)
        CHECK(plan.probability[i] == plan.depth_importance[i] * plan.weight[i]);
    }
  }
}

TEST_CASE("make_plan: invert_importance flips the score direction") {
  RandomStream rng(6);
  const Camera cam = testing::axis_camera(32, 32);
  const auto gs = testing::random_render_gaussians(rng, 60, cam);
  const auto proj = project(gs, cam);
  CalibConfig cfg;
  cfg.invert_importance = true;
  const DropoutPlan inv = make_plan(proj.splats, gs.size(), cfg, DropoutMode::Cdgd, 7);
  cfg.invert_importance = false;
  const DropoutPlan raw = make_plan(proj.splats, gs.size(), cfg, DropoutMode::Cdgd, 7);
  for (size_t i = 0; i < inv.depth_importance.size(); ++i)
    CHECK(inv.depth_importance[i] ==
          doctest::Approx(1.0 - raw.depth_importance[i]).epsilon(1e-12));
}

TEST_CASE("make_plan: deeper gaussians never get a higher weight") {
  RandomStream rng(8);
  const Camera cam = testing::axis_camera(32, 32);
  const auto gs = testing::random_render_gaussians(rng, 80, cam);
  const auto proj = project(gs, cam);
  CalibConfig cfg;
  const DropoutPlan plan = make_plan(proj.splats, gs.size(), cfg, DropoutMode::Cdgd, 3);
  // projected list is depth sorted, so weights must be non-increasing
  for (size_t i = 1; i < plan.weight.size(); ++i)
    CHECK(plan.weight[i] <= plan.weight[i - 1] + 1e-12);
}

TEST_CASE("sample_mask: empirical drop rate matches the probability") {
  const size_t n = 100000;
  std::vector<double> prob(n, 0.3);
  std::vector<int> sources(n);
  for (size_t i = 0; i < n; ++i)
    sources[i] = static_cast<int>(i);
  const auto keep = sample_mask(prob, sources, n, 99);
  size_t dropped = 0;
  for (uint8_t k : keep)
    dropped += k ? 0 : 1;
  const double rate = static_cast<double>(dropped) / n;
  CHECK(std::abs(rate - 0.3) < 0.01);
}

TEST_CASE("ddgs exhibits the near-threshold jump, cdgd does not") {
  const int n = 4000;
  CalibConfig cfg;
  std::vector<double> depths(n), imp(n, 0.8);
  for (int i = 0; i < n; ++i)
    depths[i] = 1.0 + 3.0 * i / (n - 1.0);
  const auto ddgs = piecewise_probability(imp, depths, cfg.d_near, cfg.d_middle,
                                          cfg.lambda_middle, cfg.lambda_far);
  std::vector<double> cdgd(n);
  for (int i = 0; i < n; ++i)
    cdgd[i] = imp[i] * continuous_weight(depths[i], cfg.lambda_base, cfg.kappa, 2.5);
  double ddgs_jump = 0, cdgd_jump = 0;
  for (int i = 1; i < n; ++i) {
    ddgs_jump = std::max(ddgs_jump, std::abs(ddgs[i] - ddgs[i - 1]));
    cdgd_jump = std::max(cdgd_jump, std::abs(cdgd[i] - cdgd[i - 1]));
  }
  CHECK(ddgs_jump == doctest::Approx((1 - cfg.lambda_middle) * 0.8).epsilon(1e-6));
  CHECK(ddgs_jump > 5.0 * cdgd_jump);
}
