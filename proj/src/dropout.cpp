#include "splatcal/dropout.hpp"

#include <algorithm>
#include <cmath>

#include "splatcal/rng.hpp"

namespace splatcal {

DropoutMode parse_dropout_mode(const std::string& s) {
  if (s == "off")
    return DropoutMode::Off;
  if (s == "ddgs")
    return DropoutMode::Ddgs;
  if (s == "cdgd")
    return DropoutMode::Cdgd;
  fail("unknown dropout mode '%s' (expected off|ddgs|cdgd)", s.c_str());
}

std::string to_string(DropoutMode mode) {
  switch (mode) {
    case DropoutMode::Off:
      return "off";
    case DropoutMode::Ddgs:
      return "ddgs";
    default:
      return "cdgd";
  }
}

std::vector<double> depth_importance(const std::vector<double>& depths) {
  require(!depths.empty(), "depth_importance: empty depth list");
  double lo = depths[0], hi = depths[0];
  for (double d : depths) {
    require(std::isfinite(d) && d > 0, "depth_importance: invalid depth %g", d);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  std::vector<double> out(depths.size(), 0.0);
  if (hi > lo) {
    const double inv = 1.0 / (hi - lo);
    for (size_t i = 0; i < depths.size(); ++i)
      out[i] = (depths[i] - lo) * inv;
  }
  return out;
}

std::vector<double> piecewise_probability(const std::vector<double>& importance,
                                          const std::vector<double>& depths, double d_near,
                                          double d_middle, double lambda_middle,
                                          double lambda_far) {
  require(d_near > 0 && d_near < d_middle, "piecewise dropout: need 0 < d_near < d_middle");
  require(lambda_middle >= 0 && lambda_middle <= 1 && lambda_far >= 0 && lambda_far <= 1,
          "piecewise dropout: lambda factors must be in [0,1]");
  require(importance.size() == depths.size(), "piecewise dropout: length mismatch");
  std::vector<double> p(depths.size());
  for (size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] <= d_near)
      p[i] = importance[i];
    else if (depths[i] <= d_middle)
      p[i] = lambda_middle * importance[i];
    else
      p[i] = lambda_far * importance[i];
  }
  return p;
}

double continuous_weight(double d, double lambda_base, double kappa, double tau) {
  const double arg = kappa * (d - tau);
  if (arg > 700.0)
    return lambda_base;
  if (arg < -700.0)
    return 1.0;
  return lambda_base + (1.0 - lambda_base) / (1.0 + std::exp(arg));
}

std::vector<uint8_t> sample_mask(const std::vector<double>& probability,
                                 const std::vector<int>& source_indices, size_t n_total,
                                 uint64_t seed) {
  require(probability.size() == source_indices.size(), "sample_mask: length mismatch");
  std::vector<uint8_t> keep(n_total, 1);
  // ordered by source index so draws do not depend on depth sorting
  std::vector<size_t> order(probability.size());
  for (size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return source_indices[a] < source_indices[b]; });
  RandomStream rng(seed);
  for (size_t i : order) {
    const double u = rng.uniform();
    if (u < probability[i])
      keep[source_indices[i]] = 0;
  }
  return keep;
}

DropoutPlan make_plan(const std::vector<Projected2DGaussian>& projected, size_t n_total,
                      const CalibConfig& config, DropoutMode mode, uint64_t seed,
                      std::optional<double> tau_override) {
  DropoutPlan plan;
  plan.rng_seed = seed;
  const size_t n_vis = projected.size();
  if (mode == DropoutMode::Off || n_vis == 0) {
    plan.depth_importance.assign(n_vis, 0.0);
    plan.weight.assign(n_vis, 1.0);
    plan.probability.assign(n_vis, 0.0);
    plan.mask.assign(n_total, 1);
    return plan;
  }

  std::vector<double> depths(n_vis);
  std::vector<int> sources(n_vis);
  for (size_t i = 0; i < n_vis; ++i) {
    depths[i] = projected[i].depth;
    sources[i] = projected[i].source_index;
  }
  plan.depth_importance = depth_importance(depths);
  if (config.invert_importance)
    for (double& d : plan.depth_importance)
      d = 1.0 - d;

  if (mode == DropoutMode::Ddgs) {
    plan.weight.assign(n_vis, 1.0);
    plan.probability = piecewise_probability(plan.depth_importance, depths, config.d_near,
                                             config.d_middle, config.lambda_middle,
                                             config.lambda_far);
  } else {
    double tau;
    if (tau_override)
      tau = *tau_override;
    else if (config.tau_center_mode == TauCenterMode::Fixed)
      tau = config.tau_fixed;
    else
      tau = median_of(depths);
    plan.weight.resize(n_vis);
    plan.probability.resize(n_vis);
    for (size_t i = 0; i < n_vis; ++i) {
      plan.weight[i] = continuous_weight(depths[i], config.lambda_base, config.kappa, tau);
      plan.probability[i] = plan.depth_importance[i] * plan.weight[i];
    }
  }
  plan.mask = sample_mask(plan.probability, sources, n_total, seed);
  return plan;
}

}  // namespace splatcal
