#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "splatcal/config.hpp"
#include "splatcal/projection.hpp"

namespace splatcal {

enum class DropoutMode { Off, Ddgs, Cdgd };

DropoutMode parse_dropout_mode(const std::string& s);
std::string to_string(DropoutMode mode);

// Per-iteration training-time dropout plan. Entries of the per-visible
// vectors parallel the projected splat list; `mask` covers all Gaussians
// (culled ones are kept with probability zero).
struct DropoutPlan {
  std::vector<double> depth_importance;  // D_i in [0,1]
  std::vector<double> weight;            // W(d_i) in [lambda_base, 1]
  std::vector<double> probability;       // P_i = D_i * W(d_i)
  std::vector<uint8_t> mask;             // keep=1 / drop=0, length n_total
  uint64_t rng_seed = 0;
};

// Min-max normalized depth: (d - min) / (max - min); all zero when flat.
std::vector<double> depth_importance(const std::vector<double>& depths);

// Piecewise step dropout (the discrete baseline): full importance up to
// d_near, attenuated by lambda_middle / lambda_far beyond.
std::vector<double> piecewise_probability(const std::vector<double>& importance,
                                          const std::vector<double>& depths, double d_near,
                                          double d_middle, double lambda_middle,
                                          double lambda_far);

// W(d) = lambda_base + (1 - lambda_base) / (1 + exp(kappa * (d - tau))),
// saturating to the asymptotes on exp overflow.
double continuous_weight(double d, double lambda_base, double kappa, double tau);

// Bernoulli keep draw: drop the i-th visible splat when u_i < P_i. Draws are
// consumed in ascending source index so the mask is independent of sort order.
std::vector<uint8_t> sample_mask(const std::vector<double>& probability,
                                 const std::vector<int>& source_indices, size_t n_total,
                                 uint64_t seed);

DropoutPlan make_plan(const std::vector<Projected2DGaussian>& projected, size_t n_total,
                      const CalibConfig& config, DropoutMode mode, uint64_t seed,
                      std::optional<double> tau_override = std::nullopt);

}  // namespace splatcal
