#include "splatcal/dcp.hpp"

#include <algorithm>
#include <cmath>

namespace splatcal {

Image dark_channel(const Image& image) {
  require(image.channels == 3, "dark_channel: need 3 channels, got %d", image.channels);
  Image dark(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      dark.at(y, x) = std::min({image.at(y, x, 0), image.at(y, x, 1), image.at(y, x, 2)});
  return dark;
}

Image local_average(const Image& map, int window) {
  require(map.channels == 1, "local_average: need 1 channel, got %d", map.channels);
  require(window % 2 == 1 && window > 0, "local_average: window must be odd, got %d", window);
  require(window <= std::min(map.width, map.height),
          "local_average: window %d exceeds map %dx%d", window, map.width, map.height);
  const int r = window / 2;
  const double inv = 1.0 / window;
  // separable box mean with clamped (replicated) borders
  Image tmp(map.width, map.height, 1);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      double s = 0;
      for (int k = -r; k <= r; ++k)
        s += map.at(y, std::clamp(x + k, 0, map.width - 1));
      tmp.at(y, x) = s * inv;
    }
  Image out(map.width, map.height, 1);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      double s = 0;
      for (int k = -r; k <= r; ++k)
        s += tmp.at(std::clamp(y + k, 0, map.height - 1), x);
      out.at(y, x) = s * inv;
    }
  return out;
}

std::pair<std::vector<uint8_t>, double> anomaly_mask(const Image& dark,
                                                     const Image& dark_smoothed, double tau1,
                                                     double tau2) {
  require_same_shape(dark, dark_smoothed);
  std::vector<uint8_t> mask(dark.data.size(), 0);
  size_t bad = 0;
  for (size_t i = 0; i < dark.data.size(); ++i) {
    if (dark_smoothed.data[i] > tau1 && dark.data[i] > tau2) {
      mask[i] = 1;
      ++bad;
    }
  }
  return {std::move(mask), static_cast<double>(bad) / static_cast<double>(dark.data.size())};
}

DcpReport analyze_dcp(const Image& image, const CalibConfig& cfg) {
  DcpReport rep;
  rep.dark = dark_channel(image);
  const int window = std::min(cfg.dcp_window, std::min(image.width, image.height));
  rep.dark_smoothed = local_average(rep.dark, window % 2 == 1 ? window : window - 1);
  auto [mask, ratio] = anomaly_mask(rep.dark, rep.dark_smoothed, cfg.tau1, cfg.tau2);
  rep.bad_mask = std::move(mask);
  rep.violation_ratio = ratio;
  return rep;
}

void accumulate_scores(std::vector<double>& scores, double ratio,
                       const std::vector<size_t>& visible) {
  for (size_t i : visible)
    scores[i] += ratio;
}

PruneDecision select_prune(const std::vector<double>& scores,
                           const std::vector<double>& activated_opacity,
                           const CalibConfig& cfg) {
  require(scores.size() == activated_opacity.size(), "select_prune: length mismatch");
  PruneDecision dec;
  dec.threshold_lambda = cfg.eta * cfg.t_prune;
  for (size_t i = 0; i < scores.size(); ++i)
    if (scores[i] > dec.threshold_lambda && activated_opacity[i] < cfg.alpha_min)
      dec.pruned_indices.push_back(i);
  if (dec.pruned_indices.size() == scores.size()) {
    dec.pruned_indices.clear();
    dec.refused_empty = true;
  }
  return dec;
}

}  // namespace splatcal
