#pragma once

#include <string>
#include <vector>

#include "splatcal/image.hpp"

namespace splatcal {

struct MetricRow {
  std::string view;
  double psnr = 0;
  double ssim = 0;
};

// 10*log10(1/MSE) over all pixels and channels, capped at the 99 dB sentinel.
double psnr(const Image& a, const Image& b);

// Mean local SSIM, 11x11 Gaussian window sigma=1.5, C1=0.01^2, C2=0.03^2,
// per channel then averaged, valid-region convolution (no padding).
double ssim(const Image& a, const Image& b);

// SSIM value plus the analytic gradient of the mean SSIM w.r.t. image `a`.
double ssim_with_gradient(const Image& a, const Image& b, Image* grad_a);

}  // namespace splatcal
