#include "splatcal/loss.hpp"

#include <cmath>

#include "splatcal/metrics.hpp"

namespace splatcal {

double photometric_loss(const Image& render, const Image& gt, double lambda1) {
  require_same_shape(render, gt);
  double l1 = 0;
  for (size_t i = 0; i < render.data.size(); ++i)
    l1 += std::abs(render.data[i] - gt.data[i]);
  l1 /= static_cast<double>(render.data.size());
  if (lambda1 == 0)
    return l1;
  return l1 + lambda1 * (1.0 - ssim(render, gt));
}

double photometric_loss_backward(const Image& render, const Image& gt, double lambda1,
                                 Image* grad) {
  require_same_shape(render, gt);
  const double inv_n = 1.0 / static_cast<double>(render.data.size());
  *grad = Image(render.width, render.height, render.channels, 0.0);
  double l1 = 0;
  for (size_t i = 0; i < render.data.size(); ++i) {
    const double d = render.data[i] - gt.data[i];
    l1 += std::abs(d);
    grad->data[i] = (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) * inv_n;
  }
  l1 *= inv_n;
  if (lambda1 == 0)
    return l1;
  Image ssim_grad;
  const double s = ssim_with_gradient(render, gt, &ssim_grad);
  for (size_t i = 0; i < grad->data.size(); ++i)
    grad->data[i] -= lambda1 * ssim_grad.data[i];
  return l1 + lambda1 * (1.0 - s);
}

}  // namespace splatcal
