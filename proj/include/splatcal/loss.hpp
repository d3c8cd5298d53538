#pragma once

#include "splatcal/image.hpp"

namespace splatcal {

// Photometric loss: mean absolute error + lambda1 * (1 - SSIM).
double photometric_loss(const Image& render, const Image& gt, double lambda1);

// Loss value plus its gradient w.r.t. the rendered image.
double photometric_loss_backward(const Image& render, const Image& gt, double lambda1,
                                 Image* grad);

}  // namespace splatcal
