#include "splatcal/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "splatcal/error.hpp"

namespace splatcal {

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b);
  double sq = 0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(a.data.size());
  if (mse == 0)
    return 99.0;
  return std::min(10.0 * std::log10(1.0 / mse), 99.0);
}

namespace {

constexpr int kWin = 11;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kWin> gaussian_kernel() {
  std::array<double, kWin> k{};
  double sum = 0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    k[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += k[i];
  }
  for (double& v : k)
    v /= sum;
  return k;
}

// Valid separable correlation of a single-channel plane (H x W -> Hv x Wv).
void conv_valid(const std::vector<double>& src, int h, int w, std::vector<double>& dst,
                const std::array<double, kWin>& k) {
  const int wv = w - kWin + 1;
  const int hv = h - kWin + 1;
  std::vector<double> tmp(static_cast<size_t>(h) * wv);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < wv; ++x) {
      double s = 0;
      for (int a = 0; a < kWin; ++a)
        s += k[a] * src[static_cast<size_t>(y) * w + x + a];
      tmp[static_cast<size_t>(y) * wv + x] = s;
    }
  dst.assign(static_cast<size_t>(hv) * wv, 0.0);
  for (int y = 0; y < hv; ++y)
    for (int x = 0; x < wv; ++x) {
      double s = 0;
      for (int a = 0; a < kWin; ++a)
        s += k[a] * tmp[static_cast<size_t>(y + a) * wv + x];
      dst[static_cast<size_t>(y) * wv + x] = s;
    }
}

// Transpose of conv_valid: scatter window-level coefficients back to pixels.
void conv_scatter(const std::vector<double>& src, int hv, int wv, std::vector<double>& dst,
                  int h, int w, const std::array<double, kWin>& k) {
  std::vector<double> tmp(static_cast<size_t>(hv) * w, 0.0);
  for (int y = 0; y < hv; ++y)
    for (int x = 0; x < wv; ++x) {
      const double v = src[static_cast<size_t>(y) * wv + x];
      if (v == 0)
        continue;
      for (int a = 0; a < kWin; ++a)
        tmp[static_cast<size_t>(y) * w + x + a] += k[a] * v;
    }
  dst.assign(static_cast<size_t>(h) * w, 0.0);
  for (int y = 0; y < hv; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = tmp[static_cast<size_t>(y) * w + x];
      if (v == 0)
        continue;
      for (int a = 0; a < kWin; ++a)
        dst[static_cast<size_t>(y + a) * w + x] += k[a] * v;
    }
}

struct ChannelPlanes {
  std::vector<double> x, y, xx, yy, xy;
};

void extract_planes(const Image& a, const Image& b, int c, ChannelPlanes& p) {
  const size_t n = static_cast<size_t>(a.width) * a.height;
  p.x.resize(n);
  p.y.resize(n);
  p.xx.resize(n);
  p.yy.resize(n);
  p.xy.resize(n);
  for (int yy = 0; yy < a.height; ++yy)
    for (int xx = 0; xx < a.width; ++xx) {
      const size_t i = static_cast<size_t>(yy) * a.width + xx;
      const double av = a.at(yy, xx, c);
      const double bv = b.at(yy, xx, c);
      p.x[i] = av;
      p.y[i] = bv;
      p.xx[i] = av * av;
      p.yy[i] = bv * bv;
      p.xy[i] = av * bv;
    }
}

}  // namespace

double ssim(const Image& a, const Image& b) { return ssim_with_gradient(a, b, nullptr); }

double ssim_with_gradient(const Image& a, const Image& b, Image* grad_a) {
  require_same_shape(a, b);
  require(std::min(a.width, a.height) >= kWin, "ssim: image %dx%d smaller than %dx%d window",
          a.width, a.height, kWin, kWin);
  static const std::array<double, kWin> k = gaussian_kernel();
  const int h = a.height, w = a.width;
  const int hv = h - kWin + 1, wv = w - kWin + 1;
  const size_t nv = static_cast<size_t>(hv) * wv;
  const double norm = 1.0 / (nv * a.channels);

  if (grad_a)
    *grad_a = Image(w, h, a.channels, 0.0);

  double total = 0;
  ChannelPlanes planes;
  std::vector<double> mx, my, mxx, myy, mxy;
  std::vector<double> g1, g2, g3, s1, s2, s3;
  for (int c = 0; c < a.channels; ++c) {
    extract_planes(a, b, c, planes);
    conv_valid(planes.x, h, w, mx, k);
    conv_valid(planes.y, h, w, my, k);
    conv_valid(planes.xx, h, w, mxx, k);
    conv_valid(planes.yy, h, w, myy, k);
    conv_valid(planes.xy, h, w, mxy, k);

    if (grad_a) {
      g1.assign(nv, 0.0);
      g2.assign(nv, 0.0);
      g3.assign(nv, 0.0);
    }
    for (size_t i = 0; i < nv; ++i) {
      const double ux = mx[i], uy = my[i];
      const double vx = mxx[i] - ux * ux;
      const double vy = myy[i] - uy * uy;
      const double vxy = mxy[i] - ux * uy;
      const double a1 = 2 * ux * uy + kC1;
      const double a2 = 2 * vxy + kC2;
      const double b1 = ux * ux + uy * uy + kC1;
      const double b2 = vx + vy + kC2;
      const double s = (a1 * a2) / (b1 * b2);
      total += s;
      if (grad_a) {
        const double d_a1 = a2 / (b1 * b2);
        const double d_a2 = a1 / (b1 * b2);
        const double d_b1 = -s / b1;
        const double d_b2 = -s / b2;
        const double d_ux = d_a1 * 2 * uy + d_b1 * 2 * ux;  // direct mean path
        const double d_vx = d_b2;
        const double d_vxy = d_a2 * 2;
        // raw-moment chain: vx = mxx - mx^2, vxy = mxy - mx*my
        g1[i] = d_ux - d_vx * 2 * ux - d_vxy * uy;  // d/d mx
        g2[i] = d_vx;                               // d/d mxx
        g3[i] = d_vxy;                              // d/d mxy
      }
    }
    if (grad_a) {
      conv_scatter(g1, hv, wv, s1, h, w, k);
      conv_scatter(g2, hv, wv, s2, h, w, k);
      conv_scatter(g3, hv, wv, s3, h, w, k);
      for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
          const size_t i = static_cast<size_t>(yy) * w + xx;
          grad_a->at(yy, xx, c) =
              norm * (s1[i] + 2.0 * planes.x[i] * s2[i] + planes.y[i] * s3[i]);
        }
    }
  }
  return total * norm;
}

}  // namespace splatcal
