#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "splatcal/error.hpp"

namespace splatcal {

// Dense row-major image, double precision, 1 or 3 channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c, double fill = 0.0)
      : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

  double& at(int y, int x, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v))
        return false;
    return true;
  }
};

inline void require_same_shape(const Image& a, const Image& b) {
  require(a.same_shape(b), "image shape mismatch: %dx%dx%d vs %dx%dx%d", a.width, a.height,
          a.channels, b.width, b.height, b.channels);
}

}  // namespace splatcal
