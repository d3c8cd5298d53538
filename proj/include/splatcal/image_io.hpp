#pragma once

#include <string>
#include <vector>

#include "splatcal/image.hpp"

namespace splatcal {

// Binary PPM (P6, maxval 255). Values are clamped to [0,1] and rounded.
void write_ppm(const Image& img, const std::string& path);
Image read_ppm(const std::string& path);

// Float depth map: 16-byte header (magic "DPTH", u32 width, u32 height,
// u32 reserved, little-endian) followed by row-major float32 samples.
void write_depth(const std::vector<double>& depth, int width, int height,
                 const std::string& path);
std::vector<double> read_depth(const std::string& path, int* width, int* height);

}  // namespace splatcal
