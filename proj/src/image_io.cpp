#include "splatcal/image_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "splatcal/error.hpp"

namespace splatcal {

void write_ppm(const Image& img, const std::string& path) {
  require(img.channels == 3, "ppm: need 3 channels, got %d", img.channels);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "ppm: cannot write '%s'", path.c_str());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(img.at(y, x, c), 0.0, 1.0);
        row[static_cast<size_t>(x) * 3 + c] = static_cast<uint8_t>(v * 255.0 + 0.5);
      }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  require(out.good(), "ppm: write failed for '%s'", path.c_str());
}

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "ppm: cannot open '%s'", path.c_str());
  std::string magic;
  in >> magic;
  require(magic == "P6", "ppm: '%s' is not a binary P6 file", path.c_str());
  auto next_int = [&](const char* what) {
    // skip whitespace and '#' comments
    while (true) {
      const int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    in >> v;
    require(in.good() && v >= 0, "ppm: '%s' has invalid %s", path.c_str(), what);
    return v;
  };
  const long w = next_int("width");
  const long h = next_int("height");
  const long maxval = next_int("maxval");
  require(maxval == 255, "ppm: '%s' maxval %ld unsupported (need 255)", path.c_str(), maxval);
  in.get();  // single whitespace after header
  Image img(static_cast<int>(w), static_cast<int>(h), 3);
  std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  require(in.gcount() == static_cast<std::streamsize>(raw.size()), "ppm: '%s' truncated",
          path.c_str());
  for (size_t i = 0; i < raw.size(); ++i)
    img.data[i] = raw[i] / 255.0;
  return img;
}

namespace {

void put_u32(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_depth(const std::vector<double>& depth, int width, int height,
                 const std::string& path) {
  require(depth.size() == static_cast<size_t>(width) * height, "depth: size mismatch");
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "depth: cannot write '%s'", path.c_str());
  out.write("DPTH", 4);
  put_u32(out, static_cast<uint32_t>(width));
  put_u32(out, static_cast<uint32_t>(height));
  put_u32(out, 0);
  std::vector<float> buf(depth.size());
  for (size_t i = 0; i < depth.size(); ++i)
    buf[i] = static_cast<float>(depth[i]);
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(float));
  require(out.good(), "depth: write failed for '%s'", path.c_str());
}

std::vector<double> read_depth(const std::string& path, int* width, int* height) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "depth: cannot open '%s'", path.c_str());
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, "DPTH", 4) == 0, "depth: '%s' bad magic", path.c_str());
  const uint32_t w = get_u32(in);
  const uint32_t h = get_u32(in);
  get_u32(in);  // reserved
  std::vector<float> buf(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(buf.data()), buf.size() * sizeof(float));
  require(in.gcount() == static_cast<std::streamsize>(buf.size() * sizeof(float)),
          "depth: '%s' truncated", path.c_str());
  *width = static_cast<int>(w);
  *height = static_cast<int>(h);
  return std::vector<double>(buf.begin(), buf.end());
}

}  // namespace splatcal
