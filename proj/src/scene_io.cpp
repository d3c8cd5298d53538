#include "splatcal/scene_io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "splatcal/image_io.hpp"

namespace fs = std::filesystem;

namespace splatcal {

namespace {

constexpr const char* kFields[14] = {"x",     "y",     "z",     "scale_0", "scale_1",
                                     "scale_2", "rot_0", "rot_1", "rot_2",   "rot_3",
                                     "opacity", "f_dc_0", "f_dc_1", "f_dc_2"};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void gather_fields(const GaussianPrimitive& g, double out[14]) {
  const Eigen::Vector3d s = g.scales();
  out[0] = g.position[0];
  out[1] = g.position[1];
  out[2] = g.position[2];
  out[3] = s[0];
  out[4] = s[1];
  out[5] = s[2];
  out[6] = g.rotation[0];
  out[7] = g.rotation[1];
  out[8] = g.rotation[2];
  out[9] = g.rotation[3];
  out[10] = g.opacity_logit;
  out[11] = g.color[0];
  out[12] = g.color[1];
  out[13] = g.color[2];
}

GaussianPrimitive scatter_fields(const double in[14], const std::string& file, size_t idx) {
  for (int f = 0; f < 14; ++f)
    require(std::isfinite(in[f]), "%s: record %zu: non-finite %s", file.c_str(), idx,
            kFields[f]);
  GaussianPrimitive g;
  g.position = Eigen::Vector3d(in[0], in[1], in[2]);
  for (int a = 0; a < 3; ++a) {
    require(in[3 + a] > 0, "%s: record %zu: non-positive scale_%d", file.c_str(), idx, a);
    g.log_scale[a] = std::log(in[3 + a]);
  }
  g.rotation = Eigen::Vector4d(in[6], in[7], in[8], in[9]);
  require(g.rotation.norm() > 1e-6, "%s: record %zu: zero-norm rotation", file.c_str(), idx);
  g.normalize_rotation();
  g.opacity_logit = in[10];
  for (int c = 0; c < 3; ++c) {
    require(in[11 + c] >= -1e-9 && in[11 + c] <= 1 + 1e-9,
            "%s: record %zu: f_dc_%d out of [0,1]", file.c_str(), idx, c);
    g.color[c] = std::clamp(in[11 + c], 0.0, 1.0);
  }
  return g;
}

}  // namespace

void write_gaussians_ply(const std::vector<GaussianPrimitive>& gaussians,
                         const std::string& path) {
  require(!gaussians.empty(), "empty gaussian set");
  for (size_t i = 0; i < gaussians.size(); ++i)
    require(gaussians[i].finite(), "%s: record %zu: non-finite value, refusing to save",
            path.c_str(), i);
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '%s'", path.c_str());
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << gaussians.size() << "\n";
  for (const char* f : kFields)
    out << "property double " << f << "\n";
  out << "end_header\n";
  double rec[14];
  for (const auto& g : gaussians) {
    gather_fields(g, rec);
    out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
  }
  require(out.good(), "write failed for '%s'", path.c_str());
}

std::vector<GaussianPrimitive> read_gaussians_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open '%s'", path.c_str());
  std::string line;
  std::getline(in, line);
  require(line == "ply", "%s: not a PLY file", path.c_str());
  std::getline(in, line);
  require(line == "format binary_little_endian 1.0", "%s: unsupported PLY format '%s'",
          path.c_str(), line.c_str());

  size_t count = 0;
  struct Prop {
    std::string name;
    int bytes = 0;  // 4 = float, 8 = double
  };
  std::vector<Prop> props;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    if (line == "end_header")
      break;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment")
      continue;
    if (tok == "element") {
      std::string name;
      ls >> name >> count;
      in_vertex = (name == "vertex");
      require(in_vertex, "%s: unexpected element '%s'", path.c_str(), name.c_str());
    } else if (tok == "property") {
      require(in_vertex, "%s: property outside vertex element", path.c_str());
      std::string type, name;
      ls >> type >> name;
      int bytes = 0;
      if (type == "double" || type == "float64")
        bytes = 8;
      else if (type == "float" || type == "float32")
        bytes = 4;
      else
        fail("%s: unsupported property type '%s'", path.c_str(), type.c_str());
      props.push_back({name, bytes});
    }
  }
  require(count > 0, "empty gaussian set");

  int offsets[14];
  int stride = 0;
  std::map<std::string, std::pair<int, int>> layout;  // name -> (offset, bytes)
  for (const auto& p : props) {
    layout[p.name] = {stride, p.bytes};
    stride += p.bytes;
  }
  int sizes[14];
  for (int f = 0; f < 14; ++f) {
    const auto it = layout.find(kFields[f]);
    require(it != layout.end(), "%s: missing property '%s'", path.c_str(), kFields[f]);
    offsets[f] = it->second.first;
    sizes[f] = it->second.second;
  }

  std::vector<GaussianPrimitive> out;
  out.reserve(count);
  std::vector<char> rec(stride);
  for (size_t i = 0; i < count; ++i) {
    in.read(rec.data(), stride);
    require(in.gcount() == stride, "%s: record %zu: truncated file", path.c_str(), i);
    double vals[14];
    for (int f = 0; f < 14; ++f) {
      if (sizes[f] == 8) {
        std::memcpy(&vals[f], rec.data() + offsets[f], 8);
      } else {
        float v;
        std::memcpy(&v, rec.data() + offsets[f], 4);
        vals[f] = v;
      }
    }
    out.push_back(scatter_fields(vals, path, i));
  }
  return out;
}

namespace {

void write_cameras(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '%s'", path.c_str());
  auto write_one = [&](const Camera& c) {
    out << c.id << " " << fmt17(c.fx) << " " << fmt17(c.fy) << " " << fmt17(c.cx) << " "
        << fmt17(c.cy) << " " << c.width << " " << c.height << " " << fmt17(c.near) << " "
        << fmt17(c.far);
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k)
        out << " " << fmt17(c.rot(r, k));
      out << " " << fmt17(c.trans[r]);
    }
    out << "\n";
  };
  out << "# split train\n";
  for (const auto& c : scene.train_cameras)
    write_one(c);
  out << "# split test\n";
  for (const auto& c : scene.test_cameras)
    write_one(c);
  require(out.good(), "write failed for '%s'", path.c_str());
}

void read_cameras(const std::string& path, std::vector<Camera>* train,
                  std::vector<Camera>* test) {
  std::ifstream in(path);
  require(in.good(), "cannot open '%s'", path.c_str());
  std::string line;
  std::vector<Camera>* target = train;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') {
      if (line.find("# split test") == 0)
        target = test;
      else if (line.find("# split train") == 0)
        target = train;
      continue;
    }
    std::istringstream ls(line);
    Camera c;
    ls >> c.id >> c.fx >> c.fy >> c.cx >> c.cy >> c.width >> c.height >> c.near >> c.far;
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k)
        ls >> c.rot(r, k);
      ls >> c.trans[r];
    }
    require(!ls.fail(), "%s:%d: malformed camera record", path.c_str(), lineno);
    target->push_back(c);
  }
}

}  // namespace

void save_scene(const Scene& scene, const std::string& dir) {
  require(!scene.gaussians.empty(), "empty gaussian set");
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::create_directories(fs::path(dir) / "images", ec);
  require(fs::is_directory(dir), "cannot create scene directory '%s'", dir.c_str());

  write_gaussians_ply(scene.gaussians, (fs::path(dir) / "gaussians.ply").string());
  write_cameras(scene, (fs::path(dir) / "cameras.txt").string());
  for (size_t i = 0; i < scene.train_cameras.size(); ++i)
    write_ppm(scene.train_images[i],
              (fs::path(dir) / "images" / (std::to_string(scene.train_cameras[i].id) + ".ppm"))
                  .string());
  for (size_t i = 0; i < scene.test_cameras.size(); ++i)
    write_ppm(scene.test_images[i],
              (fs::path(dir) / "images" / (std::to_string(scene.test_cameras[i].id) + ".ppm"))
                  .string());

  std::ofstream meta((fs::path(dir) / "scene.cfg").string(), std::ios::binary);
  meta << "gaussian_count = " << scene.gaussians.size() << "\n";
  meta << "train_views = " << scene.train_cameras.size() << "\n";
  meta << "test_views = " << scene.test_cameras.size() << "\n";
}

Scene load_scene(const std::string& dir) {
  require(fs::is_directory(dir), "scene directory '%s' not found", dir.c_str());
  Scene scene;
  scene.gaussians = read_gaussians_ply((fs::path(dir) / "gaussians.ply").string());
  read_cameras((fs::path(dir) / "cameras.txt").string(), &scene.train_cameras,
               &scene.test_cameras);
  auto load_images = [&](const std::vector<Camera>& cams, std::vector<Image>* imgs) {
    for (const auto& c : cams)
      imgs->push_back(
          read_ppm((fs::path(dir) / "images" / (std::to_string(c.id) + ".ppm")).string()));
  };
  load_images(scene.train_cameras, &scene.train_images);
  load_images(scene.test_cameras, &scene.test_images);
  scene.validate();
  return scene;
}

void write_flags(const std::vector<int>& indices, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '%s'", path.c_str());
  for (int i : indices)
    out << i << "\n";
  require(out.good(), "write failed for '%s'", path.c_str());
}

std::vector<int> read_flags(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open '%s'", path.c_str());
  std::vector<int> out;
  int v;
  while (in >> v)
    out.push_back(v);
  return out;
}

}  // namespace splatcal
