#include "splatcal/scenegen.hpp"

#include <algorithm>
#include <cmath>

#include "splatcal/renderer.hpp"
#include "splatcal/rng.hpp"

namespace splatcal {

SceneTemplate parse_template(const std::string& s) {
  if (s == "textured-wall")
    return SceneTemplate::TexturedWall;
  if (s == "two-plane-box")
    return SceneTemplate::TwoPlaneBox;
  if (s == "sphere-field")
    return SceneTemplate::SphereField;
  fail("unknown scene template '%s'", s.c_str());
}

std::string to_string(SceneTemplate t) {
  switch (t) {
    case SceneTemplate::TexturedWall:
      return "textured-wall";
    case SceneTemplate::TwoPlaneBox:
      return "two-plane-box";
    default:
      return "sphere-field";
  }
}

void SceneSpec::validate() const {
  require(surface_count > 0, "scene spec: surface_count must be positive");
  require(camera_count > 0 && test_camera_count > 0, "scene spec: camera counts must be positive");
  require(image_size >= 32, "scene spec: image_size must be at least 32");
  require(rig_radius > 0, "scene spec: rig_radius must be positive");
}

void FloaterSpec::validate() const {
  require(count >= 0, "floater spec: negative count");
  require(opacity_lo > 0 && opacity_hi < 1 && opacity_lo <= opacity_hi,
          "floater spec: opacity range must be inside (0,1)");
  require(scale_lo > 0 && scale_lo <= scale_hi, "floater spec: invalid scale range");
  require((slab_hi - slab_lo).minCoeff() > 0, "floater spec: degenerate slab");
}

namespace {

// Warm palette with a low-variance blue channel: blends of converged surface
// splats keep the local dark-channel average under the anomaly thresholds,
// so sustained violations need an actual haze veil on top.
const Eigen::Vector3d kPalette[6] = {
    {0.62, 0.18, 0.020}, {0.50, 0.42, 0.055}, {0.28, 0.45, 0.085},
    {0.55, 0.30, 0.115}, {0.36, 0.22, 0.030}, {0.60, 0.50, 0.070},
};

Eigen::Vector3d texture_color(double u, double v, uint64_t salt) {
  const long cu = static_cast<long>(std::floor(u * 4.0));
  const long cv = static_cast<long>(std::floor(v * 4.0));
  const uint64_t h = mix64(salt ^ mix64((static_cast<uint64_t>(cu) * 0x100000001b3ULL) ^
                                        (static_cast<uint64_t>(cv) + 0x9e37ULL)));
  const Eigen::Vector3d base = kPalette[h % 6];
  const double wave = 0.85 + 0.15 * std::sin(7.3 * u + 3.1 * v + (h >> 8) % 7);
  return (base * wave).cwiseMin(1.0).cwiseMax(0.0);
}

GaussianPrimitive make_surface_gaussian(const Eigen::Vector3d& pos, const Eigen::Vector3d& sigma,
                                        const Eigen::Vector4d& rot, const Eigen::Vector3d& color,
                                        RandomStream& rng) {
  GaussianPrimitive g;
  g.position = pos;
  g.log_scale = sigma.array().log();
  g.rotation = rot;
  g.normalize_rotation();
  g.opacity_logit = logit(0.90 + 0.07 * rng.uniform());
  g.color = color;
  return g;
}

// quaternion rotating +z onto `n` (unit)
Eigen::Vector4d z_to_normal(const Eigen::Vector3d& n) {
  const Eigen::Vector3d z(0, 0, 1);
  const double d = z.dot(n);
  if (d > 1 - 1e-12)
    return Eigen::Vector4d(1, 0, 0, 0);
  if (d < -1 + 1e-12)
    return Eigen::Vector4d(0, 1, 0, 0);
  const Eigen::Vector3d axis = z.cross(n);
  Eigen::Vector4d q(1 + d, axis.x(), axis.y(), axis.z());
  return q / q.norm();
}

void fill_plane(std::vector<GaussianPrimitive>& out, int count, double x0, double x1, double y0,
                double y1, double z, uint64_t salt, RandomStream& rng) {
  const double area = (x1 - x0) * (y1 - y0);
  const double spacing = std::sqrt(area / count);
  const int nx = std::max(1, static_cast<int>(std::round((x1 - x0) / spacing)));
  const int ny = std::max(1, (count + nx - 1) / nx);
  const double dx = (x1 - x0) / nx, dy = (y1 - y0) / ny;
  int placed = 0;
  for (int iy = 0; iy < ny && placed < count; ++iy)
    for (int ix = 0; ix < nx && placed < count; ++ix, ++placed) {
      const double px = x0 + (ix + 0.5) * dx + 0.25 * dx * (rng.uniform() - 0.5);
      const double py = y0 + (iy + 0.5) * dy + 0.25 * dy * (rng.uniform() - 0.5);
      const Eigen::Vector3d sigma(0.7 * dx, 0.7 * dy, 0.08 * std::min(dx, dy));
      out.push_back(make_surface_gaussian({px, py, z}, sigma, Eigen::Vector4d(1, 0, 0, 0),
                                          texture_color(px, py, salt), rng));
    }
}

}  // namespace

Scene generate(const SceneSpec& spec) {
  spec.validate();
  RandomStream rng(combine_seed(spec.seed, 0xabcd));
  Scene scene;

  switch (spec.tmpl) {
    case SceneTemplate::TexturedWall:
      fill_plane(scene.gaussians, spec.surface_count, -1.7, 1.7, -1.7, 1.7, 1.0, 11, rng);
      break;
    case SceneTemplate::TwoPlaneBox: {
      const int far_count = (spec.surface_count * 3) / 5;
      fill_plane(scene.gaussians, far_count, -2.1, 2.1, -1.7, 1.7, 1.4, 13, rng);
      fill_plane(scene.gaussians, spec.surface_count - far_count, -1.5, -0.1, -1.0, 1.0, -0.2,
                 17, rng);
      break;
    }
    case SceneTemplate::SphereField: {
      const double radius = 1.2;
      const double golden = M_PI * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < spec.surface_count; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / spec.surface_count;
        const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        const double a = golden * i;
        const Eigen::Vector3d n(r * std::cos(a), y, r * std::sin(a));
        const double spacing = std::sqrt(4.0 * M_PI * radius * radius / spec.surface_count);
        const Eigen::Vector3d sigma(0.7 * spacing, 0.7 * spacing, 0.08 * spacing);
        scene.gaussians.push_back(make_surface_gaussian(
            radius * n, sigma, z_to_normal(n),
            texture_color(std::atan2(n.z(), n.x()), std::asin(std::clamp(y, -1.0, 1.0)), 19),
            rng));
      }
      break;
    }
  }

  // training rig on an arc, held-out rig at elevated midpoints
  const double arc = spec.arc_half_deg * M_PI / 180.0;
  const double near = 0.1, far = 3.0 * spec.rig_radius;
  auto rig_camera = [&](double theta, double elevation, int id) {
    const Eigen::Vector3d eye(spec.rig_radius * std::sin(theta), elevation,
                              -spec.rig_radius * std::cos(theta));
    Camera c = make_look_at(eye, Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 1, 0),
                            spec.fov_deg, spec.image_size, spec.image_size, near, far);
    c.id = id;
    return c;
  };
  const int n = spec.camera_count;
  for (int i = 0; i < n; ++i) {
    const double theta = n == 1 ? 0.0 : -arc + 2.0 * arc * i / (n - 1);
    scene.train_cameras.push_back(rig_camera(theta, 0.0, i));
  }
  const double step = n == 1 ? arc : 2.0 * arc / (n - 1);
  for (int i = 0; i < spec.test_camera_count; ++i) {
    const double theta = -arc + step * 0.5 + step * (i % std::max(1, n - 1));
    const double elevation = (i % 2 == 0 ? 0.35 : -0.35);
    scene.test_cameras.push_back(rig_camera(theta, elevation, 1000 + i));
  }

  RenderOptions opts;
  opts.threads = spec.threads;
  auto render_quantized = [&](const Camera& cam) {
    Image img = render(scene.gaussians, cam, opts).color;
    for (double& v : img.data)
      v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    return img;
  };
  for (const auto& cam : scene.train_cameras)
    scene.train_images.push_back(render_quantized(cam));
  for (const auto& cam : scene.test_cameras)
    scene.test_images.push_back(render_quantized(cam));

  if (spec.init_position_jitter > 0) {
    RandomStream jit(combine_seed(spec.seed, 0x71d7e5));
    for (auto& g : scene.gaussians)
      for (int k = 0; k < 3; ++k)
        g.position[k] += jit.normal(0.0, spec.init_position_jitter);
  }
  scene.validate();
  return scene;
}

FloaterSpec default_floater_spec(const SceneSpec& spec) {
  FloaterSpec f;
  const double r = spec.rig_radius;
  // strictly between the rig and the nearest surface plane (z = -0.2)
  f.slab_lo = Eigen::Vector3d(-0.38 * r, -0.28 * r, -0.58 * r);
  f.slab_hi = Eigen::Vector3d(0.38 * r, 0.28 * r, -0.28 * r);
  return f;
}

std::vector<uint8_t> inject_floaters(Scene& scene, const FloaterSpec& fspec, uint64_t seed) {
  fspec.validate();
  RandomStream rng(combine_seed(seed, 0xf10a7));
  std::vector<uint8_t> flags(scene.gaussians.size(), 0);
  for (int i = 0; i < fspec.count; ++i) {
    GaussianPrimitive g;
    for (int k = 0; k < 3; ++k)
      g.position[k] = rng.uniform(fspec.slab_lo[k], fspec.slab_hi[k]);
    const double sigma = rng.uniform(fspec.scale_lo, fspec.scale_hi);
    g.log_scale.setConstant(std::log(sigma));
    g.rotation = Eigen::Vector4d(1, 0, 0, 0);
    g.opacity_logit = logit(rng.uniform(fspec.opacity_lo, fspec.opacity_hi));
    for (int k = 0; k < 3; ++k)
      g.color[k] = std::clamp(rng.normal(fspec.color_mean[k], fspec.color_std), 0.0, 1.0);
    scene.gaussians.push_back(g);
    flags.push_back(1);
  }
  return flags;
}

}  // namespace splatcal
