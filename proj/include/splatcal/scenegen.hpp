#pragma once

#include <string>
#include <vector>

#include "splatcal/gaussian.hpp"

namespace splatcal {

enum class SceneTemplate { TexturedWall, TwoPlaneBox, SphereField };

SceneTemplate parse_template(const std::string& s);
std::string to_string(SceneTemplate t);

// Synthetic benchmark factory. Ground truth is rendered from the generated
// Gaussians themselves, so a known-optimal configuration always exists.
struct SceneSpec {
  SceneTemplate tmpl = SceneTemplate::TwoPlaneBox;
  int surface_count = 2000;
  int camera_count = 6;
  int test_camera_count = 6;
  double rig_radius = 4.0;
  double arc_half_deg = 30.0;
  double fov_deg = 55.0;
  int image_size = 64;
  uint64_t seed = 1;
  int threads = 1;
  // applied to surface positions after ground truth is rendered, emulating
  // an imperfect initialization; 0 keeps the scene self-consistent
  double init_position_jitter = 0.0;

  void validate() const;
};

// Planted floater field: low-opacity bright splats in a free-space slab
// between the camera rig and the nearest surface.
struct FloaterSpec {
  int count = 500;
  double opacity_lo = 0.02;
  double opacity_hi = 0.14;  // uniform draw, mean 0.08
  Eigen::Vector3d color_mean = Eigen::Vector3d(0.32, 0.30, 0.34);
  double color_std = 0.04;
  Eigen::Vector3d slab_lo = Eigen::Vector3d(-1.4, -1.1, -2.3);
  Eigen::Vector3d slab_hi = Eigen::Vector3d(1.4, 1.1, -1.1);
  double scale_lo = 0.06;
  double scale_hi = 0.12;

  void validate() const;
};

// Slab defaults matched to a template generated with the given spec.
FloaterSpec default_floater_spec(const SceneSpec& spec);

Scene generate(const SceneSpec& spec);

// Appends floaters and returns per-Gaussian flags marking them; ground-truth
// images are left untouched.
std::vector<uint8_t> inject_floaters(Scene& scene, const FloaterSpec& fspec, uint64_t seed);

}  // namespace splatcal
