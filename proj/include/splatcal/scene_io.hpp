#pragma once

#include <string>
#include <vector>

#include "splatcal/gaussian.hpp"

namespace splatcal {

// Scene directory layout:
//   gaussians.ply   binary little-endian PLY, double properties
//                   x y z scale_0..2 rot_0..3 opacity f_dc_0..2
//                   (scale = raw stddev, rot = unit wxyz quaternion,
//                    opacity = pre-activation logit, f_dc = RGB in [0,1])
//   cameras.txt     one line per camera: id fx fy cx cy width height near far
//                   then 12 extrinsic floats row-major ([R|t] rows);
//                   '# split train|test' comment lines switch the target list
//   images/<id>.ppm ground truth per camera (binary P6, maxval 255)
//   scene.cfg       key=value provenance metadata
Scene load_scene(const std::string& dir);
void save_scene(const Scene& scene, const std::string& dir);

// Gaussian records alone (used by checkpoints).
void write_gaussians_ply(const std::vector<GaussianPrimitive>& gaussians,
                         const std::string& path);
std::vector<GaussianPrimitive> read_gaussians_ply(const std::string& path);

// One planted-floater index per line.
void write_flags(const std::vector<int>& indices, const std::string& path);
std::vector<int> read_flags(const std::string& path);

}  // namespace splatcal
