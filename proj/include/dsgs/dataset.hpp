#pragma once

#include <string>
#include <vector>

#include "dsgs/camera.hpp"

namespace dsgs {

// A D-NeRF style dataset: transforms_{train,test}.json plus PNG frames.
struct Dataset {
  double camera_angle_x = 0.0;
  std::vector<Frame> train, test;
  Vec3 bounds_min = Vec3::Constant(-1.5);
  Vec3 bounds_max = Vec3::Constant(1.5);
  std::string root;
};

struct DatasetOptions {
  int downscale = 1;               // integer factor applied to images + intrinsics
  Vec3 background = Vec3(1, 1, 1); // alpha-composite background
};

// Parses the JSON manifests, converts poses from the Blender/OpenGL
// convention (x right, y up, z backward) to the internal one (x right,
// y down, z forward), and loads + composites the PNGs.
Dataset load_dataset(const std::string& root, const DatasetOptions& opts = {});

// Writes a transforms JSON for the given views (paths relative to root).
void write_transforms_json(const std::string& path, double camera_angle_x,
                           const std::vector<std::pair<std::string, CameraView>>& frames);

}  // namespace dsgs
