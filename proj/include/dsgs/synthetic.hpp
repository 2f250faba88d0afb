#pragma once

#include <string>

#include "dsgs/camera.hpp"
#include "dsgs/mesh.hpp"
#include "dsgs/rng.hpp"

namespace dsgs {

// Desk-scale synthetic scene: an analytic primitive under a known motion,
// rendered by a reference ray tracer, with per-timestep ground-truth meshes.
struct SyntheticSceneSpec {
  std::string primitive = "sphere";  // sphere | cube | two-blob
  std::string motion = "rotate";     // static | translate | rotate | articulate
  int n_frames = 20;                 // distinct timesteps
  int n_train_views = 30;
  int n_test_views = 10;
  int resolution = 64;
  uint64_t seed = 0;
  double fov_x = 0.8726646259971648;  // 50 degrees
  double cam_radius = 3.2;

  void validate() const;
};

// Rigid transform of the primitive at time t (identity for `static`).
void synthetic_motion(const SyntheticSceneSpec& spec, double t, Mat3& R, Vec3& tau);

// Ground-truth surface mesh at time t.
Mesh synthetic_gt_mesh(const SyntheticSceneSpec& spec, double t);

// Reference render (color over transparent background + alpha).
ImageRgba raytrace_synthetic(const SyntheticSceneSpec& spec, const CameraView& view, double t);

// Writes transforms_{train,test}.json, PNG frames, and gt_meshes/ under out_dir.
void generate_synthetic(const SyntheticSceneSpec& spec, const std::string& out_dir);

}  // namespace dsgs
