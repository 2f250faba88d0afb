#include "dsgs/dataset.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace dsgs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Internal camera axes from a Blender/OpenGL camera-to-world matrix:
// flip y (up -> down) and z (backward -> forward).
void pose_from_c2w(const Mat4& c2w, Mat3& R_c, Vec3& T_c) {
  Mat3 R = c2w.block<3, 3>(0, 0);
  R_c.col(0) = R.col(0);
  R_c.col(1) = -R.col(1);
  R_c.col(2) = -R.col(2);
  T_c = c2w.block<3, 1>(0, 3);
}

Mat4 c2w_from_pose(const CameraView& v) {
  Mat4 m = Mat4::Identity();
  m.block<3, 1>(0, 0) = v.R_c.col(0);
  m.block<3, 1>(0, 1) = -v.R_c.col(1);
  m.block<3, 1>(0, 2) = -v.R_c.col(2);
  m.block<3, 1>(0, 3) = v.T_c;
  return m;
}

std::string resolve_image_path(const fs::path& root, const std::string& file_path) {
  fs::path p = root / file_path;
  if (fs::exists(p)) return p.string();
  fs::path q = root / (file_path + ".png");
  if (fs::exists(q)) return q.string();
  throw DsgsError("dataset: image not found: " + p.string());
}

std::vector<Frame> load_split(const fs::path& root, const std::string& name,
                              const DatasetOptions& opts, double& camera_angle_x,
                              bool required) {
  fs::path manifest = root / ("transforms_" + name + ".json");
  std::vector<Frame> frames;
  if (!fs::exists(manifest)) {
    if (required) throw DsgsError("dataset: missing " + manifest.string());
    return frames;
  }
  std::ifstream f(manifest);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw DsgsError("dataset: malformed JSON in " + manifest.string() + ": " + e.what());
  }
  camera_angle_x = j.at("camera_angle_x").get<double>();

  for (const auto& jf : j.at("frames")) {
    Frame fr;
    double t = jf.value("time", 0.0);
    if (t < 0.0 || t > 1.0)
      throw DsgsError("dataset: frame time outside [0,1] in " + manifest.string());

    Mat4 c2w;
    const auto& tm = jf.at("transform_matrix");
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) c2w(r, c) = tm.at(r).at(c).get<double>();

    std::string img_path = resolve_image_path(root, jf.at("file_path").get<std::string>());
    ImageRgba png = read_png(img_path);
    Image3 img = composite_over(png, opts.background);
    if (opts.downscale > 1) img = downscale(img, opts.downscale);

    fr.view.width = img.width;
    fr.view.height = img.height;
    fr.view.fx = focal_from_fov(camera_angle_x, img.width);
    fr.view.fy = fr.view.fx;
    fr.view.cx = 0.5 * img.width;
    fr.view.cy = 0.5 * img.height;
    fr.view.time = t;
    pose_from_c2w(c2w, fr.view.R_c, fr.view.T_c);
    fr.view.validate();
    fr.image = std::move(img);
    fr.validate();
    frames.push_back(std::move(fr));
  }
  return frames;
}

}  // namespace

Dataset load_dataset(const std::string& root, const DatasetOptions& opts) {
  if (opts.downscale < 1) throw DsgsError("dataset: downscale must be >= 1");
  Dataset ds;
  ds.root = root;
  ds.train = load_split(root, "train", opts, ds.camera_angle_x, true);
  double unused = ds.camera_angle_x;
  ds.test = load_split(root, "test", opts, unused, false);
  if (ds.train.empty()) throw DsgsError("dataset: no training frames");

  // Scene bounds: fixed fraction of the camera orbit radius around origin.
  double r = 0.0;
  for (const auto& f : ds.train) r = std::max(r, f.view.T_c.norm());
  double half = std::max(0.5 * r, 1.0);
  ds.bounds_min = Vec3::Constant(-half);
  ds.bounds_max = Vec3::Constant(half);
  return ds;
}

void write_transforms_json(const std::string& path, double camera_angle_x,
                           const std::vector<std::pair<std::string, CameraView>>& frames) {
  json j;
  j["camera_angle_x"] = camera_angle_x;
  j["frames"] = json::array();
  for (const auto& [file_path, view] : frames) {
    Mat4 c2w = c2w_from_pose(view);
    json row = json::array();
    for (int r = 0; r < 4; ++r) {
      json cols = json::array();
      for (int c = 0; c < 4; ++c) cols.push_back(c2w(r, c));
      row.push_back(cols);
    }
    j["frames"].push_back({{"file_path", file_path},
                           {"time", view.time},
                           {"transform_matrix", row}});
  }
  std::ofstream f(path);
  if (!f) throw DsgsError("cannot write " + path);
  f << j.dump(2) << "\n";
}

}  // namespace dsgs
