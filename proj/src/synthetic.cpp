#include "dsgs/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dsgs/dataset.hpp"
#include "dsgs/image.hpp"

namespace dsgs {

namespace fs = std::filesystem;

void SyntheticSceneSpec::validate() const {
  if (primitive != "sphere" && primitive != "cube" && primitive != "two-blob")
    throw DsgsError("synthetic: unknown primitive: " + primitive);
  if (motion != "static" && motion != "translate" && motion != "rotate" &&
      motion != "articulate")
    throw DsgsError("synthetic: unknown motion: " + motion);
  if (motion == "articulate" && primitive != "two-blob")
    throw DsgsError("synthetic: articulate motion requires the two-blob primitive");
  if (n_frames < 2) throw DsgsError("synthetic: n_frames must be >= 2");
  if (resolution < 16) throw DsgsError("synthetic: resolution must be >= 16");
  if (n_train_views < 1 || n_test_views < 0)
    throw DsgsError("synthetic: bad view counts");
}

namespace {

constexpr double kSphereRadius = 0.5;
constexpr double kCubeHalf = 0.35;
constexpr double kBlobRadius = 0.25;
const Vec3 kBlob1 = Vec3(-0.3, 0, 0);
const Vec3 kBlob2 = Vec3(0.3, 0, 0);

// Second blob's extra offset under articulation.
Vec3 articulate_offset(const SyntheticSceneSpec& spec, double t) {
  if (spec.motion != "articulate") return Vec3::Zero();
  return Vec3(0, 0.25 * std::sin(M_PI * t), 0);
}

Vec3 checker_albedo(const Vec3& p_obj) {
  const double cell = 0.18;
  long s = long(std::floor(p_obj.x() / cell)) + long(std::floor(p_obj.y() / cell)) +
           long(std::floor(p_obj.z() / cell));
  return ((s % 2 + 2) % 2 == 0) ? Vec3(0.9, 0.35, 0.25) : Vec3(0.95, 0.85, 0.3);
}

struct Hit {
  double t = -1.0;
  Vec3 p_obj = Vec3::Zero();   // hit point in object space (for texture)
  Vec3 n_obj = Vec3::Zero();
};

bool sphere_hit(const Vec3& o, const Vec3& d, const Vec3& c, double r, Hit& h) {
  Vec3 oc = o - c;
  double a = d.squaredNorm();
  double b = 2.0 * oc.dot(d);
  double cc = oc.squaredNorm() - r * r;
  double disc = b * b - 4 * a * cc;
  if (disc < 0) return false;
  double t = (-b - std::sqrt(disc)) / (2 * a);
  if (t <= 1e-6) return false;
  h.t = t;
  h.p_obj = o + t * d;
  h.n_obj = (h.p_obj - c).normalized();
  return true;
}

bool cube_hit(const Vec3& o, const Vec3& d, double half, Hit& h) {
  double tmin = -1e30, tmax = 1e30;
  int axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-12) {
      if (std::abs(o[a]) > half) return false;
      continue;
    }
    double t1 = (-half - o[a]) / d[a], t2 = (half - o[a]) / d[a];
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > tmin) { tmin = t1; axis = a; }
    tmax = std::min(tmax, t2);
    if (tmin > tmax) return false;
  }
  if (tmin <= 1e-6 || axis < 0) return false;
  h.t = tmin;
  h.p_obj = o + tmin * d;
  h.n_obj = Vec3::Zero();
  h.n_obj[axis] = h.p_obj[axis] > 0 ? 1.0 : -1.0;
  return true;
}

}  // namespace

void synthetic_motion(const SyntheticSceneSpec& spec, double t, Mat3& R, Vec3& tau) {
  R = Mat3::Identity();
  tau = Vec3::Zero();
  if (spec.motion == "translate") {
    tau = t * Vec3(0.4, 0, 0);
  } else if (spec.motion == "rotate") {
    double a = 0.5 * M_PI * t;
    R = Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
  }
  // `static` and `articulate` keep the body frame fixed; articulation moves
  // the second blob inside the body frame instead.
}

Mesh synthetic_gt_mesh(const SyntheticSceneSpec& spec, double t) {
  Mat3 R;
  Vec3 tau;
  synthetic_motion(spec, t, R, tau);
  Mesh m;
  if (spec.primitive == "sphere") {
    m = make_icosphere(Vec3::Zero(), kSphereRadius, 3);
  } else if (spec.primitive == "cube") {
    m = make_box(Vec3::Zero(), Vec3::Constant(kCubeHalf));
  } else {
    Mesh a = make_icosphere(kBlob1, kBlobRadius, 3);
    Mesh b = make_icosphere(kBlob2 + articulate_offset(spec, t), kBlobRadius, 3);
    m = a;
    int off = int(m.vertices.size());
    m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (auto tri : b.triangles)
      m.triangles.push_back({tri[0] + off, tri[1] + off, tri[2] + off});
  }
  for (auto& v : m.vertices) v = R * v + tau;
  return m;
}

ImageRgba raytrace_synthetic(const SyntheticSceneSpec& spec, const CameraView& view,
                             double t) {
  Mat3 R;
  Vec3 tau;
  synthetic_motion(spec, t, R, tau);
  const Vec3 light = Vec3(0.3, -0.7, 0.6).normalized();

  ImageRgba out;
  out.rgb = Image3(view.width, view.height, 0.0);
  out.alpha = Image1(view.width, view.height, 0.0);

  for (int y = 0; y < view.height; ++y) {
    for (int x = 0; x < view.width; ++x) {
      Vec3 d_world = view.R_c * view.pixel_ray(x + 0.5, y + 0.5);
      // object space: inverse of the rigid motion
      Vec3 o = R.transpose() * (view.T_c - tau);
      Vec3 d = R.transpose() * d_world;

      Hit best;
      bool found = false;
      Hit h;
      if (spec.primitive == "sphere") {
        found = sphere_hit(o, d, Vec3::Zero(), kSphereRadius, best);
      } else if (spec.primitive == "cube") {
        found = cube_hit(o, d, kCubeHalf, best);
      } else {
        if (sphere_hit(o, d, kBlob1, kBlobRadius, h)) { best = h; found = true; }
        if (sphere_hit(o, d, kBlob2 + articulate_offset(spec, t), kBlobRadius, h) &&
            (!found || h.t < best.t)) { best = h; found = true; }
      }
      if (!found) continue;

      Vec3 n_world = R * best.n_obj;
      Vec3 albedo = checker_albedo(best.p_obj);
      double diffuse = std::max(0.0, n_world.dot(light));
      Vec3 c = albedo * (0.35 + 0.65 * diffuse);
      out.rgb.set_pixel(y, x, c.cwiseMin(1.0));
      out.alpha.at(y, x) = 1.0;
    }
  }
  return out;
}

void generate_synthetic(const SyntheticSceneSpec& spec, const std::string& out_dir) {
  spec.validate();
  Rng rng(spec.seed);
  fs::create_directories(fs::path(out_dir) / "train");
  fs::create_directories(fs::path(out_dir) / "test");
  fs::create_directories(fs::path(out_dir) / "gt_meshes");

  auto sample_view = [&](double time) {
    double az = rng.uniform(0.0, 2.0 * M_PI);
    double el = rng.uniform(-0.9, 0.9);  // radians; stays away from the poles
    Vec3 eye = spec.cam_radius * Vec3(std::cos(el) * std::cos(az),
                                      std::cos(el) * std::sin(az), std::sin(el));
    return look_at_camera(eye, Vec3::Zero(), Vec3(0, 0, 1), spec.fov_x, spec.resolution,
                          spec.resolution, time);
  };

  auto emit_split = [&](const std::string& split, int count) {
    std::vector<std::pair<std::string, CameraView>> manifest;
    for (int i = 0; i < count; ++i) {
      double time = double(i % spec.n_frames) / double(spec.n_frames - 1);
      CameraView view = sample_view(time);
      ImageRgba img = raytrace_synthetic(spec, view, time);
      char name[64];
      std::snprintf(name, sizeof(name), "%s/r_%03d", split.c_str(), i);
      write_png_rgba((fs::path(out_dir) / (std::string(name) + ".png")).string(),
                     img.rgb, img.alpha);
      manifest.emplace_back(std::string("./") + name, view);
    }
    write_transforms_json((fs::path(out_dir) / ("transforms_" + split + ".json")).string(),
                          spec.fov_x, manifest);
  };
  emit_split("train", spec.n_train_views);
  emit_split("test", spec.n_test_views);

  std::ofstream times((fs::path(out_dir) / "gt_meshes" / "times.txt").string());
  for (int k = 0; k < spec.n_frames; ++k) {
    double t = double(k) / double(spec.n_frames - 1);
    char name[64];
    std::snprintf(name, sizeof(name), "frame_%03d.ply", k);
    save_mesh_ply(synthetic_gt_mesh(spec, t),
                  (fs::path(out_dir) / "gt_meshes" / name).string());
    times << name << " " << t << "\n";
  }
}

}  // namespace dsgs
