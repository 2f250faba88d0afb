#include "dsgs/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace dsgs {

double Mesh::surface_area() const {
  double a = 0.0;
  for (const auto& t : triangles) {
    Vec3 e1 = vertices[t[1]] - vertices[t[0]];
    Vec3 e2 = vertices[t[2]] - vertices[t[0]];
    a += 0.5 * e1.cross(e2).norm();
  }
  return a;
}

void Mesh::validate() const {
  const int n = int(vertices.size());
  for (const auto& v : vertices)
    if (!v.allFinite()) throw DsgsError("mesh: non-finite vertex");
  for (const auto& t : triangles)
    for (int i : t)
      if (i < 0 || i >= n) throw DsgsError("mesh: triangle index out of range");
}

std::vector<Vec3> sample_mesh_surface(const Mesh& mesh, int n_points, Rng& rng) {
  if (mesh.empty()) throw DsgsError("sample_mesh_surface: empty mesh");
  std::vector<double> cum(mesh.triangles.size());
  double acc = 0.0;
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    Vec3 e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
    Vec3 e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    acc += 0.5 * e1.cross(e2).norm();
    cum[i] = acc;
  }
  std::vector<Vec3> pts;
  pts.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    double r = rng.uniform(0.0, acc);
    size_t ti = std::lower_bound(cum.begin(), cum.end(), r) - cum.begin();
    if (ti >= mesh.triangles.size()) ti = mesh.triangles.size() - 1;
    const auto& t = mesh.triangles[ti];
    double su = std::sqrt(rng.uniform());
    double v = rng.uniform();
    double b0 = 1.0 - su, b1 = su * (1.0 - v), b2 = su * v;
    pts.push_back(b0 * mesh.vertices[t[0]] + b1 * mesh.vertices[t[1]] + b2 * mesh.vertices[t[2]]);
  }
  return pts;
}

namespace {
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};
}  // namespace

Mesh largest_component(const Mesh& mesh) {
  if (mesh.empty()) return mesh;
  UnionFind uf(int(mesh.vertices.size()));
  for (const auto& t : mesh.triangles) {
    uf.unite(t[0], t[1]);
    uf.unite(t[0], t[2]);
  }
  std::map<int, int> tri_count;
  for (const auto& t : mesh.triangles) tri_count[uf.find(t[0])]++;
  int best = -1, best_count = -1;
  for (auto [root, c] : tri_count)
    if (c > best_count) { best = root; best_count = c; }

  Mesh out;
  std::vector<int> remap(mesh.vertices.size(), -1);
  for (const auto& t : mesh.triangles) {
    if (uf.find(t[0]) != best) continue;
    std::array<int, 3> nt;
    for (int i = 0; i < 3; ++i) {
      if (remap[t[i]] < 0) {
        remap[t[i]] = int(out.vertices.size());
        out.vertices.push_back(mesh.vertices[t[i]]);
      }
      nt[i] = remap[t[i]];
    }
    out.triangles.push_back(nt);
  }
  return out;
}

void save_mesh_ply(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DsgsError("cannot write mesh: " + path);
  f << "ply\nformat binary_little_endian 1.0\n";
  f << "element vertex " << mesh.vertices.size() << "\n";
  f << "property double x\nproperty double y\nproperty double z\n";
  f << "element face " << mesh.triangles.size() << "\n";
  f << "property list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices) {
    double p[3] = {v.x(), v.y(), v.z()};
    f.write(reinterpret_cast<const char*>(p), sizeof(p));
  }
  for (const auto& t : mesh.triangles) {
    uint8_t n = 3;
    int32_t idx[3] = {t[0], t[1], t[2]};
    f.write(reinterpret_cast<const char*>(&n), 1);
    f.write(reinterpret_cast<const char*>(idx), sizeof(idx));
  }
}

void save_mesh_obj(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DsgsError("cannot write mesh: " + path);
  for (const auto& v : mesh.vertices)
    f << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : mesh.triangles)
    f << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

namespace {

Mesh load_mesh_obj(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DsgsError("cannot open mesh: " + path);
  Mesh m;
  std::string line;
  while (std::getline(f, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "v") {
      Vec3 v;
      ss >> v.x() >> v.y() >> v.z();
      m.vertices.push_back(v);
    } else if (tok == "f") {
      std::vector<int> idx;
      std::string w;
      while (ss >> w) idx.push_back(std::stoi(w.substr(0, w.find('/'))) - 1);
      for (size_t i = 2; i < idx.size(); ++i)
        m.triangles.push_back({idx[0], int(idx[i - 1]), int(idx[i])});
    }
  }
  m.validate();
  return m;
}

Mesh load_mesh_ply(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DsgsError("cannot open mesh: " + path);
  std::string line;
  std::getline(f, line);
  if (line != "ply") throw DsgsError("mesh PLY: bad magic");
  std::getline(f, line);
  if (line != "format binary_little_endian 1.0") throw DsgsError("mesh PLY: unsupported format");
  long nv = -1, nf = -1;
  bool doubles = false;
  std::string cur_element;
  while (std::getline(f, line)) {
    if (line == "end_header") break;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "element") {
      long n;
      ss >> cur_element >> n;
      if (cur_element == "vertex") nv = n;
      else if (cur_element == "face") nf = n;
    } else if (tok == "property" && cur_element == "vertex") {
      std::string type;
      ss >> type;
      if (type == "double") doubles = true;
    }
  }
  if (nv < 0 || nf < 0) throw DsgsError("mesh PLY: missing elements");
  Mesh m;
  m.vertices.resize(nv);
  for (long i = 0; i < nv; ++i) {
    if (doubles) {
      double p[3];
      f.read(reinterpret_cast<char*>(p), sizeof(p));
      m.vertices[i] = Vec3(p[0], p[1], p[2]);
    } else {
      float p[3];
      f.read(reinterpret_cast<char*>(p), sizeof(p));
      m.vertices[i] = Vec3(p[0], p[1], p[2]);
    }
  }
  for (long i = 0; i < nf; ++i) {
    uint8_t n;
    f.read(reinterpret_cast<char*>(&n), 1);
    std::vector<int32_t> idx(n);
    f.read(reinterpret_cast<char*>(idx.data()), n * sizeof(int32_t));
    for (int j = 2; j < n; ++j)
      m.triangles.push_back({idx[0], idx[j - 1], idx[j]});
  }
  if (!f) throw DsgsError("mesh PLY: truncated");
  m.validate();
  return m;
}

}  // namespace

Mesh load_mesh(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".obj") return load_mesh_obj(path);
  return load_mesh_ply(path);
}

Mesh make_icosphere(const Vec3& center, double radius, int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> tris = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
      {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
      {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      verts.push_back(m);
      int id = int(verts.size()) - 1;
      midpoint[key] = id;
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& t : tris) {
      int a = mid(t[0], t[1]), b = mid(t[1], t[2]), c = mid(t[2], t[0]);
      next.push_back({t[0], a, c});
      next.push_back({t[1], b, a});
      next.push_back({t[2], c, b});
      next.push_back({a, b, c});
    }
    tris = std::move(next);
  }
  Mesh m;
  for (const auto& v : verts) m.vertices.push_back(center + radius * v);
  m.triangles = tris;
  return m;
}

Mesh make_box(const Vec3& c, const Vec3& h) {
  Mesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back(c + Vec3((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                                  (i & 4) ? h.z() : -h.z()));
  const int faces[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : faces) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  return m;
}

}  // namespace dsgs
