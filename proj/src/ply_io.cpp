#include "dsgs/ply_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace dsgs {

namespace {

std::vector<std::string> property_names(int sh_dim) {
  std::vector<std::string> names = {"x", "y", "z", "rot_0", "rot_1", "rot_2", "rot_3",
                                    "scale_0", "scale_1", "scale_2", "opacity",
                                    "f_dc_0", "f_dc_1", "f_dc_2"};
  for (int i = 0; i < sh_dim - 3; ++i) names.push_back("f_rest_" + std::to_string(i));
  return names;
}

int degree_from_sh_dim(int sh_dim) {
  for (int d = 0; d <= 3; ++d)
    if (3 * sh_num_coeffs(d) == sh_dim) return d;
  throw DsgsError("PLY: property count does not match any SH degree 0..3");
}

}  // namespace

void save_ply(const GaussianCloud& cloud, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DsgsError("cannot write PLY: " + path);
  auto names = property_names(cloud.sh_dim());
  f << "ply\nformat binary_little_endian 1.0\n";
  f << "element vertex " << cloud.size() << "\n";
  for (const auto& n : names) f << "property double " << n << "\n";
  f << "end_header\n";
  std::vector<double> row(names.size());
  for (int i = 0; i < cloud.size(); ++i) {
    int k = 0;
    for (int c = 0; c < 3; ++c) row[k++] = cloud.pos[i][c];
    for (int c = 0; c < 4; ++c) row[k++] = cloud.rot_raw[i][c];
    for (int c = 0; c < 3; ++c) row[k++] = cloud.log_scale[i][c];
    row[k++] = cloud.opacity_raw[i];
    const double* s = cloud.sh_ptr(i);
    for (int c = 0; c < cloud.sh_dim(); ++c) row[k++] = s[c];
    f.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(double));
  }
  if (!f) throw DsgsError("short write: " + path);
}

GaussianCloud load_ply(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DsgsError("cannot open PLY: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "ply") throw DsgsError("PLY: bad magic in " + path);
  if (!std::getline(f, line) || line != "format binary_little_endian 1.0")
    throw DsgsError("PLY: unsupported format in " + path);

  long n_vertex = -1;
  std::vector<std::string> props;
  while (std::getline(f, line)) {
    if (line == "end_header") break;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "comment") continue;
    if (tok == "element") {
      std::string what;
      ss >> what >> n_vertex;
      if (what != "vertex") throw DsgsError("PLY: unexpected element '" + what + "'");
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      if (type != "double") throw DsgsError("PLY: expected double properties");
      props.push_back(name);
    }
  }
  if (n_vertex < 0) throw DsgsError("PLY: missing vertex element");

  int sh_dim = int(props.size()) - 11;
  if (sh_dim < 3) throw DsgsError("PLY: missing properties (schema mismatch)");
  auto expected = property_names(sh_dim);
  if (props != expected) throw DsgsError("PLY: property schema mismatch");

  GaussianCloud cloud;
  cloud.sh_degree = degree_from_sh_dim(sh_dim);
  cloud.resize(int(n_vertex));
  std::vector<double> row(props.size());
  for (long i = 0; i < n_vertex; ++i) {
    f.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(double));
    if (!f) throw DsgsError("PLY: truncated payload in " + path);
    int k = 0;
    for (int c = 0; c < 3; ++c) cloud.pos[i][c] = row[k++];
    for (int c = 0; c < 4; ++c) cloud.rot_raw[i][c] = row[k++];
    for (int c = 0; c < 3; ++c) cloud.log_scale[i][c] = row[k++];
    cloud.opacity_raw[i] = row[k++];
    double* s = cloud.sh_ptr(int(i));
    for (int c = 0; c < sh_dim; ++c) s[c] = row[k++];
  }
  return cloud;
}

}  // namespace dsgs
