#include "dsgs/hexplane.hpp"

#include <istream>
#include <ostream>

namespace dsgs {

namespace {

// Axis pair per plane; 0..2 spatial, 3 = time.
constexpr int kPlaneAxes[6][2] = {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}};

}  // namespace

void HexPlaneField::init(int base_spatial, int base_time, int fd, const std::vector<int>& mults,
                         const Vec3& bmin, const Vec3& bmax, Rng& rng,
                         double init_offset, double init_noise) {
  feat_dim = fd;
  multipliers = mults;
  bounds_min = bmin;
  bounds_max = bmax;
  scales.clear();
  for (int m : mults) {
    HexPlaneScale sc;
    int rs = base_spatial * m, rt = base_time * m;
    for (int p = 0; p < 6; ++p) {
      int ra = rs;
      int rb = (kPlaneAxes[p][1] == 3) ? rt : rs;
      sc.planes[p].init(ra, rb, fd);
      for (double& v : sc.planes[p].v) v = init_offset + rng.uniform(-init_noise, init_noise);
    }
    scales.push_back(std::move(sc));
  }
}

HexPlaneField HexPlaneField::zeros_like() const {
  HexPlaneField g = *this;
  for (auto& sc : g.scales)
    for (auto& p : sc.planes) std::fill(p.v.begin(), p.v.end(), 0.0);
  return g;
}

size_t HexPlaneField::param_count() const {
  size_t n = 0;
  for (const auto& sc : scales)
    for (const auto& p : sc.planes) n += p.v.size();
  return n;
}

VecX hexplane_encode(const HexPlaneField& field, const Vec3& mu, double t,
                     EncodeCache* cache) {
  // Normalized coordinates (x, y, z, t) in [0,1], clamped.
  double coords[4];
  double dcoord_dworld[4];
  bool clamped = false;
  for (int i = 0; i < 3; ++i) {
    double extent = field.bounds_max[i] - field.bounds_min[i];
    double w = (mu[i] - field.bounds_min[i]) / extent;
    if (w < 0.0 || w > 1.0) { clamped = true; }
    coords[i] = std::clamp(w, 0.0, 1.0);
    dcoord_dworld[i] = (w < 0.0 || w > 1.0) ? 0.0 : 1.0 / extent;
  }
  if (t < 0.0 || t > 1.0) clamped = true;
  coords[3] = std::clamp(t, 0.0, 1.0);
  dcoord_dworld[3] = (t < 0.0 || t > 1.0) ? 0.0 : 1.0;

  const int ns = int(field.scales.size());
  VecX out(field.feat_dim * ns);
  if (cache) {
    cache->scales.resize(ns);
    cache->clamped = clamped;
  }

  for (int s = 0; s < ns; ++s) {
    VecX fused = VecX::Ones(field.feat_dim);
    EncodeCache::ScaleSample* ss = cache ? &cache->scales[s] : nullptr;
    for (int p = 0; p < 6; ++p) {
      const PlaneGrid& g = field.scales[s].planes[p];
      const int axa = kPlaneAxes[p][0], axb = kPlaneAxes[p][1];
      double ua = coords[axa] * (g.res_a - 1);
      double ub = coords[axb] * (g.res_b - 1);
      int ia = std::min(int(ua), g.res_a - 2);
      int ib = std::min(int(ub), g.res_b - 2);
      double fa = ua - ia, fb = ub - ib;
      VecX feat(field.feat_dim);
      for (int f = 0; f < field.feat_dim; ++f) {
        feat[f] = (1 - fa) * (1 - fb) * g.at(ia, ib, f) + fa * (1 - fb) * g.at(ia + 1, ib, f) +
                  (1 - fa) * fb * g.at(ia, ib + 1, f) + fa * fb * g.at(ia + 1, ib + 1, f);
      }
      fused.array() *= feat.array();
      if (ss) {
        auto& pc = ss->planes[p];
        pc.ia = ia; pc.ib = ib; pc.fa = fa; pc.fb = fb;
        pc.dfa_dw = (g.res_a - 1) * dcoord_dworld[axa];
        pc.dfb_dw = (g.res_b - 1) * dcoord_dworld[axb];
        pc.axis_a = axa; pc.axis_b = axb;
        pc.feat = feat;
      }
    }
    out.segment(s * field.feat_dim, field.feat_dim) = fused;
    if (ss) ss->fused = fused;
  }
  return out;
}

void hexplane_encode_backward(const HexPlaneField& field, const EncodeCache& cache,
                              const VecX& dfeat, HexPlaneField& grads, Vec3* dmu) {
  const int fd = field.feat_dim;
  for (int s = 0; s < int(field.scales.size()); ++s) {
    const auto& ss = cache.scales[s];
    VecX dfused = dfeat.segment(s * fd, fd);
    for (int p = 0; p < 6; ++p) {
      const auto& pc = ss.planes[p];
      PlaneGrid& gg = grads.scales[s].planes[p];
      const PlaneGrid& g = field.scales[s].planes[p];
      // dL/d(plane feature) = dfused * product of the other five planes
      for (int f = 0; f < fd; ++f) {
        double others = 1.0;
        for (int q = 0; q < 6; ++q)
          if (q != p) others *= ss.planes[q].feat[f];
        double df = dfused[f] * others;

        double fa = pc.fa, fb = pc.fb;
        gg.at(pc.ia, pc.ib, f) += df * (1 - fa) * (1 - fb);
        gg.at(pc.ia + 1, pc.ib, f) += df * fa * (1 - fb);
        gg.at(pc.ia, pc.ib + 1, f) += df * (1 - fa) * fb;
        gg.at(pc.ia + 1, pc.ib + 1, f) += df * fa * fb;

        if (dmu) {
          double d_dfa = (-(1 - fb)) * g.at(pc.ia, pc.ib, f) + (1 - fb) * g.at(pc.ia + 1, pc.ib, f) -
                         fb * g.at(pc.ia, pc.ib + 1, f) + fb * g.at(pc.ia + 1, pc.ib + 1, f);
          double d_dfb = (-(1 - fa)) * g.at(pc.ia, pc.ib, f) - fa * g.at(pc.ia + 1, pc.ib, f) +
                         (1 - fa) * g.at(pc.ia, pc.ib + 1, f) + fa * g.at(pc.ia + 1, pc.ib + 1, f);
          if (pc.axis_a < 3) (*dmu)[pc.axis_a] += df * d_dfa * pc.dfa_dw;
          if (pc.axis_b < 3) (*dmu)[pc.axis_b] += df * d_dfb * pc.dfb_dw;
        }
      }
    }
  }
}

double hexplane_tv(const HexPlaneField& field) {
  double total = 0.0;
  for (const auto& sc : field.scales) {
    for (const auto& g : sc.planes) {
      double sum_a = 0.0, sum_b = 0.0;
      for (int a = 0; a + 1 < g.res_a; ++a)
        for (int b = 0; b < g.res_b; ++b)
          for (int f = 0; f < g.feat_dim; ++f) {
            double d = g.at(a + 1, b, f) - g.at(a, b, f);
            sum_a += d * d;
          }
      for (int a = 0; a < g.res_a; ++a)
        for (int b = 0; b + 1 < g.res_b; ++b)
          for (int f = 0; f < g.feat_dim; ++f) {
            double d = g.at(a, b + 1, f) - g.at(a, b, f);
            sum_b += d * d;
          }
      size_t na = size_t(g.res_a - 1) * g.res_b * g.feat_dim;
      size_t nb = size_t(g.res_a) * (g.res_b - 1) * g.feat_dim;
      if (na) total += sum_a / double(na);
      if (nb) total += sum_b / double(nb);
    }
  }
  return total;
}

void hexplane_tv_backward(const HexPlaneField& field, double dloss, HexPlaneField& grads) {
  for (size_t s = 0; s < field.scales.size(); ++s) {
    for (int p = 0; p < 6; ++p) {
      const PlaneGrid& g = field.scales[s].planes[p];
      PlaneGrid& gg = grads.scales[s].planes[p];
      size_t na = size_t(g.res_a - 1) * g.res_b * g.feat_dim;
      size_t nb = size_t(g.res_a) * (g.res_b - 1) * g.feat_dim;
      double ca = na ? 2.0 * dloss / double(na) : 0.0;
      double cb = nb ? 2.0 * dloss / double(nb) : 0.0;
      for (int a = 0; a + 1 < g.res_a; ++a)
        for (int b = 0; b < g.res_b; ++b)
          for (int f = 0; f < g.feat_dim; ++f) {
            double d = g.at(a + 1, b, f) - g.at(a, b, f);
            gg.at(a + 1, b, f) += ca * d;
            gg.at(a, b, f) -= ca * d;
          }
      for (int a = 0; a < g.res_a; ++a)
        for (int b = 0; b + 1 < g.res_b; ++b)
          for (int f = 0; f < g.feat_dim; ++f) {
            double d = g.at(a, b + 1, f) - g.at(a, b, f);
            gg.at(a, b + 1, f) += cb * d;
            gg.at(a, b, f) -= cb * d;
          }
    }
  }
}

namespace {
template <typename T>
void put(std::ostream& os, const T& v) { os.write(reinterpret_cast<const char*>(&v), sizeof(T)); }
template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void save_hexplane(const HexPlaneField& f, std::ostream& os) {
  os.write("DSHP", 4);
  put<int32_t>(os, 1);  // version
  put<int32_t>(os, f.feat_dim);
  put<int32_t>(os, int32_t(f.scales.size()));
  for (int m : f.multipliers) put<int32_t>(os, m);
  for (int i = 0; i < 3; ++i) put<double>(os, f.bounds_min[i]);
  for (int i = 0; i < 3; ++i) put<double>(os, f.bounds_max[i]);
  for (const auto& sc : f.scales)
    for (const auto& p : sc.planes) {
      put<int32_t>(os, p.res_a);
      put<int32_t>(os, p.res_b);
      for (double v : p.v) put<float>(os, float(v));
    }
}

HexPlaneField load_hexplane(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "DSHP") throw DsgsError("field checkpoint: bad magic");
  int version = get<int32_t>(is);
  if (version != 1) throw DsgsError("field checkpoint: unsupported version");
  HexPlaneField f;
  f.feat_dim = get<int32_t>(is);
  int ns = get<int32_t>(is);
  f.multipliers.resize(ns);
  for (int& m : f.multipliers) m = get<int32_t>(is);
  for (int i = 0; i < 3; ++i) f.bounds_min[i] = get<double>(is);
  for (int i = 0; i < 3; ++i) f.bounds_max[i] = get<double>(is);
  f.scales.resize(ns);
  for (auto& sc : f.scales)
    for (auto& p : sc.planes) {
      int ra = get<int32_t>(is), rb = get<int32_t>(is);
      p.init(ra, rb, f.feat_dim);
      for (double& v : p.v) v = double(get<float>(is));
      if (!is) throw DsgsError("field checkpoint: truncated");
    }
  return f;
}

}  // namespace dsgs
