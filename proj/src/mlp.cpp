#include "dsgs/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace dsgs {

Mlp Mlp::make(int input_dim, int width, int depth, int output_dim, Rng& rng, bool zero_output) {
  Mlp m;
  int in = input_dim;
  for (int l = 0; l < depth; ++l) {
    double s = std::sqrt(6.0 / double(in + width));
    MatX w(width, in);
    for (int i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-s, s);
    m.W.push_back(std::move(w));
    m.b.push_back(VecX::Zero(width));
    in = width;
  }
  MatX wo = MatX::Zero(output_dim, in);
  if (!zero_output) {
    double s = std::sqrt(6.0 / double(in + output_dim));
    for (int i = 0; i < wo.size(); ++i) wo.data()[i] = rng.uniform(-s, s);
  }
  m.W.push_back(std::move(wo));
  m.b.push_back(VecX::Zero(output_dim));
  return m;
}

VecX Mlp::forward(const VecX& x, MlpCache* cache) const {
  if (x.size() != W.front().cols())
    throw DsgsError("mlp: feature length does not match input width");
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
  }
  VecX h = x;
  for (size_t l = 0; l + 1 < W.size(); ++l) {
    VecX z = W[l] * h + b[l];
    h = z.array().tanh();
    if (cache) {
      cache->pre.push_back(z);
      cache->post.push_back(h);
    }
  }
  return W.back() * h + b.back();
}

VecX Mlp::backward(const MlpCache& cache, const VecX& dy, Mlp& grads) const {
  const size_t L = W.size();
  const VecX& last_h = L > 1 ? cache.post.back() : cache.input;
  grads.W[L - 1] += dy * last_h.transpose();
  grads.b[L - 1] += dy;
  VecX dh = W[L - 1].transpose() * dy;
  for (size_t l = L - 1; l-- > 0;) {
    // through tanh
    VecX dz = dh.array() * (1.0 - cache.post[l].array().square());
    const VecX& in = (l == 0) ? cache.input : cache.post[l - 1];
    grads.W[l] += dz * in.transpose();
    grads.b[l] += dz;
    dh = W[l].transpose() * dz;
  }
  return dh;
}

Mlp Mlp::zeros_like() const {
  Mlp g = *this;
  for (auto& w : g.W) w.setZero();
  for (auto& v : g.b) v.setZero();
  return g;
}

size_t Mlp::param_count() const {
  size_t n = 0;
  for (const auto& w : W) n += size_t(w.size());
  for (const auto& v : b) n += size_t(v.size());
  return n;
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

void save_mlp(const Mlp& m, std::ostream& os) {
  os.write("DSML", 4);
  put<int32_t>(os, 1);
  put<int32_t>(os, int32_t(m.W.size()));
  for (size_t l = 0; l < m.W.size(); ++l) {
    put<int32_t>(os, int32_t(m.W[l].rows()));
    put<int32_t>(os, int32_t(m.W[l].cols()));
    for (int i = 0; i < m.W[l].size(); ++i) put<float>(os, float(m.W[l].data()[i]));
    for (int i = 0; i < m.b[l].size(); ++i) put<float>(os, float(m.b[l][i]));
  }
}

Mlp load_mlp(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "DSML") throw DsgsError("mlp checkpoint: bad magic");
  if (get<int32_t>(is) != 1) throw DsgsError("mlp checkpoint: unsupported version");
  Mlp m;
  int L = get<int32_t>(is);
  for (int l = 0; l < L; ++l) {
    int r = get<int32_t>(is), c = get<int32_t>(is);
    MatX w(r, c);
    for (int i = 0; i < w.size(); ++i) w.data()[i] = double(get<float>(is));
    VecX b(r);
    for (int i = 0; i < r; ++i) b[i] = double(get<float>(is));
    if (!is) throw DsgsError("mlp checkpoint: truncated");
    m.W.push_back(std::move(w));
    m.b.push_back(std::move(b));
  }
  return m;
}

}  // namespace dsgs
