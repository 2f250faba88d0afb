#pragma once

#include <iosfwd>
#include <vector>

#include "dsgs/rng.hpp"
#include "dsgs/types.hpp"

namespace dsgs {

struct MlpCache {
  VecX input;
  std::vector<VecX> pre;   // pre-activation per hidden layer
  std::vector<VecX> post;  // tanh outputs per hidden layer
};

// Dense MLP with tanh hidden layers and a linear output layer.
struct Mlp {
  std::vector<MatX> W;
  std::vector<VecX> b;

  // `depth` hidden layers of `width`; output layer zero-initialized so the
  // network starts as the constant zero function. Hidden weights Xavier.
  static Mlp make(int input_dim, int width, int depth, int output_dim, Rng& rng,
                  bool zero_output = true);

  int input_dim() const { return int(W.front().cols()); }
  int output_dim() const { return int(W.back().rows()); }

  VecX forward(const VecX& x, MlpCache* cache = nullptr) const;
  // Accumulates weight grads into `grads` (same shapes, zeroed by caller);
  // returns d(loss)/d(input).
  VecX backward(const MlpCache& cache, const VecX& dy, Mlp& grads) const;

  Mlp zeros_like() const;
  size_t param_count() const;
};

void save_mlp(const Mlp& m, std::ostream& os);
Mlp load_mlp(std::istream& is);

}  // namespace dsgs
