#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "dsgs/types.hpp"

namespace dsgs {

// Static 3D kd-tree for nearest-neighbor queries over a fixed point set.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points) : pts_(std::move(points)) {
    if (pts_.empty()) throw DsgsError("KdTree: empty point set");
    order_.resize(pts_.size());
    for (size_t i = 0; i < pts_.size(); ++i) order_[i] = int(i);
    nodes_.reserve(pts_.size());
    root_ = build(0, int(pts_.size()), 0);
  }

  // Distance from q to the nearest stored point.
  double nearest_distance(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return std::sqrt(best);
  }

 private:
  struct Node {
    int point;       // index into pts_ (the median of its range)
    int axis;
    int left = -1, right = -1;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    int axis = depth % 3;
    int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) { return pts_[a][axis] < pts_[b][axis]; });
    int id = int(nodes_.size());
    nodes_.push_back({order_[mid], axis, -1, -1});
    int l = build(lo, mid, depth + 1);
    int r = build(mid + 1, hi, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void search(int id, const Vec3& q, double& best_sq) const {
    if (id < 0) return;
    const Node& nd = nodes_[id];
    const Vec3& p = pts_[nd.point];
    best_sq = std::min(best_sq, (q - p).squaredNorm());
    double delta = q[nd.axis] - p[nd.axis];
    int first = delta < 0 ? nd.left : nd.right;
    int second = delta < 0 ? nd.right : nd.left;
    search(first, q, best_sq);
    if (delta * delta < best_sq) search(second, q, best_sq);
  }

  std::vector<Vec3> pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace dsgs
