#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "rsdf/geometry.hpp"

namespace rsdf {

/// Exact nearest-neighbor search over a fixed point set. Median-split kd-tree
/// with branch-and-bound descent; results match brute force bit for bit.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points) : points_(points) {
    if (!points_.empty()) {
      order_.resize(points_.size());
      std::iota(order_.begin(), order_.end(), 0);
      nodes_.reserve(2 * points_.size());
      root_ = build(0, static_cast<int>(points_.size()), 0);
    }
  }

  std::size_t size() const { return points_.size(); }

  struct Result {
    int index = -1;
    double distance = std::numeric_limits<double>::infinity();
  };

  Result nearest(const Vec3& q) const {
    Result best;
    if (root_ >= 0) {
      double best_sq = std::numeric_limits<double>::infinity();
      search(root_, q, best.index, best_sq);
      best.distance = std::sqrt(best_sq);
    }
    return best;
  }

 private:
  struct Node {
    int point = -1;
    int left = -1, right = -1;
    int axis = 0;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    Node node;
    node.point = order_[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[self].left = build(lo, mid, depth + 1);
    nodes_[self].right = build(mid + 1, hi, depth + 1);
    return self;
  }

  void search(int node_idx, const Vec3& q, int& best, double& best_sq) const {
    const Node& node = nodes_[node_idx];
    const Vec3& p = points_[node.point];
    const double d_sq = (q - p).squaredNorm();
    if (d_sq < best_sq) {
      best_sq = d_sq;
      best = node.point;
    }
    const double diff = q[node.axis] - p[node.axis];
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    if (near >= 0) search(near, q, best, best_sq);
    if (far >= 0 && diff * diff < best_sq) search(far, q, best, best_sq);
  }

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace rsdf
