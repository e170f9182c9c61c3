#pragma once
// Binary radix linear BVH over 2D bounding boxes. Construction sorts
// quantized-centroid Morton keys and partitions top-down at the most
// significant differing bit; traversal is stack-based depth-first.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "geometry.hpp"

namespace litho {

std::uint64_t morton_interleave(std::uint32_t qx, std::uint32_t qy);
void morton_deinterleave(std::uint64_t code, std::uint32_t& qx, std::uint32_t& qy);

// Quantizes a centroid inside scene_bounds to bits_per_axis bits per axis
// (clamped at the upper edge) and interleaves x into the even bits.
std::uint64_t morton_encode(double cx, double cy, const Aabb& scene_bounds,
                            int bits_per_axis);

struct BvhNode {
  Aabb aabb;
  // internal: left/right child indices; leaf: [begin,end) into sorted_prim_ids
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  bool leaf = false;
};

class Bvh {
 public:
  // Deterministic for a fixed input order (stable sort; equal keys keep order).
  static Bvh build(std::span<const Aabb> prims, std::uint32_t leaf_threshold = 4,
                   int bits_per_axis = 16);

  // Exactly {i : prim_aabb[i] overlaps q}, touching counts; sorted ascending.
  std::vector<std::uint32_t> range_query(const Aabb& q) const;

  // Generic pruned traversal. node_pred decides descent; leaf_fn receives
  // primitive ids one at a time.
  template <typename NodePred, typename LeafFn>
  void traverse(NodePred&& node_pred, LeafFn&& leaf_fn) const {
    if (nodes_.empty()) return;
    std::uint32_t stack[kMaxStackDepth];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const BvhNode& node = nodes_[stack[--sp]];
      if (!node_pred(node.aabb)) continue;
      if (node.leaf) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) leaf_fn(sorted_prim_ids_[i]);
      } else {
        stack[sp++] = node.right;
        stack[sp++] = node.left;
      }
    }
  }

  const std::vector<BvhNode>& nodes() const { return nodes_; }
  const std::vector<Aabb>& prim_aabbs() const { return prim_aabbs_; }
  const std::vector<std::uint32_t>& sorted_prim_ids() const { return sorted_prim_ids_; }
  const Aabb& scene_bounds() const { return scene_bounds_; }
  std::size_t prim_count() const { return sorted_prim_ids_.size(); }
  std::uint32_t leaf_threshold() const { return leaf_threshold_; }

  static constexpr int kMaxStackDepth = 64;

 private:
  std::vector<BvhNode> nodes_;
  std::vector<Aabb> prim_aabbs_;
  std::vector<std::uint32_t> sorted_prim_ids_;
  Aabb scene_bounds_{};
  std::uint32_t leaf_threshold_ = 4;
};

// --- distance-query helpers over double-precision segments --------------

struct DSeg {
  double x0, y0, x1, y1;
};

double point_segment_distance(double px, double py, const DSeg& s);
double aabb_point_distance(const Aabb& box, double px, double py);

struct DistanceHit {
  std::uint32_t id;
  double distance;
};

// BVH over line segments supporting nearest-distance and directed-ray probes.
class SegmentBvh {
 public:
  explicit SegmentBvh(std::vector<DSeg> segments, std::uint32_t leaf_threshold = 4);

  // Euclidean nearest segment within max_dist, pruned by node-aabb lower bounds.
  std::optional<DistanceHit> nearest(double px, double py, double max_dist) const;

  // First crossing of the line p + t*(dx,dy), |t| <= max_dist, smallest |t|.
  // Ties between +t and -t go to the positive side. distance is the signed t.
  std::optional<DistanceHit> nearest_crossing(double px, double py, double dx,
                                              double dy, double max_dist) const;

  const std::vector<DSeg>& segments() const { return segs_; }
  const Bvh& tree() const { return bvh_; }
  bool empty() const { return segs_.empty(); }

 private:
  std::vector<DSeg> segs_;
  Bvh bvh_;
};

}  // namespace litho
