#include "bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace litho {

static std::uint64_t expand_bits(std::uint32_t v) {
  std::uint64_t x = v;
  x = (x | (x << 16)) & 0x0000FFFF0000FFFFull;
  x = (x | (x << 8)) & 0x00FF00FF00FF00FFull;
  x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0Full;
  x = (x | (x << 2)) & 0x3333333333333333ull;
  x = (x | (x << 1)) & 0x5555555555555555ull;
  return x;
}

static std::uint32_t compact_bits(std::uint64_t x) {
  x &= 0x5555555555555555ull;
  x = (x | (x >> 1)) & 0x3333333333333333ull;
  x = (x | (x >> 2)) & 0x0F0F0F0F0F0F0F0Full;
  x = (x | (x >> 4)) & 0x00FF00FF00FF00FFull;
  x = (x | (x >> 8)) & 0x0000FFFF0000FFFFull;
  x = (x | (x >> 16)) & 0x00000000FFFFFFFFull;
  return static_cast<std::uint32_t>(x);
}

std::uint64_t morton_interleave(std::uint32_t qx, std::uint32_t qy) {
  return expand_bits(qx) | (expand_bits(qy) << 1);
}

void morton_deinterleave(std::uint64_t code, std::uint32_t& qx, std::uint32_t& qy) {
  qx = compact_bits(code);
  qy = compact_bits(code >> 1);
}

static std::uint32_t quantize(double v, double lo, double hi, int bits) {
  const std::uint32_t cells = (bits >= 32) ? 0xFFFFFFFFu : ((1u << bits) - 1u);
  if (hi <= lo) return 0;
  double t = (v - lo) / (hi - lo);
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  auto q = static_cast<std::uint64_t>(t * (double(cells) + 1.0));
  if (q > cells) q = cells;  // upper-edge clamp
  return static_cast<std::uint32_t>(q);
}

std::uint64_t morton_encode(double cx, double cy, const Aabb& scene_bounds,
                            int bits_per_axis) {
  if (bits_per_axis < 1 || bits_per_axis > 31)
    throw std::invalid_argument("morton_encode: bits_per_axis out of [1,31]");
  if (cx < double(scene_bounds.lo.x) || cx > double(scene_bounds.hi.x) ||
      cy < double(scene_bounds.lo.y) || cy > double(scene_bounds.hi.y))
    throw std::invalid_argument("morton_encode: centroid outside scene bounds");
  const std::uint32_t qx = quantize(cx, double(scene_bounds.lo.x), double(scene_bounds.hi.x), bits_per_axis);
  const std::uint32_t qy = quantize(cy, double(scene_bounds.lo.y), double(scene_bounds.hi.y), bits_per_axis);
  return morton_interleave(qx, qy);
}

namespace {

struct Builder {
  std::span<const Aabb> prims;
  std::uint32_t leaf_threshold;
  int bits;
  std::vector<BvhNode> nodes;
  std::vector<std::uint32_t> ids;
  std::vector<std::uint64_t> keys;  // parallel to ids

  static double cx(const Aabb& b) { return 0.5 * (double(b.lo.x) + double(b.hi.x)); }
  static double cy(const Aabb& b) { return 0.5 * (double(b.lo.y) + double(b.hi.y)); }

  void assign_keys(std::size_t begin, std::size_t end, const Aabb& bounds) {
    for (std::size_t i = begin; i < end; ++i) {
      const Aabb& b = prims[ids[i]];
      const std::uint32_t qx = quantize(cx(b), double(bounds.lo.x), double(bounds.hi.x), bits);
      const std::uint32_t qy = quantize(cy(b), double(bounds.lo.y), double(bounds.hi.y), bits);
      keys[i] = morton_interleave(qx, qy);
    }
    sort_range(begin, end);
  }

  void sort_range(std::size_t begin, std::size_t end) {
    std::vector<std::size_t> order(end - begin);
    std::iota(order.begin(), order.end(), begin);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<std::uint32_t> tid(end - begin);
    std::vector<std::uint64_t> tkey(end - begin);
    for (std::size_t i = 0; i < order.size(); ++i) {
      tid[i] = ids[order[i]];
      tkey[i] = keys[order[i]];
    }
    std::copy(tid.begin(), tid.end(), ids.begin() + begin);
    std::copy(tkey.begin(), tkey.end(), keys.begin() + begin);
  }

  Aabb centroid_bounds(std::size_t begin, std::size_t end) const {
    // integer-rounded centroid bounds are fine for requantization
    Aabb cb = Aabb::empty();
    for (std::size_t i = begin; i < end; ++i) {
      const Aabb& b = prims[ids[i]];
      cb.expand(Point{coord_t(std::floor(cx(b))), coord_t(std::floor(cy(b)))});
      cb.expand(Point{coord_t(std::ceil(cx(b))), coord_t(std::ceil(cy(b)))});
    }
    return cb;
  }

  // Recursive top-down partition; returns node index. Splits at the most
  // significant differing Morton bit; on total key collapse, requantizes in
  // the node's own centroid bounds, then falls back to a median split.
  std::uint32_t build_node(std::size_t begin, std::size_t end, bool requantized) {
    const std::uint32_t idx = static_cast<std::uint32_t>(nodes.size());
    nodes.emplace_back();
    const std::size_t count = end - begin;
    if (count <= leaf_threshold) {
      BvhNode& n = nodes[idx];
      n.leaf = true;
      n.begin = static_cast<std::uint32_t>(begin);
      n.end = static_cast<std::uint32_t>(end);
      n.aabb = Aabb::empty();
      for (std::size_t i = begin; i < end; ++i) n.aabb.expand(prims[ids[i]]);
      return idx;
    }
    std::size_t split;
    if (keys[begin] == keys[end - 1]) {
      if (!requantized) {
        assign_keys(begin, end, centroid_bounds(begin, end));
        if (keys[begin] != keys[end - 1]) {
          nodes.pop_back();
          return build_node(begin, end, true);
        }
      }
      split = begin + count / 2;  // coincident centroids: forced median split
    } else {
      const int top_bit = 63 - std::countl_zero(keys[begin] ^ keys[end - 1]);
      const std::uint64_t pivot = (keys[begin] >> top_bit << top_bit) | (1ull << top_bit);
      split = std::lower_bound(keys.begin() + begin, keys.begin() + end, pivot) - keys.begin();
    }
    const std::uint32_t left = build_node(begin, split, false);
    const std::uint32_t right = build_node(split, end, false);
    BvhNode& n = nodes[idx];
    n.leaf = false;
    n.left = left;
    n.right = right;
    n.aabb = nodes[left].aabb;
    n.aabb.expand(nodes[right].aabb);
    return idx;
  }
};

}  // namespace

Bvh Bvh::build(std::span<const Aabb> prims, std::uint32_t leaf_threshold, int bits_per_axis) {
  if (prims.empty()) throw std::invalid_argument("Bvh::build: no primitives");
  if (leaf_threshold < 1) throw std::invalid_argument("Bvh::build: leaf_threshold < 1");
  Bvh bvh;
  bvh.leaf_threshold_ = leaf_threshold;
  bvh.scene_bounds_ = Aabb::empty();
  for (const auto& b : prims) bvh.scene_bounds_.expand(b);

  Builder builder{prims, leaf_threshold, bits_per_axis, {}, {}, {}};
  builder.ids.resize(prims.size());
  std::iota(builder.ids.begin(), builder.ids.end(), 0u);
  builder.keys.resize(prims.size());
  builder.assign_keys(0, prims.size(), bvh.scene_bounds_);
  builder.nodes.reserve(2 * prims.size());
  builder.build_node(0, prims.size(), false);

  bvh.nodes_ = std::move(builder.nodes);
  bvh.sorted_prim_ids_ = std::move(builder.ids);
  bvh.prim_aabbs_.assign(prims.begin(), prims.end());
  return bvh;
}

std::vector<std::uint32_t> Bvh::range_query(const Aabb& q) const {
  std::vector<std::uint32_t> out;
  traverse([&](const Aabb& box) { return box.overlaps(q); },
           [&](std::uint32_t id) {
             if (prim_aabbs_[id].overlaps(q)) out.push_back(id);
           });
  std::sort(out.begin(), out.end());
  return out;
}

double point_segment_distance(double px, double py, const DSeg& s) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((px - s.x0) * dx + (py - s.y0) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  const double qx = s.x0 + t * dx;
  const double qy = s.y0 + t * dy;
  return std::hypot(px - qx, py - qy);
}

double aabb_point_distance(const Aabb& box, double px, double py) {
  const double dx = std::max({double(box.lo.x) - px, 0.0, px - double(box.hi.x)});
  const double dy = std::max({double(box.lo.y) - py, 0.0, py - double(box.hi.y)});
  return std::hypot(dx, dy);
}

SegmentBvh::SegmentBvh(std::vector<DSeg> segments, std::uint32_t leaf_threshold)
    : segs_(std::move(segments)) {
  if (segs_.empty()) return;
  std::vector<Aabb> boxes;
  boxes.reserve(segs_.size());
  for (const auto& s : segs_) {
    Aabb b = Aabb::empty();
    b.expand(Point{coord_t(std::floor(std::min(s.x0, s.x1))), coord_t(std::floor(std::min(s.y0, s.y1)))});
    b.expand(Point{coord_t(std::ceil(std::max(s.x0, s.x1))), coord_t(std::ceil(std::max(s.y0, s.y1)))});
    boxes.push_back(b);
  }
  bvh_ = Bvh::build(boxes, leaf_threshold);
}

std::optional<DistanceHit> SegmentBvh::nearest(double px, double py, double max_dist) const {
  if (segs_.empty() || max_dist <= 0.0) return std::nullopt;
  std::optional<DistanceHit> best;
  double bound = max_dist;
  bvh_.traverse(
      [&](const Aabb& box) { return aabb_point_distance(box, px, py) <= bound; },
      [&](std::uint32_t id) {
        const double d = point_segment_distance(px, py, segs_[id]);
        if (d < bound || (d == bound && (!best || id < best->id))) {
          if (d <= max_dist && (!best || d < best->distance ||
                                (d == best->distance && id < best->id))) {
            best = DistanceHit{id, d};
            bound = d;
          }
        }
      });
  return best;
}

std::optional<DistanceHit> SegmentBvh::nearest_crossing(double px, double py, double dx,
                                                        double dy, double max_dist) const {
  if (segs_.empty() || max_dist <= 0.0) return std::nullopt;
  // bbox of the probe line swept over [-max_dist, max_dist]
  Aabb strip = Aabb::empty();
  strip.expand(Point{coord_t(std::floor(px - std::abs(dx) * max_dist - 1)),
                     coord_t(std::floor(py - std::abs(dy) * max_dist - 1))});
  strip.expand(Point{coord_t(std::ceil(px + std::abs(dx) * max_dist + 1)),
                     coord_t(std::ceil(py + std::abs(dy) * max_dist + 1))});
  std::optional<DistanceHit> best;
  auto better = [&](double t, std::uint32_t id) {
    if (std::abs(t) > max_dist) return;
    if (!best || std::abs(t) < std::abs(best->distance) ||
        (std::abs(t) == std::abs(best->distance) && t > best->distance)) {
      best = DistanceHit{id, t};
    }
  };
  bvh_.traverse(
      [&](const Aabb& box) { return box.overlaps(strip); },
      [&](std::uint32_t id) {
        const DSeg& s = segs_[id];
        const double sx = s.x1 - s.x0, sy = s.y1 - s.y0;
        const double denom = dx * sy - dy * sx;
        if (denom == 0.0) return;  // parallel
        // p + t*d = s0 + u*sdir
        const double rx = s.x0 - px, ry = s.y0 - py;
        const double t = (rx * sy - ry * sx) / denom;
        const double u = (rx * dy - ry * dx) / denom;
        if (u < 0.0 || u > 1.0) return;
        better(t, id);
      });
  return best;
}

}  // namespace litho
