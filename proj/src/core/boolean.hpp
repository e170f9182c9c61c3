#pragma once
// Robust set operations on polygon layers: BVH-filtered edge intersection
// finding, Hobby-style snap rounding, winding-number classification, and
// deterministic output reconstruction. Inputs may be self-intersecting or
// degenerate; outputs are normalized (CCW outers, CW holes, nonzero winding).

#include <optional>
#include <vector>

#include "geometry.hpp"

namespace litho {

enum class BoolOpKind { AND, OR, NOT, XOR, HEAL, SIZE, TOUCH };
// SUB is an alias of NOT (A minus B).
inline constexpr BoolOpKind SUB = BoolOpKind::NOT;

struct IntersectionEvent {
  std::uint32_t edge_a;
  std::uint32_t edge_b;
  Point point;      // snapped to grid
  double param_a;   // parametric position on edge_a, in [0,1]
  double param_b;
};

// All crossing/touching pairs between the two edge sets (BVH over edges_b).
// Deterministic ordering by (edge_a, edge_b, param_a).
std::vector<IntersectionEvent> find_intersections(const std::vector<Edge>& edges_a,
                                                  const std::vector<Edge>& edges_b,
                                                  coord_t grid = 1);

struct BoolOptions {
  coord_t grid = 1;             // snap-rounding grid (dbu)
  double miter_limit_factor = 2.0;  // SIZE: miter clamped at factor * |delta|
};

Layer boolean_op(BoolOpKind op, const Layer& a, const Layer* b,
                 const BoolOptions& opt = {});

inline Layer heal(const Layer& a, const BoolOptions& opt = {}) {
  return boolean_op(BoolOpKind::HEAL, a, nullptr, opt);
}

// Minkowski-style offset by delta dbu with mitered joins, then self-heal
// under a positive-winding fill so collapsed geometry vanishes.
Layer size_layer(const Layer& a, coord_t delta, const BoolOptions& opt = {});

// Polygons of a whose boundary or interior intersects b (shared-edge and
// corner contact count).
Layer touch_layer(const Layer& a, const Layer& b);

// Nonzero-winding number of the point (x2/2, y2/2), given in doubled
// coordinates, with the half-open boundary rule (points on an edge resolve
// as if nudged by +epsilon in y). Exact integer arithmetic.
int winding_number2x(const Layer& layer, wide_t x2, wide_t y2);

inline bool point_in_layer(const Layer& layer, Point p) {
  return winding_number2x(layer, 2 * wide_t(p.x), 2 * wide_t(p.y)) != 0;
}

// --- snapped arrangement (exposed for mrc / tests) -----------------------

struct DirSeg {
  Point p0, p1;
  int layer;  // 0 = A, 1 = B
};

// Unique arrangement segment in canonical direction (lexicographically
// smaller endpoint first) with net signed winding weights per input layer.
struct ArrSeg {
  Point a, b;
  int weight[2];
};

// Snap-rounds and subdivides the segment soup until segments meet only at
// shared endpoints and no vertex lies in any segment interior.
std::vector<ArrSeg> build_arrangement(std::vector<DirSeg> segs, coord_t grid);

// Winding pair (layer A, layer B) immediately left of the canonical
// direction of arrangement segment i. Exact.
struct WindingPair {
  int a, b;
};
std::vector<WindingPair> left_windings(const std::vector<ArrSeg>& segs);

}  // namespace litho
