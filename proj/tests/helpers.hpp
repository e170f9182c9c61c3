#pragma once
// Shared test utilities: randomized layout generation, the pixel-Boolean
// oracle, brute-force geometry predicates, and structural BVH checks.

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "core/boolean.hpp"
#include "core/bvh.hpp"
#include "core/raster.hpp"

namespace litho::test {

inline Polygon rect(coord_t x0, coord_t y0, coord_t x1, coord_t y1) {
  return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

// random Manhattan layer: axis-aligned rectangles, possibly overlapping
inline Layer random_rect_layer(std::mt19937_64& rng, int max_polys,
                               coord_t extent = 200, coord_t max_side = 60) {
  std::uniform_int_distribution<int> count(1, max_polys);
  std::uniform_int_distribution<coord_t> pos(0, extent);
  std::uniform_int_distribution<coord_t> side(1, max_side);
  Layer layer;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const coord_t x0 = pos(rng), y0 = pos(rng);
    layer.polygons.push_back(rect(x0, y0, x0 + side(rng), y0 + side(rng)));
  }
  return layer;
}

// binary raster of a layer on a 1-dbu window; Manhattan inputs give exact
// {0,1} coverage fractions
inline std::vector<int> binary_raster(const Layer& layer, coord_t x0, coord_t y0,
                                      int nx, int ny) {
  const Grid grid{nx, ny, 1.0, double(x0), double(y0)};
  const std::vector<double> r = rasterize_layer(layer, grid, 1.0);
  std::vector<int> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] != 0.0 && r[i] != 1.0) return {};  // not pixel-aligned: caller fails
    out[i] = r[i] == 1.0 ? 1 : 0;
  }
  return out;
}

// pixel-wise oracle for the seven Boolean op kinds at 1 dbu on Manhattan
// inputs. Returns false on any mismatch.
inline bool boolean_pixel_oracle_ok(BoolOpKind op, const Layer& a, const Layer* b,
                                    coord_t delta = 0) {
  Aabb box = bounding_box(a);
  if (b && !b->polygons.empty()) box.expand(bounding_box(*b));
  const coord_t margin = coord_t(4) + (delta > 0 ? delta : -delta);
  const coord_t x0 = box.lo.x - margin, y0 = box.lo.y - margin;
  const int nx = int(box.hi.x - box.lo.x + 2 * margin);
  const int ny = int(box.hi.y - box.lo.y + 2 * margin);

  Layer result;
  if (op == BoolOpKind::SIZE) {
    result = size_layer(a, delta);
  } else if (op == BoolOpKind::TOUCH) {
    result = touch_layer(a, *b);
  } else {
    result = boolean_op(op, a, b);
  }

  const std::vector<int> ra = binary_raster(a, x0, y0, nx, ny);
  const std::vector<int> rout = binary_raster(result, x0, y0, nx, ny);
  if (ra.empty() || rout.empty()) return false;
  std::vector<int> rb;
  if (b) {
    rb = binary_raster(*b, x0, y0, nx, ny);
    if (rb.empty()) return false;
  }

  auto at = [&](const std::vector<int>& r, int ix, int iy) -> int {
    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) return 0;
    return r[std::size_t(iy) * nx + ix];
  };

  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t i = std::size_t(iy) * nx + ix;
      int want = 0;
      switch (op) {
        case BoolOpKind::AND: want = ra[i] & rb[i]; break;
        case BoolOpKind::OR: want = ra[i] | rb[i]; break;
        case BoolOpKind::NOT: want = ra[i] & ~rb[i] & 1; break;
        case BoolOpKind::XOR: want = ra[i] ^ rb[i]; break;
        case BoolOpKind::HEAL: want = ra[i]; break;
        case BoolOpKind::SIZE: {
          // Chebyshev dilation (delta > 0) / erosion (delta < 0)
          const coord_t d = delta > 0 ? delta : -delta;
          want = delta >= 0 ? 0 : 1;
          for (coord_t dy = -d; dy <= d; ++dy)
            for (coord_t dx = -d; dx <= d; ++dx) {
              const int v = at(ra, ix + int(dx), iy + int(dy));
              if (delta >= 0)
                want |= v;
              else
                want &= v;
            }
          break;
        }
        case BoolOpKind::TOUCH:
          want = -1;  // handled below by polygon-set comparison
          break;
      }
      if (want >= 0 && rout[i] != want) return false;
    }
  }

  if (op == BoolOpKind::TOUCH) {
    // brute selection oracle: polygon of a touches b iff any edge pair
    // shares a point or either contains a vertex of the other
    auto edges_of = [](const Polygon& p) {
      std::vector<Edge> es;
      for (std::size_t i = 0; i < p.vertices.size(); ++i)
        es.push_back({p.vertices[i], p.vertices[(i + 1) % p.vertices.size()]});
      return es;
    };
    auto seg_touch = [](const Edge& e, const Edge& f) {
      const auto d1 = cross(f.p0, f.p1, e.p0), d2 = cross(f.p0, f.p1, e.p1);
      const auto d3 = cross(e.p0, e.p1, f.p0), d4 = cross(e.p0, e.p1, f.p1);
      if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
          ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
      auto on = [](const Point& p, const Edge& s) {
        return cross(s.p0, s.p1, p) == 0 &&
               std::min(s.p0.x, s.p1.x) <= p.x && p.x <= std::max(s.p0.x, s.p1.x) &&
               std::min(s.p0.y, s.p1.y) <= p.y && p.y <= std::max(s.p0.y, s.p1.y);
      };
      return on(e.p0, f) || on(e.p1, f) || on(f.p0, e) || on(f.p1, e);
    };
    std::vector<const Polygon*> expected;
    for (const Polygon& pa : a.polygons) {
      bool touches = false;
      Layer la;
      la.polygons.push_back(pa);
      const auto ea = edges_of(pa);
      for (const Polygon& pb : b->polygons) {
        Layer lb;
        lb.polygons.push_back(pb);
        for (const Point& v : pa.vertices)
          if (point_in_layer(lb, v)) touches = true;
        for (const Point& v : pb.vertices)
          if (point_in_layer(la, v)) touches = true;
        const auto eb = edges_of(pb);
        for (const Edge& e : ea)
          for (const Edge& f : eb)
            if (seg_touch(e, f)) touches = true;
        if (touches) break;
      }
      if (touches) expected.push_back(&pa);
    }
    if (expected.size() != result.polygons.size()) return false;
    // compare as rasters: selected polygons form the same point set
    Layer want_layer;
    for (const Polygon* p : expected) want_layer.polygons.push_back(*p);
    return binary_raster(want_layer, x0, y0, nx, ny) == rout;
  }
  return true;
}

// every internal aabb = union of children; leaves within threshold;
// sorted ids a permutation covering each primitive once
inline bool bvh_invariants_ok(const Bvh& bvh, std::span<const Aabb> prims) {
  const auto& nodes = bvh.nodes();
  if (prims.empty()) return nodes.empty();
  if (nodes.empty()) return false;
  std::vector<int> seen(prims.size(), 0);
  bool ok = true;
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const BvhNode& n = nodes[stack.back()];
    stack.pop_back();
    if (n.leaf) {
      if (n.end - n.begin > bvh.leaf_threshold()) ok = false;
      Aabb box = Aabb::empty();
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::uint32_t id = bvh.sorted_prim_ids()[i];
        ++seen[id];
        box.expand(prims[id]);
      }
      if (!(box == n.aabb)) ok = false;
    } else {
      Aabb box = nodes[n.left].aabb;
      box.expand(nodes[n.right].aabb);
      if (!(box == n.aabb)) ok = false;
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  for (int s : seen)
    if (s != 1) ok = false;
  return ok;
}

inline double frand(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace litho::test
