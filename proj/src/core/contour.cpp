#include "contour.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "boolean.hpp"

namespace litho {

double ContourLoop::signed_area() const {
  double a = 0;
  for (std::size_t i = 0, n = size(); i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    a += xs[i] * ys[j] - xs[j] * ys[i];
  }
  return 0.5 * a;
}

double ContourLoop::perimeter() const {
  double p = 0;
  for (std::size_t i = 0, n = size(); i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    p += std::hypot(xs[j] - xs[i], ys[j] - ys[i]);
  }
  return p;
}

int ContourLoop::winding(double px, double py) const {
  int w = 0;
  for (std::size_t i = 0, n = size(); i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double y0 = ys[i], y1 = ys[j];
    if (y0 <= py) {
      if (y1 > py && (xs[j] - xs[i]) * (py - y0) - (px - xs[i]) * (y1 - y0) > 0) ++w;
    } else if (y1 <= py && (xs[j] - xs[i]) * (py - y0) - (px - xs[i]) * (y1 - y0) < 0) {
      --w;
    }
  }
  return w;
}

namespace {

struct CPoint {
  double x, y;
};

struct Crossing {
  std::size_t edge_id;
  CPoint pt;
  CPoint inside_node;
};

}  // namespace

ContourSet marching_squares(const ResistImage& field, double threshold) {
  const Grid& g = field.grid;
  ContourSet out;
  if (g.nx < 2 || g.ny < 2) return out;
  for (double v : field.values)
    if (!std::isfinite(v)) throw std::invalid_argument("marching_squares: non-finite field");

  double vmin = field.values[0], vmax = field.values[0];
  for (double v : field.values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double eps = std::max(vmax - vmin, 1.0) * 1e-12;
  auto val = [&](int ix, int iy) {
    const double v = field.values[g.index(ix, iy)];
    return v == threshold ? v + eps : v;  // +eps symbolic perturbation
  };
  auto node_x = [&](int ix) { return g.origin_x_nm + (ix + 0.5) * g.pitch_nm; };
  auto node_y = [&](int iy) { return g.origin_y_nm + (iy + 0.5) * g.pitch_nm; };

  // grid-edge ids: horizontals first, then verticals
  const std::size_t nh = std::size_t(g.nx - 1) * g.ny;
  auto h_edge = [&](int ix, int iy) { return std::size_t(iy) * (g.nx - 1) + ix; };
  auto v_edge = [&](int ix, int iy) { return nh + std::size_t(iy) * g.nx + ix; };

  std::map<std::size_t, std::pair<CPoint, std::size_t>> next;  // edge -> (point, next edge)

  auto emit = [&](const Crossing& a, const Crossing& b) {
    // direct so the inside node of the source edge lies on the left
    const Crossing* from = &a;
    const Crossing* to = &b;
    const double c = (to->pt.x - from->pt.x) * (from->inside_node.y - from->pt.y) -
                     (to->pt.y - from->pt.y) * (from->inside_node.x - from->pt.x);
    if (c < 0) std::swap(from, to);
    next[from->edge_id] = {to->pt, to->edge_id};
  };

  for (int iy = 0; iy + 1 < g.ny; ++iy) {
    for (int ix = 0; ix + 1 < g.nx; ++ix) {
      const double v00 = val(ix, iy), v10 = val(ix + 1, iy);
      const double v01 = val(ix, iy + 1), v11 = val(ix + 1, iy + 1);
      const bool i00 = v00 > threshold, i10 = v10 > threshold;
      const bool i01 = v01 > threshold, i11 = v11 > threshold;
      if (i00 == i10 && i10 == i11 && i11 == i01) continue;

      auto cross_pt = [&](double va, double vb, CPoint pa, CPoint pb) {
        const double t = (threshold - va) / (vb - va);
        return CPoint{pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};
      };
      const CPoint p00{node_x(ix), node_y(iy)}, p10{node_x(ix + 1), node_y(iy)};
      const CPoint p01{node_x(ix), node_y(iy + 1)}, p11{node_x(ix + 1), node_y(iy + 1)};

      // crossings indexed by cell side: 0 bottom, 1 right, 2 top, 3 left
      std::optional<Crossing> side[4];
      if (i00 != i10)
        side[0] = Crossing{h_edge(ix, iy), cross_pt(v00, v10, p00, p10), i00 ? p00 : p10};
      if (i10 != i11)
        side[1] = Crossing{v_edge(ix + 1, iy), cross_pt(v10, v11, p10, p11), i10 ? p10 : p11};
      if (i01 != i11)
        side[2] = Crossing{h_edge(ix, iy + 1), cross_pt(v01, v11, p01, p11), i01 ? p01 : p11};
      if (i00 != i01)
        side[3] = Crossing{v_edge(ix, iy), cross_pt(v00, v01, p00, p01), i00 ? p00 : p01};

      int count = 0;
      for (const auto& s : side) count += s.has_value();
      if (count == 2) {
        const Crossing* c[2];
        int k = 0;
        for (const auto& s : side)
          if (s) c[k++] = &*s;
        emit(*c[0], *c[1]);
      } else if (count == 4) {
        // saddle: pair edges around the isolated corners
        const double center = 0.25 * (v00 + v10 + v01 + v11);
        const bool center_in = center == threshold ? true : center > threshold;
        // corners: BL(0: bottom,left) BR(1: bottom,right) TR(2: top,right) TL(3: top,left)
        const bool corner_in[4] = {i00, i10, i11, i01};
        const int corner_sides[4][2] = {{0, 3}, {0, 1}, {2, 1}, {2, 3}};
        for (int corner = 0; corner < 4; ++corner) {
          // with center inside, outside corners are isolated; else inside ones
          if (corner_in[corner] != center_in)
            emit(*side[corner_sides[corner][0]], *side[corner_sides[corner][1]]);
        }
      }
    }
  }

  // canonical stitching: start each loop at its smallest grid-edge id
  std::map<std::size_t, bool> visited;
  for (const auto& [start, unused] : next) {
    if (visited[start]) continue;
    ContourLoop loop;
    std::size_t cur = start;
    while (true) {
      visited[cur] = true;
      const auto it = next.find(cur);
      if (it == next.end())
        throw std::runtime_error("marching_squares: broken contour chain");
      loop.xs.push_back(it->second.first.x);
      loop.ys.push_back(it->second.first.y);
      cur = it->second.second;
      if (cur == start) break;
    }
    // first stored point is the successor of `start`; rotate so the loop
    // begins at the crossing on the smallest grid edge itself
    std::rotate(loop.xs.begin(), loop.xs.end() - 1, loop.xs.end());
    std::rotate(loop.ys.begin(), loop.ys.end() - 1, loop.ys.end());
    out.loops.push_back(std::move(loop));
  }
  return out;
}

SegmentBvh build_contour_bvh(const ContourSet& contours) {
  std::vector<DSeg> segs;
  for (const auto& loop : contours.loops) {
    for (std::size_t i = 0, n = loop.size(); i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      segs.push_back({loop.xs[i], loop.ys[i], loop.xs[j], loop.ys[j]});
    }
  }
  return SegmentBvh(std::move(segs));
}

std::vector<EpeRecord> measure_epe(const ContourSet& contours,
                                   const std::vector<Gauge>& gauges,
                                   double search_radius_nm) {
  const SegmentBvh bvh = build_contour_bvh(contours);
  std::vector<EpeRecord> out;
  out.reserve(gauges.size());
  for (const auto& gauge : gauges) {
    EpeRecord rec;
    rec.segment_id = gauge.segment_id;
    if (bvh.empty()) {
      rec.open = true;
    } else if (auto hit = bvh.nearest_crossing(gauge.x, gauge.y, gauge.nx, gauge.ny,
                                               search_radius_nm)) {
      rec.epe_nm = hit->distance;
    } else {
      rec.open = true;
    }
    out.push_back(rec);
  }
  return out;
}

namespace {

// first crossing with t > t_min along p + t*d, restricted by accept(seg id)
template <typename Accept>
std::optional<DistanceHit> first_crossing(const SegmentBvh& bvh, double px, double py,
                                          double dx, double dy, double max_t,
                                          double t_min, Accept&& accept) {
  std::optional<DistanceHit> best;
  const auto& segs = bvh.segments();
  bvh.tree().traverse(
      [&](const Aabb& box) {
        const double limit = best ? best->distance : max_t;
        // slab test of the ray against the box, expanded a hair
        double t0 = 0, t1 = limit;
        const double lox = double(box.lo.x) - 1e-9, hix = double(box.hi.x) + 1e-9;
        const double loy = double(box.lo.y) - 1e-9, hiy = double(box.hi.y) + 1e-9;
        if (std::abs(dx) < 1e-300) {
          if (px < lox || px > hix) return false;
        } else {
          double a = (lox - px) / dx, b = (hix - px) / dx;
          if (a > b) std::swap(a, b);
          t0 = std::max(t0, a);
          t1 = std::min(t1, b);
        }
        if (std::abs(dy) < 1e-300) {
          if (py < loy || py > hiy) return false;
        } else {
          double a = (loy - py) / dy, b = (hiy - py) / dy;
          if (a > b) std::swap(a, b);
          t0 = std::max(t0, a);
          t1 = std::min(t1, b);
        }
        return t0 <= t1;
      },
      [&](std::uint32_t id) {
        if (!accept(id)) return;
        const DSeg& s = segs[id];
        const double ex = s.x1 - s.x0, ey = s.y1 - s.y0;
        const double denom = dx * ey - dy * ex;
        if (denom == 0) return;
        const double qx = s.x0 - px, qy = s.y0 - py;
        const double t = (qx * ey - qy * ex) / denom;
        const double u = (qx * dy - qy * dx) / denom;
        if (u < 0 || u > 1 || t <= t_min || t > max_t) return;
        if (!best || t < best->distance) best = DistanceHit{id, t};
      });
  return best;
}

bool share_endpoint(const DSeg& a, const DSeg& b) {
  auto eq = [](double x0, double y0, double x1, double y1) {
    return x0 == x1 && y0 == y1;
  };
  return eq(a.x0, a.y0, b.x0, b.y0) || eq(a.x0, a.y0, b.x1, b.y1) ||
         eq(a.x1, a.y1, b.x0, b.y0) || eq(a.x1, a.y1, b.x1, b.y1);
}

}  // namespace

std::vector<Defect> detect_defects(const ContourSet& contours, const Layer& targets,
                                   double dbu_per_nm,
                                   const std::vector<EpeRecord>& epes,
                                   const std::vector<Gauge>& gauges,
                                   const DefectLimits& limits) {
  std::vector<Defect> out;
  const SegmentBvh bvh = build_contour_bvh(contours);
  const auto& segs = bvh.segments();

  // segment id -> owning loop
  std::vector<std::uint32_t> seg_loop;
  for (std::uint32_t li = 0; li < contours.loops.size(); ++li)
    seg_loop.insert(seg_loop.end(), contours.loops[li].size(), li);

  // pinch: probe inward (left of the CCW direction) across the material
  if (limits.min_width_nm > 0) {
    for (std::uint32_t id = 0; id < segs.size(); ++id) {
      const DSeg& s = segs[id];
      const double ex = s.x1 - s.x0, ey = s.y1 - s.y0;
      const double len = std::hypot(ex, ey);
      if (len == 0) continue;
      const double nx = -ey / len, ny = ex / len;  // inward normal
      const double mx = 0.5 * (s.x0 + s.x1), my = 0.5 * (s.y0 + s.y1);
      const auto hit = first_crossing(
          bvh, mx, my, nx, ny, limits.min_width_nm, 1e-9,
          [&](std::uint32_t other) { return other != id && !share_endpoint(s, segs[other]); });
      if (hit) {
        out.push_back({DefectKind::Pinch, mx, my, hit->distance,
                       "printed width below min_width"});
      }
    }
  }

  // bridge (a): one printed loop covering two or more targets
  const Layer healed = heal(targets);
  const double scale = 1.0 / dbu_per_nm;
  std::vector<CPoint> reps;  // interior sample per target polygon
  for (const auto& poly : healed.polygons) {
    if (signed_area2(poly) <= 0 || poly.vertices.size() < 3) continue;
    const Point& a = poly.vertices[0];
    const Point& b = poly.vertices[1];
    const double ax = a.x * scale, ay = a.y * scale;
    const double bx = b.x * scale, by = b.y * scale;
    const double len = std::hypot(bx - ax, by - ay);
    if (len == 0) continue;
    // midpoint nudged inward (left of a CCW boundary edge)
    const double nx = -(by - ay) / len, ny = (bx - ax) / len;
    reps.push_back({0.5 * (ax + bx) + 0.5 * nx, 0.5 * (ay + by) + 0.5 * ny});
  }
  for (const auto& loop : contours.loops) {
    if (loop.signed_area() <= 0) continue;
    int covered = 0;
    for (const auto& rep : reps)
      if (loop.winding(rep.x, rep.y) != 0) ++covered;
    if (covered >= 2) {
      out.push_back({DefectKind::Bridge, loop.xs[0], loop.ys[0], 0.0,
                     "printed region spans " + std::to_string(covered) + " targets"});
    }
  }

  // bridge (b): distinct printed loops closer than min_space
  if (limits.min_space_nm > 0) {
    for (std::uint32_t id = 0; id < segs.size(); ++id) {
      const DSeg& s = segs[id];
      if (contours.loops[seg_loop[id]].signed_area() <= 0) continue;
      for (int endpoint = 0; endpoint < 2; ++endpoint) {
        const double px = endpoint ? s.x1 : s.x0;
        const double py = endpoint ? s.y1 : s.y0;
        std::optional<DistanceHit> best;
        bvh.tree().traverse(
            [&](const Aabb& box) {
              const double limit = best ? best->distance : limits.min_space_nm;
              return aabb_point_distance(box, px, py) < limit;
            },
            [&](std::uint32_t other) {
              if (seg_loop[other] == seg_loop[id]) return;
              if (contours.loops[seg_loop[other]].signed_area() <= 0) return;
              const double d = point_segment_distance(px, py, segs[other]);
              if (d < (best ? best->distance : limits.min_space_nm))
                best = DistanceHit{other, d};
            });
        if (best && seg_loop[id] < seg_loop[best->id]) {
          out.push_back({DefectKind::Bridge, px, py, best->distance,
                         "printed regions closer than min_space"});
        }
      }
    }
  }

  // pullback/pushout from open EPE records
  for (std::size_t i = 0; i < epes.size(); ++i) {
    if (!epes[i].open) continue;
    const Gauge* gauge = nullptr;
    for (const auto& g : gauges)
      if (g.segment_id == epes[i].segment_id) {
        gauge = &g;
        break;
      }
    out.push_back({DefectKind::Pullback, gauge ? gauge->x : 0.0, gauge ? gauge->y : 0.0,
                   0.0, "no contour within search radius"});
  }
  return out;
}

}  // namespace litho
