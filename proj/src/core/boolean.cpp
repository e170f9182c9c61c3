#include "boolean.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bvh.hpp"

namespace litho {

namespace {

int sgn(wide_t v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

coord_t snap_to_grid(double v, coord_t grid) {
  // round half away from zero
  const double cells = v / double(grid);
  return coord_t(std::llround(cells)) * grid;
}

struct SegPredicates {
  // orientation of c relative to a->b
  static int orient(const Point& a, const Point& b, const Point& c) {
    return sgn(cross(a, b, c));
  }
  static bool on_segment(const Point& a, const Point& b, const Point& c) {
    // c collinear with a-b assumed
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
  }
};

// exact crossing/touching test; fills param(s) on proper crossings
enum class IsectKind { None, Proper, Touch, CollinearOverlap };

struct IsectResult {
  IsectKind kind = IsectKind::None;
  double ax = 0, ay = 0;  // crossing point (Proper) or touch point
  double param_a = 0, param_b = 0;
};

IsectResult segment_intersect(const Point& a0, const Point& a1, const Point& b0,
                              const Point& b1) {
  const int d1 = SegPredicates::orient(b0, b1, a0);
  const int d2 = SegPredicates::orient(b0, b1, a1);
  const int d3 = SegPredicates::orient(a0, a1, b0);
  const int d4 = SegPredicates::orient(a0, a1, b1);
  IsectResult r;
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    // proper crossing: intersection in double precision
    const double ax0 = double(a0.x), ay0 = double(a0.y);
    const double adx = double(a1.x - a0.x), ady = double(a1.y - a0.y);
    const double bdx = double(b1.x - b0.x), bdy = double(b1.y - b0.y);
    const double denom = adx * bdy - ady * bdx;
    const double rx = double(b0.x - a0.x), ry = double(b0.y - a0.y);
    const double t = (rx * bdy - ry * bdx) / denom;
    const double u = (rx * ady - ry * adx) / denom;
    r.kind = IsectKind::Proper;
    r.ax = ax0 + t * adx;
    r.ay = ay0 + t * ady;
    r.param_a = t;
    r.param_b = u;
    return r;
  }
  auto param_on = [](const Point& p0, const Point& p1, const Point& c) {
    const double dx = double(p1.x - p0.x), dy = double(p1.y - p0.y);
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return 0.0;
    return (double(c.x - p0.x) * dx + double(c.y - p0.y) * dy) / len2;
  };
  if (d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0) {
    // collinear: overlap if projections overlap
    const Point* lo = &b0;
    const Point* hi = &b1;
    if (*hi < *lo) std::swap(lo, hi);
    const Point* alo = &a0;
    const Point* ahi = &a1;
    if (*ahi < *alo) std::swap(alo, ahi);
    const Point& start = std::max(*alo, *lo);
    const Point& end = std::min(*ahi, *hi);
    if (start <= end && SegPredicates::on_segment(a0, a1, start) &&
        SegPredicates::on_segment(b0, b1, start)) {
      r.kind = IsectKind::CollinearOverlap;
      r.ax = double(start.x);
      r.ay = double(start.y);
      r.param_a = param_on(a0, a1, start);
      r.param_b = param_on(b0, b1, start);
      return r;
    }
    return r;
  }
  auto touch_at = [&](const Point& c) {
    r.kind = IsectKind::Touch;
    r.ax = double(c.x);
    r.ay = double(c.y);
    r.param_a = param_on(a0, a1, c);
    r.param_b = param_on(b0, b1, c);
  };
  if (d1 == 0 && SegPredicates::on_segment(b0, b1, a0)) { touch_at(a0); return r; }
  if (d2 == 0 && SegPredicates::on_segment(b0, b1, a1)) { touch_at(a1); return r; }
  if (d3 == 0 && SegPredicates::on_segment(a0, a1, b0)) { touch_at(b0); return r; }
  if (d4 == 0 && SegPredicates::on_segment(a0, a1, b1)) { touch_at(b1); return r; }
  return r;
}

Aabb seg_aabb(const Point& a, const Point& b) {
  Aabb box = Aabb::empty();
  box.expand(a);
  box.expand(b);
  return box;
}

// does the segment pass through the closed square of side `grid` centered at v?
// worked in doubled coordinates so half-grid corners stay integral.
bool segment_hits_hot_pixel(const Point& a, const Point& b, const Point& v, coord_t grid) {
  const wide_t ax = 2 * wide_t(a.x), ay = 2 * wide_t(a.y);
  const wide_t bx = 2 * wide_t(b.x), by = 2 * wide_t(b.y);
  const wide_t lox = 2 * wide_t(v.x) - grid, hix = 2 * wide_t(v.x) + grid;
  const wide_t loy = 2 * wide_t(v.y) - grid, hiy = 2 * wide_t(v.y) + grid;
  // trivial reject / accept
  if (std::max(ax, bx) < lox || std::min(ax, bx) > hix || std::max(ay, by) < loy ||
      std::min(ay, by) > hiy)
    return false;
  auto inside = [&](wide_t x, wide_t y) {
    return lox <= x && x <= hix && loy <= y && y <= hiy;
  };
  if (inside(ax, ay) || inside(bx, by)) return true;
  // segment vs each square edge: exact orientation straddle tests
  const wide_t dx = bx - ax, dy = by - ay;
  auto crossed = [&](wide_t cx0, wide_t cy0, wide_t cx1, wide_t cy1) {
    auto side = [&](wide_t px, wide_t py) { return sgn(dx * (py - ay) - dy * (px - ax)); };
    const int s0 = side(cx0, cy0);
    const int s1 = side(cx1, cy1);
    if (s0 == s1 && s0 != 0) return false;
    const wide_t ex = cx1 - cx0, ey = cy1 - cy0;
    auto tside = [&](wide_t px, wide_t py) { return sgn(ex * (py - cy0) - ey * (px - cx0)); };
    const int t0 = tside(ax, ay);
    const int t1 = tside(bx, by);
    return !(t0 == t1 && t0 != 0);
  };
  return crossed(lox, loy, hix, loy) || crossed(hix, loy, hix, hiy) ||
         crossed(hix, hiy, lox, hiy) || crossed(lox, hiy, lox, loy);
}

}  // namespace

std::vector<IntersectionEvent> find_intersections(const std::vector<Edge>& edges_a,
                                                  const std::vector<Edge>& edges_b,
                                                  coord_t grid) {
  std::vector<IntersectionEvent> events;
  if (edges_a.empty() || edges_b.empty()) return events;
  std::vector<Aabb> boxes;
  boxes.reserve(edges_b.size());
  for (const auto& e : edges_b) boxes.push_back(seg_aabb(e.p0, e.p1));
  const Bvh bvh = Bvh::build(boxes);
  for (std::uint32_t ia = 0; ia < edges_a.size(); ++ia) {
    const Edge& ea = edges_a[ia];
    const Aabb qa = seg_aabb(ea.p0, ea.p1);
    for (std::uint32_t ib : bvh.range_query(qa)) {
      const Edge& eb = edges_b[ib];
      const IsectResult r = segment_intersect(ea.p0, ea.p1, eb.p0, eb.p1);
      if (r.kind == IsectKind::None) continue;
      events.push_back(IntersectionEvent{
          ia, ib, Point{snap_to_grid(r.ax, grid), snap_to_grid(r.ay, grid)}, r.param_a,
          r.param_b});
    }
  }
  std::sort(events.begin(), events.end(), [](const auto& l, const auto& r) {
    return std::tie(l.edge_a, l.edge_b, l.param_a) < std::tie(r.edge_a, r.edge_b, r.param_a);
  });
  return events;
}

// ---------------------------------------------------------------- arrangement

std::vector<ArrSeg> build_arrangement(std::vector<DirSeg> segs, coord_t grid) {
  // snap input endpoints, drop degenerate segments
  for (auto& s : segs) {
    s.p0 = Point{snap_to_grid(double(s.p0.x), grid), snap_to_grid(double(s.p0.y), grid)};
    s.p1 = Point{snap_to_grid(double(s.p1.x), grid), snap_to_grid(double(s.p1.y), grid)};
  }
  std::erase_if(segs, [](const DirSeg& s) { return s.p0 == s.p1; });

  constexpr int kMaxRounds = 64;
  for (int round = 0; round < kMaxRounds && !segs.empty(); ++round) {
    // vertex set
    std::vector<Point> verts;
    verts.reserve(2 * segs.size());
    for (const auto& s : segs) {
      verts.push_back(s.p0);
      verts.push_back(s.p1);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());

    std::vector<Aabb> vert_boxes;
    vert_boxes.reserve(verts.size());
    for (const auto& v : verts) vert_boxes.push_back(Aabb{v, v});
    const Bvh vert_bvh = Bvh::build(vert_boxes);

    std::vector<Aabb> seg_boxes;
    seg_boxes.reserve(segs.size());
    for (const auto& s : segs) seg_boxes.push_back(seg_aabb(s.p0, s.p1));
    const Bvh seg_bvh = Bvh::build(seg_boxes);

    bool changed = false;
    std::vector<DirSeg> next;
    next.reserve(segs.size());
    std::vector<Point> cuts;
    for (std::uint32_t i = 0; i < segs.size(); ++i) {
      const DirSeg& s = segs[i];
      cuts.clear();
      // proper crossings with other segments -> snapped points
      for (std::uint32_t j : seg_bvh.range_query(seg_boxes[i])) {
        if (j == i) continue;
        const DirSeg& o = segs[j];
        const IsectResult r = segment_intersect(s.p0, s.p1, o.p0, o.p1);
        if (r.kind == IsectKind::Proper)
          cuts.push_back(Point{snap_to_grid(r.ax, grid), snap_to_grid(r.ay, grid)});
      }
      // hot-pixel reroutes: vertices whose pixel the segment crosses
      Aabb q = seg_boxes[i];
      q.lo.x -= grid;
      q.lo.y -= grid;
      q.hi.x += grid;
      q.hi.y += grid;
      for (std::uint32_t vi : vert_bvh.range_query(q)) {
        const Point& v = verts[vi];
        if (v == s.p0 || v == s.p1) continue;
        if (segment_hits_hot_pixel(s.p0, s.p1, v, grid)) cuts.push_back(v);
      }
      if (cuts.empty()) {
        next.push_back(s);
        continue;
      }
      std::erase_if(cuts, [&](const Point& c) { return c == s.p0 || c == s.p1; });
      const wide_t dx = s.p1.x - s.p0.x, dy = s.p1.y - s.p0.y;
      std::sort(cuts.begin(), cuts.end(), [&](const Point& l, const Point& r) {
        const wide_t tl = dx * (l.x - s.p0.x) + dy * (l.y - s.p0.y);
        const wide_t tr = dx * (r.x - s.p0.x) + dy * (r.y - s.p0.y);
        if (tl != tr) return tl < tr;
        return l < r;
      });
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      Point cur = s.p0;
      for (const Point& c : cuts) {
        if (c == cur) continue;
        next.push_back(DirSeg{cur, c, s.layer});
        cur = c;
        changed = true;
      }
      if (cur != s.p1) next.push_back(DirSeg{cur, s.p1, s.layer});
    }
    segs = std::move(next);
    if (!changed) break;
    if (round == kMaxRounds - 1)
      throw std::runtime_error("build_arrangement: snap rounding did not converge");
  }

  // canonicalize and merge duplicates with signed weights
  std::map<std::pair<Point, Point>, ArrSeg> merged;
  for (const auto& s : segs) {
    Point a = s.p0, b = s.p1;
    int w = 1;
    if (b < a) {
      std::swap(a, b);
      w = -1;
    }
    auto& slot = merged[{a, b}];
    slot.a = a;
    slot.b = b;
    slot.weight[s.layer] += w;
  }
  std::vector<ArrSeg> out;
  out.reserve(merged.size());
  for (auto& [key, seg] : merged)
    if (seg.weight[0] != 0 || seg.weight[1] != 0) out.push_back(seg);
  return out;
}

std::vector<WindingPair> left_windings(const std::vector<ArrSeg>& segs) {
  std::vector<WindingPair> out(segs.size(), WindingPair{0, 0});
  if (segs.empty()) return out;
  std::vector<Aabb> boxes;
  boxes.reserve(segs.size());
  for (const auto& s : segs) boxes.push_back(seg_aabb(s.a, s.b));
  const Bvh bvh = Bvh::build(boxes);

  for (std::size_t i = 0; i < segs.size(); ++i) {
    const ArrSeg& s = segs[i];
    // doubled coordinates: ray origin at segment midpoint, direction = left normal
    const wide_t px = wide_t(s.a.x) + wide_t(s.b.x);
    const wide_t py = wide_t(s.a.y) + wide_t(s.b.y);
    const wide_t nx = -(wide_t(s.b.y) - wide_t(s.a.y));
    const wide_t ny = wide_t(s.b.x) - wide_t(s.a.x);
    // conservative node filter: slab test of ray vs box in doubles
    const double pxd = double(px), pyd = double(py);
    const double nxd = double(nx), nyd = double(ny);
    auto node_hits_ray = [&](const Aabb& box) {
      const double lox = 2.0 * double(box.lo.x) - 1, hix = 2.0 * double(box.hi.x) + 1;
      const double loy = 2.0 * double(box.lo.y) - 1, hiy = 2.0 * double(box.hi.y) + 1;
      double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
      if (nxd == 0.0) {
        if (pxd < lox || pxd > hix) return false;
      } else {
        double ta = (lox - pxd) / nxd, tb = (hix - pxd) / nxd;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      }
      if (nyd == 0.0) {
        if (pyd < loy || pyd > hiy) return false;
      } else {
        double ta = (loy - pyd) / nyd, tb = (hiy - pyd) / nyd;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      }
      return t0 <= t1 + 1e-9;
    };
    int wa = 0, wb = 0;
    bvh.traverse(node_hits_ray, [&](std::uint32_t j) {
      const ArrSeg& q = segs[j];
      const wide_t q0x = 2 * wide_t(q.a.x), q0y = 2 * wide_t(q.a.y);
      const wide_t q1x = 2 * wide_t(q.b.x), q1y = 2 * wide_t(q.b.y);
      // side of ray line, ties resolve positive (symbolic +epsilon shift)
      auto side = [&](wide_t vx, wide_t vy) {
        const wide_t c = nx * (vy - py) - ny * (vx - px);
        return c > 0 ? 1 : (c < 0 ? -1 : 1);
      };
      const int s0 = side(q0x, q0y);
      const int s1 = side(q1x, q1y);
      if (s0 == s1) return;
      const wide_t ux = q1x - q0x, uy = q1y - q0y;
      const wide_t tnum = ux * (q0y - py) - uy * (q0x - px);
      const wide_t tden = ux * ny - uy * nx;
      if (tnum == 0 || sgn(tnum) != sgn(tden)) return;  // behind or through origin
      const int c = sgn(nx * uy - ny * ux);
      wa += c * q.weight[0];
      wb += c * q.weight[1];
    });
    out[i] = WindingPair{wa, wb};
  }
  return out;
}

// ------------------------------------------------------------- reconstruction

namespace {

struct DirOut {
  Point from, to;
};

// u before w when rotating clockwise starting just after direction r
bool cw_before(const Point& r, const Point& u, const Point& w) {
  auto rank = [&](const Point& d) {
    const wide_t c = wide_t(r.x) * d.y - wide_t(r.y) * d.x;
    if (c < 0) return 1;
    if (c > 0) return 3;
    const wide_t dot = wide_t(r.x) * d.x + wide_t(r.y) * d.y;
    return dot < 0 ? 2 : 4;  // opposite at 180, same-direction last
  };
  const int ru = rank(u);
  const int rw = rank(w);
  if (ru != rw) return ru < rw;
  return wide_t(u.x) * w.y - wide_t(u.y) * w.x < 0;
}

std::vector<Polygon> stitch_loops(std::vector<DirOut> edges) {
  std::vector<Polygon> loops;
  if (edges.empty()) return loops;
  std::sort(edges.begin(), edges.end(), [](const DirOut& l, const DirOut& r) {
    return std::tie(l.from, l.to) < std::tie(r.from, r.to);
  });
  // outgoing edge indices per vertex
  std::map<Point, std::vector<std::size_t>> outgoing;
  for (std::size_t i = 0; i < edges.size(); ++i) outgoing[edges[i].from].push_back(i);
  std::vector<bool> used(edges.size(), false);

  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (used[start]) continue;
    Polygon loop;
    std::size_t cur = start;
    while (!used[cur]) {
      used[cur] = true;
      loop.vertices.push_back(edges[cur].from);
      const Point v = edges[cur].to;
      const Point rev{edges[cur].from.x - v.x, edges[cur].from.y - v.y};
      const auto it = outgoing.find(v);
      if (it == outgoing.end()) break;  // dangling; degenerate input
      std::size_t best = SIZE_MAX;
      for (std::size_t cand : it->second) {
        if (used[cand]) continue;
        if (best == SIZE_MAX) {
          best = cand;
          continue;
        }
        const Point du{edges[cand].to.x - v.x, edges[cand].to.y - v.y};
        const Point dw{edges[best].to.x - v.x, edges[best].to.y - v.y};
        if (cw_before(rev, du, dw)) best = cand;
      }
      if (best == SIZE_MAX) break;
      cur = best;
    }
    if (loop.vertices.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

Layer finalize_layer(std::vector<Polygon> loops, const std::string& name) {
  Layer out;
  out.name = name;
  for (auto& loop : loops) {
    Polygon norm = normalize_chain(loop);
    if (norm.vertices.empty()) continue;
    // canonical rotation: lexicographically smallest vertex first
    auto it = std::min_element(norm.vertices.begin(), norm.vertices.end());
    std::rotate(norm.vertices.begin(), it, norm.vertices.end());
    out.polygons.push_back(std::move(norm));
  }
  std::sort(out.polygons.begin(), out.polygons.end(),
            [](const Polygon& l, const Polygon& r) { return l.vertices < r.vertices; });
  return out;
}

std::vector<DirSeg> layer_segments(const Layer& layer, int tag) {
  std::vector<DirSeg> segs;
  for (const auto& poly : layer.polygons) {
    const auto& v = poly.vertices;
    if (v.size() < 3) continue;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point& a = v[i];
      const Point& b = v[(i + 1) % v.size()];
      if (a == b) continue;
      segs.push_back(DirSeg{a, b, tag});
    }
  }
  return segs;
}

template <typename Pred>
Layer classify_and_build(const std::vector<ArrSeg>& segs, Pred&& pred,
                         const std::string& name) {
  const std::vector<WindingPair> wl = left_windings(segs);
  std::vector<DirOut> kept;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const WindingPair l = wl[i];
    const WindingPair r{l.a - segs[i].weight[0], l.b - segs[i].weight[1]};
    const bool inl = pred(l);
    const bool inr = pred(r);
    if (inl == inr) continue;
    if (inl)
      kept.push_back(DirOut{segs[i].a, segs[i].b});
    else
      kept.push_back(DirOut{segs[i].b, segs[i].a});
  }
  return finalize_layer(stitch_loops(std::move(kept)), name);
}

}  // namespace

Layer boolean_op(BoolOpKind op, const Layer& a, const Layer* b, const BoolOptions& opt) {
  if (opt.grid < 1) throw std::invalid_argument("boolean_op: grid must be >= 1 dbu");
  switch (op) {
    case BoolOpKind::HEAL:
      if (b) throw std::invalid_argument("HEAL takes a single layer");
      break;
    case BoolOpKind::SIZE:
      throw std::invalid_argument("SIZE takes a delta; use size_layer");
    case BoolOpKind::TOUCH:
      if (!b) throw std::invalid_argument("TOUCH takes two layers");
      return touch_layer(a, *b);
    default:
      if (!b) throw std::invalid_argument("binary boolean needs two layers");
      break;
  }
  std::vector<DirSeg> segs = layer_segments(a, 0);
  if (b) {
    auto sb = layer_segments(*b, 1);
    segs.insert(segs.end(), sb.begin(), sb.end());
  }
  const std::vector<ArrSeg> arr = build_arrangement(std::move(segs), opt.grid);
  auto pred = [op](const WindingPair& w) {
    const bool ia = w.a != 0;
    const bool ib = w.b != 0;
    switch (op) {
      case BoolOpKind::AND: return ia && ib;
      case BoolOpKind::OR: return ia || ib;
      case BoolOpKind::NOT: return ia && !ib;
      case BoolOpKind::XOR: return ia != ib;
      case BoolOpKind::HEAL: return ia;
      default: return false;
    }
  };
  return classify_and_build(arr, pred, a.name);
}

Layer size_layer(const Layer& a, coord_t delta, const BoolOptions& opt) {
  constexpr coord_t kOverflowGuard = coord_t(1) << 30;
  if (delta > kOverflowGuard || delta < -kOverflowGuard)
    throw std::invalid_argument("size_layer: delta exceeds overflow guard");
  const Layer healed = heal(a, opt);
  if (delta == 0) return healed;

  // Minkowski-style band: per-edge extrusion quads plus mitered corner
  // wedges. Growing unions the band with the material; shrinking subtracts
  // the inward band, so collapsed geometry vanishes without relying on the
  // orientation of inverted offset rings.
  const bool grow = delta > 0;
  const double d = std::abs(double(delta));
  const double miter_limit = opt.miter_limit_factor * d;
  Layer band;
  auto add_ring = [&](std::vector<Point> ring) {
    Polygon poly(std::move(ring));
    const wide_t area2 = signed_area2(poly);
    if (area2 == 0) return;
    if (area2 < 0) std::reverse(poly.vertices.begin(), poly.vertices.end());
    band.polygons.push_back(std::move(poly));
  };
  auto snap = [&](double x, double y) {
    return Point{snap_to_grid(x, opt.grid), snap_to_grid(y, opt.grid)};
  };
  for (const auto& poly : healed.polygons) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    if (n < 3) continue;
    // extrusion side: right of travel when growing, left when shrinking
    auto enorm = [&](const Point& p, const Point& q) {
      const double ex = double(q.x - p.x), ey = double(q.y - p.y);
      const double len = std::hypot(ex, ey);
      const double sgn = grow ? 1.0 : -1.0;
      return std::pair{sgn * ey / len, sgn * -ex / len};
    };
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p = v[i];
      const Point& q = v[(i + 1) % n];
      const auto [nx, ny] = enorm(p, q);
      add_ring({p, q, snap(double(q.x) + d * nx, double(q.y) + d * ny),
                snap(double(p.x) + d * nx, double(p.y) + d * ny)});
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Point& prev = v[(i + n - 1) % n];
      const Point& cur = v[i];
      const Point& next = v[(i + 1) % n];
      const wide_t turn = cross(prev, cur, next);
      // a gap opens only where the boundary turns away from the band side
      if (grow ? turn <= 0 : turn >= 0) continue;
      const auto [n1x, n1y] = enorm(prev, cur);
      const auto [n2x, n2y] = enorm(cur, next);
      const double px1 = double(cur.x) + d * n1x, py1 = double(cur.y) + d * n1y;
      const double px2 = double(cur.x) + d * n2x, py2 = double(cur.y) + d * n2y;
      const double e1x = double(cur.x - prev.x), e1y = double(cur.y - prev.y);
      const double e2x = double(next.x - cur.x), e2y = double(next.y - cur.y);
      const double denom = e1x * e2y - e1y * e2x;
      bool mitered = false;
      double mx = 0, my = 0;
      if (denom != 0.0) {
        const double t = ((px2 - px1) * e2y - (py2 - py1) * e2x) / denom;
        mx = px1 + t * e1x;
        my = py1 + t * e1y;
        mitered =
            std::hypot(mx - double(cur.x), my - double(cur.y)) <= miter_limit + 1e-9;
      }
      if (mitered)
        add_ring({cur, snap(px1, py1), snap(mx, my), snap(px2, py2)});
      else
        add_ring({cur, snap(px1, py1), snap(px2, py2)});
    }
  }
  Layer out = grow ? boolean_op(BoolOpKind::OR, healed, &band, opt)
                   : boolean_op(BoolOpKind::NOT, healed, &band, opt);
  out.name = a.name;
  return out;
}

Layer touch_layer(const Layer& a, const Layer& b) {
  Layer out;
  out.name = a.name;
  std::vector<Edge> b_edges;
  for (const auto& poly : b.polygons) {
    const auto& v = poly.vertices;
    if (v.size() < 3) continue;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == v[(i + 1) % v.size()]) continue;
      b_edges.push_back(Edge{v[i], v[(i + 1) % v.size()]});
    }
  }
  std::optional<Bvh> bvh;
  std::vector<Aabb> boxes;
  if (!b_edges.empty()) {
    boxes.reserve(b_edges.size());
    for (const auto& e : b_edges) boxes.push_back(seg_aabb(e.p0, e.p1));
    bvh = Bvh::build(boxes);
  }
  for (const auto& poly : a.polygons) {
    const auto& v = poly.vertices;
    if (v.size() < 3) continue;
    bool hit = false;
    if (bvh) {
      for (std::size_t i = 0; i < v.size() && !hit; ++i) {
        const Point& p0 = v[i];
        const Point& p1 = v[(i + 1) % v.size()];
        for (std::uint32_t j : bvh->range_query(seg_aabb(p0, p1))) {
          if (segment_intersect(p0, p1, b_edges[j].p0, b_edges[j].p1).kind !=
              IsectKind::None) {
            hit = true;
            break;
          }
        }
      }
    }
    if (!hit && point_in_layer(b, v[0])) hit = true;  // a inside b
    if (!hit) {
      // b polygon fully inside this a polygon
      Layer single;
      single.polygons.push_back(poly);
      for (const auto& bp : b.polygons) {
        if (!bp.vertices.empty() && point_in_layer(single, bp.vertices[0])) {
          hit = true;
          break;
        }
      }
    }
    if (hit) out.polygons.push_back(poly);
  }
  return out;
}

int winding_number2x(const Layer& layer, wide_t x2, wide_t y2) {
  int w = 0;
  for (const auto& poly : layer.polygons) {
    const auto& v = poly.vertices;
    if (v.size() < 3) continue;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point& a = v[i];
      const Point& b = v[(i + 1) % v.size()];
      const wide_t ay = 2 * wide_t(a.y), by = 2 * wide_t(b.y);
      const wide_t ax = 2 * wide_t(a.x), bx = 2 * wide_t(b.x);
      if (ay <= y2 && y2 < by) {
        if ((bx - ax) * (y2 - ay) - (by - ay) * (x2 - ax) > 0) ++w;
      } else if (by <= y2 && y2 < ay) {
        if ((bx - ax) * (y2 - ay) - (by - ay) * (x2 - ax) < 0) --w;
      }
    }
  }
  return w;
}

}  // namespace litho
