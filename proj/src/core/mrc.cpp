#include "mrc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "boolean.hpp"
#include "bvh.hpp"

namespace litho {

const char* mrc_rule_name(MrcRule r) {
  switch (r) {
    case MrcRule::MinSpace: return "min_space";
    case MrcRule::MinWidth: return "min_width";
    case MrcRule::MinInternalC2c: return "min_internal_c2c";
    case MrcRule::MinExternalC2c: return "min_external_c2c";
    case MrcRule::MinNotch: return "min_notch";
    case MrcRule::MinNub: return "min_nub";
    case MrcRule::MinJog: return "min_jog";
    case MrcRule::MinArea: return "min_area";
  }
  return "?";
}

coord_t MrcRuleSet::max_linear() const {
  return std::max({min_space, min_width, min_internal_c2c, min_external_c2c,
                   min_notch, min_nub, min_jog});
}

namespace {

struct MEdge {
  std::uint32_t poly, idx;
  Point a, b;
  int dx, dy;  // unit direction
  int nx, ny;  // outward normal (right of direction)
};

std::vector<MEdge> collect_edges(const Layer& layer) {
  std::vector<MEdge> edges;
  for (std::uint32_t pi = 0; pi < layer.polygons.size(); ++pi) {
    const auto& v = layer.polygons[pi].vertices;
    const std::size_t n = v.size();
    for (std::uint32_t ei = 0; ei < n; ++ei) {
      const Point& a = v[ei];
      const Point& b = v[(ei + 1) % n];
      MEdge e{pi, ei, a, b, 0, 0, 0, 0};
      if (a.x == b.x && a.y != b.y) {
        e.dy = b.y > a.y ? 1 : -1;
      } else if (a.y == b.y && a.x != b.x) {
        e.dx = b.x > a.x ? 1 : -1;
      } else {
        throw std::invalid_argument("mrc: non-Manhattan or zero-length edge");
      }
      e.nx = e.dy;
      e.ny = -e.dx;
      edges.push_back(e);
    }
  }
  return edges;
}

coord_t isqrt_floor(wide_t d2) {
  coord_t u = coord_t(std::sqrt(double(d2)));
  while (wide_t(u + 1) * (u + 1) <= d2) ++u;
  while (u > 0 && wide_t(u) * u > d2) --u;
  return u;
}

Point closest_on_segment(Point p, Point a, Point b) {
  return {std::clamp(p.x, std::min(a.x, b.x), std::max(a.x, b.x)),
          std::clamp(p.y, std::min(a.y, b.y), std::max(a.y, b.y))};
}

wide_t dist2(Point p, Point q) {
  return wide_t(p.x - q.x) * (p.x - q.x) + wide_t(p.y - q.y) * (p.y - q.y);
}

// exact closest pair between Manhattan segments; c1 on (a1,b1), c2 on (a2,b2)
wide_t segment_closest(Point a1, Point b1, Point a2, Point b2, Point& c1, Point& c2) {
  // perpendicular crossing
  const bool v1 = a1.x == b1.x, v2 = a2.x == b2.x;
  if (v1 != v2) {
    const Point& va = v1 ? a1 : a2;
    const Point& vb = v1 ? b1 : b2;
    const Point& ha = v1 ? a2 : a1;
    const Point& hb = v1 ? b2 : b1;
    if (va.x >= std::min(ha.x, hb.x) && va.x <= std::max(ha.x, hb.x) &&
        ha.y >= std::min(va.y, vb.y) && ha.y <= std::max(va.y, vb.y)) {
      c1 = c2 = Point{va.x, ha.y};
      return 0;
    }
  }
  wide_t best = -1;
  auto consider = [&](Point p, Point qa, Point qb, bool p_on_first) {
    const Point q = closest_on_segment(p, qa, qb);
    const wide_t d2 = dist2(p, q);
    if (best < 0 || d2 < best) {
      best = d2;
      c1 = p_on_first ? p : q;
      c2 = p_on_first ? q : p;
    }
  };
  consider(a1, a2, b2, true);
  consider(b1, a2, b2, true);
  consider(a2, a1, b1, false);
  consider(b2, a1, b1, false);
  return best;
}

struct VertexInfo {
  std::uint32_t poly, idx;
  Point p;
  bool convex;
};

std::vector<VertexInfo> collect_vertices(const Layer& layer) {
  std::vector<VertexInfo> out;
  for (std::uint32_t pi = 0; pi < layer.polygons.size(); ++pi) {
    const auto& v = layer.polygons[pi].vertices;
    const std::size_t n = v.size();
    const int orient = signed_area2(layer.polygons[pi]) > 0 ? 1 : -1;
    for (std::uint32_t i = 0; i < n; ++i) {
      const Point& prev = v[(i + n - 1) % n];
      const Point& cur = v[i];
      const Point& next = v[(i + 1) % n];
      const wide_t c = cross(prev, cur, next);
      out.push_back({pi, i, cur, orient * c > 0});
    }
  }
  return out;
}

}  // namespace

MrcReport check_rules(const Layer& layer, const MrcRuleSet& rules) {
  MrcReport rep;
  const std::vector<MEdge> edges = collect_edges(layer);

  auto record = [&](MrcRule rule, double measured, coord_t th, std::uint32_t pa,
                    std::uint32_t pb, Point loc) {
    if (th <= 0) return;
    if (measured < double(th))
      rep.violations.push_back({rule, measured, pa, pb, loc});
    if (measured < 2.0 * double(th))
      rep.histogram.ratios[std::size_t(rule)].push_back(measured / double(th));
  };

  const coord_t radius = 2 * rules.max_linear();
  if (radius > 0 && !edges.empty()) {
    std::vector<Aabb> boxes;
    boxes.reserve(edges.size());
    for (const auto& e : edges) boxes.push_back(bounding_box(Edge{e.a, e.b}));
    const Bvh bvh = Bvh::build(boxes);
    for (std::uint32_t i = 0; i < edges.size(); ++i) {
      Aabb q = boxes[i];
      q.lo.x -= radius;
      q.lo.y -= radius;
      q.hi.x += radius;
      q.hi.y += radius;
      for (std::uint32_t j : bvh.range_query(q)) {
        if (j <= i) continue;
        const MEdge& e1 = edges[i];
        const MEdge& e2 = edges[j];
        const bool vert1 = e1.dx == 0, vert2 = e2.dx == 0;
        if (vert1 != vert2) continue;  // corner interactions via vertex scan
        // parallel pair: projection overlap required for the E2E rules
        const coord_t lo1 = vert1 ? std::min(e1.a.y, e1.b.y) : std::min(e1.a.x, e1.b.x);
        const coord_t hi1 = vert1 ? std::max(e1.a.y, e1.b.y) : std::max(e1.a.x, e1.b.x);
        const coord_t lo2 = vert2 ? std::min(e2.a.y, e2.b.y) : std::min(e2.a.x, e2.b.x);
        const coord_t hi2 = vert2 ? std::max(e2.a.y, e2.b.y) : std::max(e2.a.x, e2.b.x);
        const coord_t olo = std::max(lo1, lo2), ohi = std::min(hi1, hi2);
        if (ohi <= olo) continue;
        const coord_t c1 = vert1 ? e1.a.x : e1.a.y;
        const coord_t c2 = vert2 ? e2.a.x : e2.a.y;
        if (c1 == c2) continue;
        const int n1 = vert1 ? e1.nx : e1.ny;
        const int n2 = vert2 ? e2.nx : e2.ny;
        const coord_t gap = std::abs(c2 - c1);
        const bool lower_first = c1 < c2;
        const int nl = lower_first ? n1 : n2;
        const int nh = lower_first ? n2 : n1;
        const Point loc = vert1 ? Point{(c1 + c2) / 2, (olo + ohi) / 2}
                                : Point{(olo + ohi) / 2, (c1 + c2) / 2};
        if (nl == 1 && nh == -1) {
          // facing across empty space
          const MrcRule rule = e1.poly == e2.poly ? MrcRule::MinNotch : MrcRule::MinSpace;
          const coord_t th = e1.poly == e2.poly ? rules.min_notch : rules.min_space;
          record(rule, double(gap), th, e1.poly, e2.poly, loc);
        } else if (nl == -1 && nh == 1) {
          record(MrcRule::MinWidth, double(gap), rules.min_width, e1.poly, e2.poly, loc);
        }
      }
    }
  }

  // corner-to-corner scan over diagonal vertex pairs
  const coord_t c2c_max = std::max(rules.min_internal_c2c, rules.min_external_c2c);
  if (c2c_max > 0) {
    const std::vector<VertexInfo> verts = collect_vertices(layer);
    std::vector<Aabb> boxes;
    boxes.reserve(verts.size());
    for (const auto& v : verts) boxes.push_back({v.p, v.p});
    const Bvh bvh = Bvh::build(boxes);
    const coord_t vr = 2 * c2c_max;
    for (std::uint32_t i = 0; i < verts.size(); ++i) {
      Aabb q{{verts[i].p.x - vr, verts[i].p.y - vr},
             {verts[i].p.x + vr, verts[i].p.y + vr}};
      for (std::uint32_t j : bvh.range_query(q)) {
        if (j <= i) continue;
        const VertexInfo& v = verts[i];
        const VertexInfo& w = verts[j];
        if (v.p.x == w.p.x || v.p.y == w.p.y) continue;  // not diagonal
        const wide_t d2 = dist2(v.p, w.p);
        const double d = std::sqrt(double(d2));
        const bool inside =
            winding_number2x(layer, wide_t(v.p.x) + w.p.x, wide_t(v.p.y) + w.p.y) != 0;
        const Point loc{(v.p.x + w.p.x) / 2, (v.p.y + w.p.y) / 2};
        if (inside && !v.convex && !w.convex) {
          record(MrcRule::MinInternalC2c, d, rules.min_internal_c2c, v.poly, w.poly, loc);
        } else if (!inside && v.convex && w.convex) {
          record(MrcRule::MinExternalC2c, d, rules.min_external_c2c, v.poly, w.poly, loc);
        }
      }
    }
  }

  // per-polygon turn patterns (jog, nub) and area
  for (std::uint32_t pi = 0; pi < layer.polygons.size(); ++pi) {
    const auto& v = layer.polygons[pi].vertices;
    const std::size_t n = v.size();
    if (n < 4) continue;
    const int orient = signed_area2(layer.polygons[pi]) > 0 ? 1 : -1;
    std::vector<bool> conv(n);
    std::vector<std::pair<int, int>> dir(n);
    std::vector<coord_t> len(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = v[i];
      const Point& b = v[(i + 1) % n];
      dir[i] = {a.x == b.x ? 0 : (b.x > a.x ? 1 : -1),
                a.y == b.y ? 0 : (b.y > a.y ? 1 : -1)};
      len[i] = std::abs(b.x - a.x) + std::abs(b.y - a.y);
    }
    for (std::size_t i = 0; i < n; ++i)
      conv[i] = orient * cross(v[(i + n - 1) % n], v[i], v[(i + 1) % n]) > 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ip = (i + n - 1) % n, in = (i + 1) % n, i2 = (i + 2) % n;
      const Point loc{(v[i].x + v[in].x) / 2, (v[i].y + v[in].y) / 2};
      if (conv[i] != conv[in] && dir[ip] == dir[in]) {
        record(MrcRule::MinJog, double(len[i]), rules.min_jog, pi, pi, loc);
      }
      if (conv[i] && conv[in] && !conv[ip] && !conv[i2] &&
          dir[ip].first == -dir[in].first && dir[ip].second == -dir[in].second) {
        record(MrcRule::MinNub, double(len[i]), rules.min_nub, pi, pi, loc);
      }
    }
    const wide_t a2 = signed_area2(layer.polygons[pi]);
    if (a2 > 0 && rules.min_area > 0) {
      const double area = double(a2) / 2.0;
      if (area < double(rules.min_area))
        rep.violations.push_back({MrcRule::MinArea, area, pi, pi, v[0]});
      if (area < 2.0 * double(rules.min_area))
        rep.histogram.ratios[std::size_t(MrcRule::MinArea)].push_back(
            area / double(rules.min_area));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

// canonical segment order for deterministic, id-independent tie-breaking
bool geom_less(const MaskSegment& s, const MaskSegment& t) {
  const Point slo = std::min(s.a, s.b), shi = std::max(s.a, s.b);
  const Point tlo = std::min(t.a, t.b), thi = std::max(t.a, t.b);
  if (slo != tlo) return slo < tlo;
  return shi < thi;
}

}  // namespace

SegmentedMask apply_moves(const SegmentedMask& mask,
                          const std::vector<MoveLimit>& limits) {
  SegmentedMask out = mask;
  for (const auto& l : limits) {
    MaskSegment& s = out.segments[l.segment_id];
    s.offset += l.allowed;
  }
  return out;
}

std::vector<MoveLimit> limit_moves(const SegmentedMask& mask,
                                   const std::vector<coord_t>& proposed,
                                   const MrcRuleSet& rules) {
  const std::size_t n = mask.segments.size();
  if (proposed.size() != n)
    throw std::invalid_argument("limit_moves: proposal size mismatch");
  const Layer current = reconstruct(mask);
  {
    const MrcReport pre = check_rules(current, rules);
    if (!pre.clean())
      throw std::runtime_error("limit_moves: input mask already violates " +
                               std::to_string(pre.violations.size()) + " rule(s), first " +
                               mrc_rule_name(pre.violations.front().rule));
  }

  std::vector<coord_t> lo(n), hi(n), allowed(n);
  std::vector<MrcRule> bind(n, MrcRule::MinSpace);
  std::vector<std::int64_t> nb(n, -1);
  std::vector<bool> clamped(n, false);
  coord_t maxprop = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = std::min<coord_t>(0, proposed[i]);
    hi[i] = std::max<coord_t>(0, proposed[i]);
    maxprop = std::max(maxprop, std::abs(proposed[i]));
  }

  // pairwise slack budgets over displaced segment geometry
  std::vector<Aabb> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    boxes[i] = bounding_box(Edge{mask.segments[i].displaced_a(),
                                 mask.segments[i].displaced_b()});
  }
  const coord_t radius = rules.max_linear() + 2 * maxprop;
  const Bvh bvh = Bvh::build(boxes);
  auto chain_adjacent = [&](std::uint32_t i, std::uint32_t j) {
    if (mask.segments[i].poly != mask.segments[j].poly) return false;
    const std::uint32_t pi = mask.segments[i].poly;
    const std::uint32_t first = mask.polygon_first[pi];
    const std::uint32_t last = pi + 1 < mask.polygon_first.size()
                                   ? mask.polygon_first[pi + 1]
                                   : std::uint32_t(n);
    const std::uint32_t span = last - first;
    const std::uint32_t d = (j - i + span) % span;
    return d == 1 || d == span - 1;
  };

  auto apply_cap = [&](std::uint32_t i, coord_t cap, bool limit_out, bool limit_in,
                       MrcRule rule, std::uint32_t other) {
    if (limit_out && hi[i] > cap) {
      hi[i] = cap;
      bind[i] = rule;
      nb[i] = other;
      clamped[i] = true;
    }
    if (limit_in && lo[i] < -cap) {
      lo[i] = -cap;
      bind[i] = rule;
      nb[i] = other;
      clamped[i] = true;
    }
  };

  for (std::uint32_t i = 0; i < n; ++i) {
    Aabb q = boxes[i];
    q.lo.x -= radius;
    q.lo.y -= radius;
    q.hi.x += radius;
    q.hi.y += radius;
    for (std::uint32_t j : bvh.range_query(q)) {
      if (j <= i || chain_adjacent(i, j)) continue;
      const MaskSegment& s = mask.segments[i];
      const MaskSegment& t = mask.segments[j];
      Point c1, c2;
      const wide_t d2 = segment_closest(s.displaced_a(), s.displaced_b(),
                                        t.displaced_a(), t.displaced_b(), c1, c2);
      const bool vert_s = s.a.x == s.b.x, vert_t = t.a.x == t.b.x;
      coord_t dist = 0, thresh = 0;
      bool limit_out = false, limit_in = false;
      MrcRule rule = MrcRule::MinSpace;
      if (vert_s == vert_t) {
        const coord_t cs = vert_s ? s.displaced_a().x : s.displaced_a().y;
        const coord_t ct = vert_t ? t.displaced_a().x : t.displaced_a().y;
        if (cs == ct) continue;
        const int ns = vert_s ? s.nx : s.ny;
        const int nt = vert_t ? t.nx : t.ny;
        const int nlow = cs < ct ? ns : nt;
        const int nhigh = cs < ct ? nt : ns;
        const coord_t lo1 = vert_s ? std::min(s.a.y, s.b.y) : std::min(s.a.x, s.b.x);
        const coord_t hi1 = vert_s ? std::max(s.a.y, s.b.y) : std::max(s.a.x, s.b.x);
        const coord_t lo2 = vert_t ? std::min(t.a.y, t.b.y) : std::min(t.a.x, t.b.x);
        const coord_t hi2 = vert_t ? std::max(t.a.y, t.b.y) : std::max(t.a.x, t.b.x);
        const bool overlap = std::min(hi1, hi2) > std::max(lo1, lo2);
        if (nlow == 1 && nhigh == -1) {
          limit_out = true;
          if (overlap) {
            dist = std::abs(ct - cs);
            rule = s.poly == t.poly ? MrcRule::MinNotch : MrcRule::MinSpace;
            thresh = s.poly == t.poly ? rules.min_notch : rules.min_space;
          } else {
            dist = isqrt_floor(d2);
            rule = MrcRule::MinExternalC2c;
            thresh = rules.min_external_c2c;
          }
        } else if (nlow == -1 && nhigh == 1) {
          limit_in = true;
          if (overlap) {
            dist = std::abs(ct - cs);
            rule = MrcRule::MinWidth;
            thresh = rules.min_width;
          } else {
            dist = isqrt_floor(d2);
            rule = MrcRule::MinInternalC2c;
            thresh = rules.min_internal_c2c;
          }
        } else {
          continue;
        }
      } else {
        // perpendicular: conservative against E2E/C2C type switches
        const bool inside = winding_number2x(current, wide_t(c1.x) + c2.x,
                                             wide_t(c1.y) + c2.y) != 0;
        if (inside) continue;  // corner material; width held by parallel pairs
        dist = isqrt_floor(d2);
        thresh = std::max(rules.min_external_c2c,
                          s.poly == t.poly ? rules.min_notch : rules.min_space);
        rule = MrcRule::MinExternalC2c;
        limit_out = limit_in = true;
      }
      if (thresh <= 0) continue;
      const coord_t slack = std::max<coord_t>(0, dist - thresh);
      const coord_t di = limit_out && !limit_in ? std::max<coord_t>(0, proposed[i])
                         : limit_in && !limit_out
                             ? std::max<coord_t>(0, -proposed[i])
                             : std::abs(proposed[i]);
      const coord_t dj = limit_out && !limit_in ? std::max<coord_t>(0, proposed[j])
                         : limit_in && !limit_out
                             ? std::max<coord_t>(0, -proposed[j])
                             : std::abs(proposed[j]);
      if (di + dj <= slack) continue;
      // proportional split of the slack; odd remainder to the canonically
      // lower segment
      const bool i_lower = geom_less(mask.segments[i], mask.segments[j]);
      const coord_t dem_hi = i_lower ? dj : di;
      const coord_t cap_hi =
          di + dj > 0 ? coord_t(wide_t(slack) * dem_hi / (di + dj)) : slack / 2;
      const coord_t cap_lo = slack - cap_hi;
      apply_cap(i, i_lower ? cap_lo : cap_hi, limit_out, limit_in, rule, j);
      apply_cap(j, i_lower ? cap_hi : cap_lo, limit_out, limit_in, rule, i);
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    allowed[i] = std::clamp(proposed[i], lo[i], hi[i]);

  // jog joints: residual offset steps below min_jog snap to equal offsets
  if (rules.min_jog > 0) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> joints;
    for (std::uint32_t i = 0; i + 1 < n; ++i) {
      if (mask.segments[i].poly == mask.segments[i + 1].poly &&
          mask.segments[i].edge == mask.segments[i + 1].edge)
        joints.emplace_back(i, i + 1);
    }
    bool changed = true;
    for (std::size_t pass = 0; changed && pass < n + 2; ++pass) {
      changed = false;
      for (const auto& [i, j] : joints) {
        const coord_t fi = mask.segments[i].offset + allowed[i];
        const coord_t fj = mask.segments[j].offset + allowed[j];
        const coord_t step = std::abs(fi - fj);
        if (step == 0 || step >= rules.min_jog) continue;
        const bool i_leads = geom_less(mask.segments[i], mask.segments[j]);
        const std::uint32_t lead = i_leads ? i : j;
        const std::uint32_t foll = i_leads ? j : i;
        const coord_t f_lead = mask.segments[lead].offset + allowed[lead];
        const coord_t t = std::clamp(f_lead, mask.segments[foll].offset + lo[foll],
                                     mask.segments[foll].offset + hi[foll]);
        if (t == f_lead) {
          allowed[foll] = t - mask.segments[foll].offset;
        } else {
          allowed[i] = 0;
          allowed[j] = 0;
        }
        bind[foll] = MrcRule::MinJog;
        nb[foll] = lead;
        clamped[foll] = true;
        changed = true;
      }
    }
  }

  auto with_moves = [&]() {
    SegmentedMask m = mask;
    for (std::size_t i = 0; i < n; ++i) m.segments[i].offset += allowed[i];
    return m;
  };

  // min_area veto: scale inward moves back until every polygon stays legal
  if (rules.min_area > 0) {
    for (int iter = 0; iter < 64; ++iter) {
      bool shrunk = false;
      // evaluate per polygon by reconstructing it individually
      for (std::uint32_t pi = 0; pi < mask.base.polygons.size(); ++pi) {
        SegmentedMask one;
        one.base.polygons.push_back(mask.base.polygons[pi]);
        one.dbu_per_nm = mask.dbu_per_nm;
        one.polygon_first.push_back(0);
        const std::uint32_t first = mask.polygon_first[pi];
        const std::uint32_t last = pi + 1 < mask.polygon_first.size()
                                       ? mask.polygon_first[pi + 1]
                                       : std::uint32_t(n);
        for (std::uint32_t i = first; i < last; ++i) {
          MaskSegment s = mask.segments[i];
          s.poly = 0;
          s.offset += allowed[i];
          one.segments.push_back(s);
        }
        const Layer lp = reconstruct(one);
        wide_t a2 = 0;
        for (const auto& p : lp.polygons) a2 += signed_area2(p);
        if (signed_area2(mask.base.polygons[pi]) > 0 && a2 / 2 < rules.min_area) {
          for (std::uint32_t i = first; i < last; ++i) {
            if (allowed[i] < 0) {
              allowed[i] /= 2;
              bind[i] = MrcRule::MinArea;
              nb[i] = -1;
              clamped[i] = true;
              shrunk = true;
            }
          }
        }
      }
      if (!shrunk) break;
    }
  }

  // safety net: the conservative budgets should already guarantee a clean
  // result; if a residual interaction slips through, halve all moves until
  // the re-check passes (reaches the clean zero-move state in the limit)
  for (int iter = 0; iter < 64; ++iter) {
    const MrcReport post = check_rules(reconstruct(with_moves()), rules);
    if (post.clean()) break;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (allowed[i] != 0) {
        allowed[i] /= 2;
        clamped[i] = true;
        any = true;
      }
    }
    if (!any)
      throw std::runtime_error("limit_moves: zero-move state fails re-check");
  }

  std::vector<MoveLimit> out(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    out[i] = {i, proposed[i], allowed[i], bind[i], nb[i],
              clamped[i] || allowed[i] != proposed[i]};
  }
  return out;
}

}  // namespace litho
