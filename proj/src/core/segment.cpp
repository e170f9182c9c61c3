#include "segment.hpp"

#include <cmath>
#include <stdexcept>

#include "boolean.hpp"

namespace litho {

coord_t MaskSegment::length() const {
  return std::abs(b.x - a.x) + std::abs(b.y - a.y);
}

namespace {

struct Dir {
  int dx, dy;
};

Dir edge_dir(const Point& a, const Point& b) {
  if (a.x == b.x && a.y != b.y) return {0, b.y > a.y ? 1 : -1};
  if (a.y == b.y && a.x != b.x) return {b.x > a.x ? 1 : -1, 0};
  throw std::invalid_argument("segment_layout: non-Manhattan or zero-length edge");
}

}  // namespace

SegmentedMask segment_layout(const Layer& layer, double dbu_per_nm,
                             double seg_length_nm) {
  if (seg_length_nm <= 0) throw std::invalid_argument("segment_layout: seg_length <= 0");
  SegmentedMask mask;
  mask.base = heal(layer);
  mask.dbu_per_nm = dbu_per_nm;
  const coord_t seg_len = std::max<coord_t>(1, coord_t(std::llround(seg_length_nm * dbu_per_nm)));

  for (std::uint32_t pi = 0; pi < mask.base.polygons.size(); ++pi) {
    mask.polygon_first.push_back(std::uint32_t(mask.segments.size()));
    const auto& verts = mask.base.polygons[pi].vertices;
    const std::size_t n = verts.size();
    const int orient = signed_area2(mask.base.polygons[pi]) > 0 ? 1 : -1;
    for (std::uint32_t ei = 0; ei < n; ++ei) {
      const Point& a = verts[ei];
      const Point& b = verts[(ei + 1) % n];
      const Point& prev = verts[(ei + n - 1) % n];
      const Point& next = verts[(ei + 2) % n];
      const Dir d = edge_dir(a, b);
      const Dir dp = edge_dir(prev, a);
      const Dir dn = edge_dir(b, next);
      const coord_t len = std::abs(b.x - a.x) + std::abs(b.y - a.y);
      const coord_t len_prev = std::abs(a.x - prev.x) + std::abs(a.y - prev.y);
      const coord_t len_next = std::abs(next.x - b.x) + std::abs(next.y - b.y);

      const bool convex_a = orient * (wide_t(dp.dx) * d.dy - wide_t(dp.dy) * d.dx) > 0;
      const bool convex_b = orient * (wide_t(d.dx) * dn.dy - wide_t(d.dy) * dn.dx) > 0;
      const bool line_end = convex_a && convex_b && dp.dx == -dn.dx && dp.dy == -dn.dy &&
                            len < len_prev && len < len_next && len < 2 * seg_len;

      coord_t pieces = std::max<coord_t>(
          1, coord_t(std::llround(double(len) / double(seg_len))));
      const coord_t base_len = len / pieces;
      const coord_t rem = len % pieces;
      Point cur = a;
      for (coord_t k = 0; k < pieces; ++k) {
        const coord_t plen = base_len + (k < rem ? 1 : 0);
        MaskSegment s;
        s.poly = pi;
        s.edge = ei;
        s.piece = std::uint32_t(k);
        s.a = cur;
        s.b = {cur.x + d.dx * plen, cur.y + d.dy * plen};
        // outward normal: right of the travel direction (holes run CW, so
        // the same formula points out of the material for them too)
        s.nx = d.dy;
        s.ny = -d.dx;
        if (line_end) {
          s.role = SegRole::LineEnd;
        } else if (k == 0 || k == pieces - 1) {
          s.role = SegRole::Corner;
        } else {
          s.role = SegRole::LineSide;
        }
        mask.segments.push_back(s);
        cur = s.b;
      }
    }
  }
  return mask;
}

Layer reconstruct(const SegmentedMask& mask) {
  Layer out;
  out.name = mask.base.name;
  const std::size_t nseg = mask.segments.size();
  for (std::uint32_t pi = 0; pi < mask.base.polygons.size(); ++pi) {
    const std::uint32_t first = mask.polygon_first[pi];
    const std::uint32_t last = pi + 1 < mask.polygon_first.size()
                                   ? mask.polygon_first[pi + 1]
                                   : std::uint32_t(nseg);
    if (first == last) continue;
    Polygon poly;
    for (std::uint32_t i = first; i < last; ++i) {
      const MaskSegment& s = mask.segments[i];
      const MaskSegment& t = mask.segments[i + 1 < last ? i + 1 : first];
      const bool s_vertical = s.a.x == s.b.x;
      const bool t_vertical = t.a.x == t.b.x;
      if (s_vertical == t_vertical) {
        // collinear joint: jog between unequal offsets
        poly.vertices.push_back(s.displaced_b());
        poly.vertices.push_back(t.displaced_a());
      } else {
        // perpendicular joint: mitered corner on the two offset lines
        const MaskSegment& v = s_vertical ? s : t;
        const MaskSegment& h = s_vertical ? t : s;
        poly.vertices.push_back({v.a.x + v.nx * v.offset, h.a.y + h.ny * h.offset});
      }
    }
    Polygon norm = normalize_chain(poly);
    if (norm.vertices.size() >= 3 && signed_area2(norm) != 0)
      out.polygons.push_back(std::move(norm));
  }
  return out;
}

std::vector<Gauge> make_gauges(const SegmentedMask& mask) {
  std::vector<Gauge> gauges;
  gauges.reserve(mask.segments.size());
  const double scale = 1.0 / mask.dbu_per_nm;
  for (std::uint32_t i = 0; i < mask.segments.size(); ++i) {
    const MaskSegment& s = mask.segments[i];
    Gauge g;
    g.segment_id = i;
    g.x = 0.5 * (double(s.a.x) + double(s.b.x)) * scale;
    g.y = 0.5 * (double(s.a.y) + double(s.b.y)) * scale;
    g.nx = s.nx;
    g.ny = s.ny;
    gauges.push_back(g);
  }
  return gauges;
}

}  // namespace litho
