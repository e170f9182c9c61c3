#pragma once
// Integer-coordinate polygon primitives shared by all geometry modules.
// Canonical unit is the database unit (dbu); nm values convert at ingest.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace litho {

#ifdef LITHO_COORD_32
using coord_t = std::int32_t;
#else
using coord_t = std::int64_t;
#endif
using wide_t = __int128;  // exact intermediates for area / cross products

struct Point {
  coord_t x = 0;
  coord_t y = 0;
  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

struct Edge {
  Point p0, p1;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Aabb {
  Point lo, hi;

  bool valid() const { return lo.x <= hi.x && lo.y <= hi.y; }
  bool overlaps(const Aabb& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
  bool contains(const Aabb& o) const {
    return lo.x <= o.lo.x && lo.y <= o.lo.y && hi.x >= o.hi.x && hi.y >= o.hi.y;
  }
  bool contains(const Point& p) const {
    return lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y;
  }
  void expand(const Point& p) {
    if (p.x < lo.x) lo.x = p.x;
    if (p.y < lo.y) lo.y = p.y;
    if (p.x > hi.x) hi.x = p.x;
    if (p.y > hi.y) hi.y = p.y;
  }
  void expand(const Aabb& o) {
    expand(o.lo);
    expand(o.hi);
  }
  static Aabb empty();
  friend bool operator==(const Aabb&, const Aabb&) = default;
};

// Vertex chain, implicitly closed. Inputs to Booleans may be self-intersecting
// or degenerate; normalized outputs are CCW outers / CW holes under the
// nonzero winding fill rule.
struct Polygon {
  std::vector<Point> vertices;

  Polygon() = default;
  explicit Polygon(std::vector<Point> v) : vertices(std::move(v)) {}
};

struct Layer {
  std::string name;
  std::vector<Polygon> polygons;
};

struct Layout {
  // dbu per nanometer as a positive rational (num/den).
  std::int64_t dbu_num = 1;
  std::int64_t dbu_den = 1;
  std::vector<Layer> layers;

  double dbu_per_nm() const { return double(dbu_num) / double(dbu_den); }
  Layer* find_layer(const std::string& name);
  const Layer* find_layer(const std::string& name) const;
  Layer& get_or_add_layer(const std::string& name);
};

// cross of (b-a) x (c-a), exact
inline wide_t cross(const Point& a, const Point& b, const Point& c) {
  return wide_t(b.x - a.x) * wide_t(c.y - a.y) -
         wide_t(b.y - a.y) * wide_t(c.x - a.x);
}

// Twice the signed area (shoelace), exact. Positive iff CCW.
wide_t signed_area2(const Polygon& poly);

Aabb bounding_box(const Polygon& poly);
Aabb bounding_box(const Edge& e);
Aabb bounding_box(const Layer& layer);
Aabb bounding_box(const Layout& layout);

// Drops consecutive duplicate and collinear vertices. Idempotent.
// Degenerate (< 3 surviving vertices) collapses to an empty chain.
Polygon normalize_chain(const Polygon& poly);

enum class FindingKind { ZeroLengthEdge, DuplicateVertex, CoordOutOfRange, TooFewVertices };

struct ValidationFinding {
  FindingKind kind;
  std::string layer;
  std::size_t polygon_index;
  std::size_t vertex_index;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool clean() const { return findings.empty(); }
};

// Report-only scan: zero-length edges, duplicate vertices, coordinates
// outside the configured precision (abs_limit, 0 = type max).
ValidationReport validate_layout(const Layout& layout, coord_t abs_limit = 0);

}  // namespace litho
