#include "geometry.hpp"

#include <limits>
#include <stdexcept>

namespace litho {

Aabb Aabb::empty() {
  return Aabb{{std::numeric_limits<coord_t>::max(), std::numeric_limits<coord_t>::max()},
              {std::numeric_limits<coord_t>::min(), std::numeric_limits<coord_t>::min()}};
}

Layer* Layout::find_layer(const std::string& name) {
  for (auto& l : layers)
    if (l.name == name) return &l;
  return nullptr;
}

const Layer* Layout::find_layer(const std::string& name) const {
  for (const auto& l : layers)
    if (l.name == name) return &l;
  return nullptr;
}

Layer& Layout::get_or_add_layer(const std::string& name) {
  if (auto* l = find_layer(name)) return *l;
  layers.push_back(Layer{name, {}});
  return layers.back();
}

wide_t signed_area2(const Polygon& poly) {
  const auto& v = poly.vertices;
  if (v.size() < 3) throw std::invalid_argument("signed_area2: polygon has fewer than 3 vertices");
  wide_t acc = 0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % n];
    acc += wide_t(a.x) * wide_t(b.y) - wide_t(b.x) * wide_t(a.y);
  }
  return acc;
}

Aabb bounding_box(const Polygon& poly) {
  if (poly.vertices.empty()) throw std::invalid_argument("bounding_box: empty polygon");
  Aabb box = Aabb::empty();
  for (const auto& p : poly.vertices) box.expand(p);
  return box;
}

Aabb bounding_box(const Edge& e) {
  Aabb box = Aabb::empty();
  box.expand(e.p0);
  box.expand(e.p1);
  return box;
}

Aabb bounding_box(const Layer& layer) {
  Aabb box = Aabb::empty();
  bool any = false;
  for (const auto& p : layer.polygons) {
    if (p.vertices.empty()) continue;
    box.expand(bounding_box(p));
    any = true;
  }
  if (!any) throw std::invalid_argument("bounding_box: empty layer");
  return box;
}

Aabb bounding_box(const Layout& layout) {
  Aabb box = Aabb::empty();
  bool any = false;
  for (const auto& l : layout.layers) {
    for (const auto& p : l.polygons) {
      if (p.vertices.empty()) continue;
      box.expand(bounding_box(p));
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("bounding_box: empty layout");
  return box;
}

Polygon normalize_chain(const Polygon& poly) {
  std::vector<Point> out;
  out.reserve(poly.vertices.size());
  for (const auto& p : poly.vertices) {
    if (!out.empty() && out.back() == p) continue;
    out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  // drop collinear interior vertices; repeat until stable
  bool changed = true;
  while (changed && out.size() >= 3) {
    changed = false;
    std::vector<Point> next;
    next.reserve(out.size());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = out[(i + n - 1) % n];
      const Point& b = out[i];
      const Point& c = out[(i + 1) % n];
      if (cross(a, b, c) == 0 &&
          (wide_t(b.x - a.x) * (c.x - b.x) + wide_t(b.y - a.y) * (c.y - b.y)) >= 0) {
        changed = true;  // b lies on segment a-c (or a==c spike handled next round)
        continue;
      }
      next.push_back(b);
    }
    out = std::move(next);
  }
  if (out.size() < 3) out.clear();
  return Polygon{std::move(out)};
}

ValidationReport validate_layout(const Layout& layout, coord_t abs_limit) {
  if (abs_limit == 0) abs_limit = std::numeric_limits<coord_t>::max();
  ValidationReport report;
  for (const auto& layer : layout.layers) {
    for (std::size_t pi = 0; pi < layer.polygons.size(); ++pi) {
      const auto& v = layer.polygons[pi].vertices;
      if (v.size() < 3) {
        report.findings.push_back({FindingKind::TooFewVertices, layer.name, pi, 0});
        continue;
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % v.size()];
        if (a == b) report.findings.push_back({FindingKind::DuplicateVertex, layer.name, pi, i});
        if (a.x > abs_limit || a.x < -abs_limit || a.y > abs_limit || a.y < -abs_limit)
          report.findings.push_back({FindingKind::CoordOutOfRange, layer.name, pi, i});
      }
    }
  }
  return report;
}

}  // namespace litho
