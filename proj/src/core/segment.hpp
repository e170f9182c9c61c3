#pragma once
// Segmented Manhattan mask: every polygon edge partitioned into movable
// segments with outward normals and signed offsets; reconstruction inserts
// jogs at joints and miters at corners. Shared by the MRC move limiter and
// the OPC engine.

#include <vector>

#include "contour.hpp"
#include "geometry.hpp"

namespace litho {

enum class SegRole { LineSide, LineEnd, Corner };

struct MaskSegment {
  std::uint32_t poly = 0;       // polygon index in the base layer
  std::uint32_t edge = 0;       // edge index within the polygon chain
  std::uint32_t piece = 0;      // piece index along the edge
  Point a, b;                   // base span, chain order (material on the left)
  int nx = 0, ny = 0;           // outward unit normal (axis-aligned)
  coord_t offset = 0;           // displacement along the outward normal, dbu
  SegRole role = SegRole::LineSide;
  bool lock_lateral = false;    // lateral move prohibited (short-line rule)
  bool drop_fn = false;         // fn driver excluded from EPE averaging
  bool fixed_meef = false;      // driver-masked: controller sees MEEF = 1

  coord_t length() const;
  Point displaced_a() const { return {a.x + nx * offset, a.y + ny * offset}; }
  Point displaced_b() const { return {b.x + nx * offset, b.y + ny * offset}; }
};

struct SegmentedMask {
  Layer base;                   // normalized Manhattan source layer
  double dbu_per_nm = 1.0;
  std::vector<MaskSegment> segments;

  // canonical order: (poly, edge, piece); ids are indices in this order
  std::vector<std::uint32_t> polygon_first;  // first segment id per polygon
};

// Partitions every edge of the healed layer into pieces of roughly
// seg_length (each within [seg/2, 3seg/2]; shorter edges stay whole).
// Line-end edges: both corners convex, flanking edges anti-parallel,
// strictly shorter than both flanks and than 2x seg_length. Pieces touching
// a polygon vertex are tagged Corner unless the edge is a line end.
// Throws on non-Manhattan edges.
SegmentedMask segment_layout(const Layer& layer, double dbu_per_nm,
                             double seg_length_nm);

// Applies the segment offsets: jogs between unequal collinear neighbors,
// mitered corners between perpendicular ones. Zero offsets reproduce the
// base layer exactly (up to chain normalization).
Layer reconstruct(const SegmentedMask& mask);

// EPE gauges at base-edge midpoints (nm), outward target normals.
std::vector<Gauge> make_gauges(const SegmentedMask& mask);

}  // namespace litho
