#pragma once
// Marching-squares contour extraction at the resist threshold, EPE gauges,
// and pinch/bridge/pullback defect detection.

#include <optional>
#include <string>
#include <vector>

#include "bvh.hpp"
#include "imaging.hpp"

namespace litho {

struct ContourLoop {
  // closed polyline, nm, implicitly closed; CCW around printed regions
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t size() const { return xs.size(); }
  double signed_area() const;
  double perimeter() const;
  // winding number of the loop around (px, py)
  int winding(double px, double py) const;
};

struct ContourSet {
  std::vector<ContourLoop> loops;
};

// 16-case marching squares over pixel centers. Crossings by linear
// interpolation; saddle cells disambiguated by the cell-center average;
// node values equal to the threshold are perturbed by +eps (1e-12 of the
// field range). Loops are stitched canonically starting from the smallest
// grid-edge index, oriented with the above-threshold side on the left.
ContourSet marching_squares(const ResistImage& field, double threshold);

struct Gauge {
  std::uint32_t segment_id = 0;
  double x = 0, y = 0;    // evaluation site, nm
  double nx = 0, ny = 0;  // unit outward normal of the target edge
};

struct EpeRecord {
  std::uint32_t segment_id = 0;
  double epe_nm = 0.0;  // positive = printed edge outside target
  bool open = false;    // no contour crossing within the search radius
};

// Signed distance from each gauge along its outward normal to the first
// contour crossing within search_radius; ties between +t and -t resolve to
// the positive side. Missing crossings yield open records, never silent 0.
std::vector<EpeRecord> measure_epe(const ContourSet& contours,
                                   const std::vector<Gauge>& gauges,
                                   double search_radius_nm);

// read-only contour acceleration shared by EPE and defect scans
SegmentBvh build_contour_bvh(const ContourSet& contours);

enum class DefectKind { Pinch, Bridge, Pullback };

struct Defect {
  DefectKind kind;
  double x = 0, y = 0;       // nm
  double measured_nm = 0.0;  // width/space for pinch/bridge, 0 for pullback
  std::string note;
};

struct DefectLimits {
  double min_width_nm = 0.0;
  double min_space_nm = 0.0;
};

// Pinch: inward probe across a printed region finds a width < min_width.
// Bridge: one printed loop covers two or more distinct target polygons, or
// two distinct loops come closer than min_space. Pullback: open EPE records.
std::vector<Defect> detect_defects(const ContourSet& contours,
                                   const Layer& targets, double dbu_per_nm,
                                   const std::vector<EpeRecord>& epes,
                                   const std::vector<Gauge>& gauges,
                                   const DefectLimits& limits);

}  // namespace litho
