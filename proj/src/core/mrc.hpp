#pragma once
// Mask rule checking (the eight rule families) and MRC-constrained move
// limiting with order-independent, bias-free semantics.

#include <array>
#include <vector>

#include "geometry.hpp"
#include "segment.hpp"

namespace litho {

enum class MrcRule {
  MinSpace = 0,
  MinWidth,
  MinInternalC2c,
  MinExternalC2c,
  MinNotch,
  MinNub,
  MinJog,
  MinArea,
};

const char* mrc_rule_name(MrcRule r);

struct MrcRuleSet {
  // dbu; 0 disables a rule
  coord_t min_space = 0;
  coord_t min_width = 0;
  coord_t min_internal_c2c = 0;
  coord_t min_external_c2c = 0;
  coord_t min_notch = 0;
  coord_t min_nub = 0;
  coord_t min_jog = 0;
  wide_t min_area = 0;  // dbu^2

  coord_t max_linear() const;
};

struct MrcViolation {
  MrcRule rule;
  double measured;  // dbu (Euclidean for corner rules, area in dbu^2)
  std::uint32_t poly_a = 0;
  std::uint32_t poly_b = 0;
  Point location;
};

struct MrcHistogram {
  // measured/threshold ratios for every check within 2x the threshold
  std::array<std::vector<double>, 8> ratios;
};

struct MrcReport {
  std::vector<MrcViolation> violations;
  MrcHistogram histogram;
  bool clean() const { return violations.empty(); }
};

// Complete scan over a normalized Manhattan layer. Facing parallel edges
// with overlapping projections measure space (different loops), notch (same
// loop), or width (material between); diagonal corner pairs measure the
// C2C rules; jogs and nubs come from per-polygon turn patterns; min_area
// applies to outer (positive) polygons. Closed boundary: measured >=
// threshold is clean.
MrcReport check_rules(const Layer& layer, const MrcRuleSet& rules);

struct MoveLimit {
  std::uint32_t segment_id = 0;
  coord_t proposed = 0;
  coord_t allowed = 0;
  MrcRule binding_rule = MrcRule::MinSpace;
  std::int64_t neighbor = -1;  // segment id of the binding interaction
  bool clamped = false;
};

// Two-phase deterministic limiter: per-pair slack budgets split between the
// partners (proportional to demand, odd dbu to the canonically lower
// segment), then a per-segment min-reduction. Jog joints snap to equal
// offsets when a residual jog would fall below min_jog; a min_area veto
// scales inward moves back; a final verification pass guarantees the
// post-move layout re-checks clean. Output is independent of segment order
// and mirror-symmetric for symmetric inputs.
// Throws if the input mask already violates the rules.
std::vector<MoveLimit> limit_moves(const SegmentedMask& mask,
                                   const std::vector<coord_t>& proposed,
                                   const MrcRuleSet& rules);

// Convenience: apply the allowed moves to a copy of the mask.
SegmentedMask apply_moves(const SegmentedMask& mask,
                          const std::vector<MoveLimit>& limits);

}  // namespace litho
