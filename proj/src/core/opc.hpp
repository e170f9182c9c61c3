#pragma once
// Iterative OPC: through-focus EPE aggregation, MEEF-fed feedback moves,
// MRC gating, convergence control, and the line-end strategies
// (hammerheads, tip retargeting, lateral locking, driver masks).

#include <optional>
#include <string>
#include <vector>

#include "contour.hpp"
#include "imaging.hpp"
#include "mrc.hpp"
#include "segment.hpp"

namespace litho {

struct FocusSet {
  double f0 = 0.0;    // nm, best focus
  double fp = 40.0;   // positive defocus
  double fn = -40.0;  // negative defocus
};

struct OpcConfig {
  FocusSet focus;
  double dose = 1.0;
  double tol_pos_nm = 1.0;
  double tol_neg_nm = -1.0;
  int max_iterations = 16;
  double convergence_nm = 0.5;
  double gain = 1.0;
  double meef_min = 0.25;
  double meef_max = 10.0;
  double max_step_nm = 2.0;
  double seg_length_nm = 20.0;
  double search_radius_nm = 30.0;
  int meef_refresh = 4;          // iterations between finite-difference passes
  double meef_probe_nm = 1.0;
  double meef_batch_radius_nm = 200.0;  // simultaneous probes beyond this gap
  bool through_focus = true;     // false: tolerance branches only, no averaging

  bool hammerhead = false;
  double head_width_nm = 2.0;
  double head_length_nm = 2.0;
  double retarget_pullback_nm = 0.0;  // 0 disables tip retargeting

  bool lateral_lock = true;
  double short_line_nm = 50.0;

  bool drop_fn_line_ends = false;     // fn excluded from line-end EPE averaging
  bool drop_fn_extends_meef = false;  // reserved: extend the exclusion to MEEF

  double driver_mask_radius_nm = 0.0;     // 0 disables driver masking
  double driver_mask_min_width_nm = 0.0;  // "features wider than W"

  double guard_band_nm = 24.0;
  double pitch_nm = 1.0;
  double energy_floor = 0.995;
};

struct ConditionStats {
  double max_abs = 0.0;
  double mean = 0.0;
  double rms = 0.0;
  int open_count = 0;
};

struct IterationReport {
  int iteration = 0;
  ConditionStats f0, fp, fn;
  double max_abs_eff = 0.0;
  int clamp_count = 0;
  int moved_count = 0;
  bool converged = false;
  double gain = 0.0;
};

struct OpcResult {
  SegmentedMask mask;
  Layer corrected;
  std::vector<IterationReport> reports;
  bool converged = false;
  std::string diagnostic;
};

// Eq-style flexible window: outside [tol_neg, tol_pos] at best focus the
// tolerance-shifted on-focus error wins; inside, the three-condition average
// (fn dropped when excluded).
double effective_epe(double epe_f0, double epe_fp, double epe_fn, double tol_pos,
                     double tol_neg, bool drop_fn = false);

// Line-end edges pulled inward by pullback nm. Errors if a feature would
// collapse below 1 dbu.
Layer retarget_tips(const Layer& layer, double dbu_per_nm, double pullback_nm);

// Controller law: -gain * epe_eff / meef, step-clamped.
double propose_move_nm(double epe_eff, double meef, double gain, double max_step_nm);

// Pre-computed optics shared across iterations and foci.
struct OpcOptics {
  Grid grid;
  std::vector<SocsKernelSet> kernels;  // f0, fp, fn
  OpticalModel model;
};

// Grid covering the layer bbox plus a guard band on every side.
Grid make_window(const Layer& layer, double dbu_per_nm, double pitch_nm,
                 double guard_nm);

OpcOptics build_optics(const Layer& target, double dbu_per_nm,
                       const OpticalModel& model, const OpcConfig& config);

// T_eff such that the target prints on its own edges: mean best-focus resist
// value over the target-edge gauges of the rasterized target.
double calibrate_threshold(const Layer& target, double dbu_per_nm,
                           const OpcOptics& optics, double seg_length_nm);

// One imaging pass of the current mask at one focus.
struct EpeEval {
  std::vector<EpeRecord> records;
  ResistImage resist;
};
EpeEval evaluate_epe(const SegmentedMask& mask, const std::vector<Gauge>& gauges,
                     const OpcOptics& optics, std::size_t focus_index,
                     double search_radius_nm);

// Batched best-focus finite differences, clamped to [meef_min, meef_max];
// driver-masked segments pinned at 1, open post-probe records at meef_max.
std::vector<double> estimate_meef(const SegmentedMask& mask,
                                  const std::vector<Gauge>& gauges,
                                  const OpcOptics& optics,
                                  const std::vector<EpeRecord>& base,
                                  const OpcConfig& config);

// Hammerhead pre-decoration: line-end segments pushed out by head_length,
// flanking corner pieces by head_width, clamped through limit_moves.
SegmentedMask hammerhead_init(const SegmentedMask& mask, const MrcRuleSet& rules,
                              double head_width_nm, double head_length_nm);

OpcResult run_opc(const Layer& target, double dbu_per_nm, const OpticalModel& model,
                  const MrcRuleSet& rules, const OpcConfig& config,
                  const std::vector<coord_t>* init_offsets = nullptr);

}  // namespace litho
