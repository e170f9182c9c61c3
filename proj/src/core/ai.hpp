#pragma once
// Training-tensor channel construction, printability references and losses,
// the analytic intensity gradient, and the continuous-field to segment-move
// bridge with MRC-clean round-trip application.

#include <vector>

#include "imaging.hpp"
#include "mrc.hpp"
#include "segment.hpp"

namespace litho {

struct ChannelNorm {
  double offset = 0.0;  // value mapped to 0
  double scale = 1.0;   // multiplier after the offset
};

struct FieldTensor {
  Grid grid;
  std::vector<double> m0;    // rasterized target, [0,1]
  std::vector<double> i0;    // normalized best-focus intensity
  std::vector<double> grad;  // normalized intensity-vs-mask sensitivity
  ChannelNorm norm_i0, norm_grad;  // affine maps applied to reach [0,1]
};

struct ContinuousMaskField {
  Grid grid;
  std::vector<double> values;  // [0,1] generator-output stand-in
};

// Analytic adjoint of the SOCS image: d(sum_r I(r))/dM(x). Matches central
// finite differences within 1e-4 relative L-inf.
std::vector<double> intensity_gradient(const MaskField& mask,
                                       const SocsKernelSet& kernels, double dose);

FieldTensor build_field_tensor(const Layer& target, double dbu_per_nm,
                               const OpticalModel& model,
                               const SocsKernelSet& kernels, const Grid& grid);

// Gaussian-rounded printability reference (binary {0,1}).
std::vector<double> z_round(const Grid& grid, const std::vector<double>& target_raster,
                            double sigma_nm, double tau_round);

// Thresholded best-focus image of a continuous mask field (binary {0,1}).
std::vector<double> z_print(const ContinuousMaskField& field,
                            const SocsKernelSet& kernels, double dose,
                            double tau_print);

struct Losses {
  double mask_l1 = 0.0;        // unnormalized L1 vs the reference mask
  double mask_l1_mean = 0.0;   // per-pixel mean
  double litho_l1 = 0.0;       // |z_print - z_round| L1
  double litho_l1_mean = 0.0;
};

Losses compute_losses(const ContinuousMaskField& m_c,
                      const std::vector<double>& reference_mask,
                      const std::vector<double>& zround,
                      const SocsKernelSet& kernels, double dose, double tau_print);

struct SegmentMoves {
  std::vector<double> ds_nm;   // per segment, along the outward normal
  std::vector<bool> warned;    // no contour found within the search radius
};

// Binarize, extract contours, measure per-segment normal displacements.
SegmentMoves extract_segment_moves(const ContinuousMaskField& field,
                                   const SegmentedMask& base,
                                   double binarize_threshold,
                                   double search_radius_nm);

// Offsets set to round(ds) and clamped through mrc.limit_moves.
SegmentedMask apply_segment_moves(const SegmentedMask& base,
                                  const std::vector<double>& ds_nm,
                                  const MrcRuleSet& rules);

}  // namespace litho
