#include "ai.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "contour.hpp"

namespace litho {

std::vector<double> intensity_gradient(const MaskField& mask,
                                       const SocsKernelSet& kernels, double dose) {
  if (!(mask.grid == kernels.grid))
    throw std::invalid_argument("intensity_gradient: grid mismatch");
  for (const auto& v : mask.values)
    if (v.imag() != 0.0)
      throw std::invalid_argument("intensity_gradient: complex mask unsupported");
  const Grid& g = mask.grid;
  const std::size_t sz = g.size();
  std::vector<cplx> spectrum = mask.values;
  fft2(spectrum, g.nx, g.ny, false);
  const double inv_n = 1.0 / double(sz);
  for (auto& s : spectrum) s *= inv_n;

  std::vector<double> grad(sz, 0.0);
  std::vector<cplx> field(sz), corr(sz);
  for (std::size_t k = 0; k < kernels.order(); ++k) {
    // amplitude A_k, same normalization as image_socs
    for (std::size_t i = 0; i < sz; ++i)
      field[i] = spectrum[i] * kernels.kernels_freq[k][i];
    fft2(field, g.nx, g.ny, true);
    // correlation of A_k with the spatial kernel, via the frequency domain
    corr = field;
    fft2(corr, g.nx, g.ny, false);
    for (std::size_t i = 0; i < sz; ++i)
      corr[i] *= std::conj(kernels.kernels_freq[k][i]) * inv_n;
    fft2(corr, g.nx, g.ny, true);
    const double w = 2.0 * kernels.weights[k] * dose;
    for (std::size_t i = 0; i < sz; ++i) grad[i] += w * corr[i].real();
  }
  return grad;
}

namespace {

ChannelNorm normalize_channel(std::vector<double>& v) {
  double lo = v.empty() ? 0.0 : v[0], hi = lo;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  ChannelNorm n;
  n.offset = lo;
  n.scale = hi > lo ? 1.0 / (hi - lo) : 1.0;
  for (double& x : v) x = (x - n.offset) * n.scale;
  return n;
}

}  // namespace

FieldTensor build_field_tensor(const Layer& target, double dbu_per_nm,
                               const OpticalModel& model,
                               const SocsKernelSet& kernels, const Grid& grid) {
  FieldTensor t;
  t.grid = grid;
  t.m0 = rasterize_layer(target, grid, dbu_per_nm);
  const MaskField mf = MaskField::from_real(grid, t.m0);
  const AerialImage img = image_socs(mf, kernels, model.dose);
  t.i0 = img.intensity;
  t.norm_i0 = normalize_channel(t.i0);
  t.grad = intensity_gradient(mf, kernels, model.dose);
  t.norm_grad = normalize_channel(t.grad);
  return t;
}

std::vector<double> z_round(const Grid& grid, const std::vector<double>& target_raster,
                            double sigma_nm, double tau_round) {
  if (!(tau_round > 0 && tau_round < 1))
    throw std::invalid_argument("z_round: tau outside (0,1)");
  std::vector<double> blurred = gaussian_blur(grid, target_raster, sigma_nm);
  for (double& v : blurred) v = v >= tau_round ? 1.0 : 0.0;
  return blurred;
}

std::vector<double> z_print(const ContinuousMaskField& field,
                            const SocsKernelSet& kernels, double dose,
                            double tau_print) {
  const MaskField mf = MaskField::from_real(field.grid, field.values);
  const AerialImage img = image_socs(mf, kernels, dose);
  std::vector<double> out(img.intensity.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = img.intensity[i] >= tau_print ? 1.0 : 0.0;
  return out;
}

Losses compute_losses(const ContinuousMaskField& m_c,
                      const std::vector<double>& reference_mask,
                      const std::vector<double>& zround,
                      const SocsKernelSet& kernels, double dose, double tau_print) {
  const std::size_t sz = m_c.grid.size();
  if (m_c.values.size() != sz || reference_mask.size() != sz || zround.size() != sz)
    throw std::invalid_argument("compute_losses: shape mismatch");
  Losses l;
  for (std::size_t i = 0; i < sz; ++i)
    l.mask_l1 += std::abs(m_c.values[i] - reference_mask[i]);
  const std::vector<double> zp = z_print(m_c, kernels, dose, tau_print);
  for (std::size_t i = 0; i < sz; ++i) l.litho_l1 += std::abs(zp[i] - zround[i]);
  l.mask_l1_mean = l.mask_l1 / double(sz);
  l.litho_l1_mean = l.litho_l1 / double(sz);
  return l;
}

SegmentMoves extract_segment_moves(const ContinuousMaskField& field,
                                   const SegmentedMask& base,
                                   double binarize_threshold,
                                   double search_radius_nm) {
  ResistImage binary;
  binary.grid = field.grid;
  binary.threshold = 0.5;
  binary.values.resize(field.values.size());
  for (std::size_t i = 0; i < field.values.size(); ++i)
    binary.values[i] = field.values[i] >= binarize_threshold ? 1.0 : 0.0;
  const ContourSet contours = marching_squares(binary, 0.5);
  const std::vector<Gauge> gauges = make_gauges(base);
  const std::vector<EpeRecord> recs = measure_epe(contours, gauges, search_radius_nm);
  SegmentMoves moves;
  moves.ds_nm.resize(recs.size(), 0.0);
  moves.warned.resize(recs.size(), false);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].open) {
      moves.warned[i] = true;
    } else {
      moves.ds_nm[i] = recs[i].epe_nm;
    }
  }
  return moves;
}

SegmentedMask apply_segment_moves(const SegmentedMask& base,
                                  const std::vector<double>& ds_nm,
                                  const MrcRuleSet& rules) {
  if (ds_nm.size() != base.segments.size())
    throw std::invalid_argument("apply_segment_moves: size mismatch");
  std::vector<coord_t> proposed(ds_nm.size());
  for (std::size_t i = 0; i < ds_nm.size(); ++i) {
    if (!std::isfinite(ds_nm[i]))
      throw std::invalid_argument("apply_segment_moves: non-finite move");
    proposed[i] = coord_t(std::llround(ds_nm[i] * base.dbu_per_nm));
  }
  // iterate the limiter to its fixed point: the per-pair slack split is
  // conservative, so large moves that are jointly feasible need several passes
  SegmentedMask out = base;
  for (int pass = 0; pass < 8; ++pass) {
    std::vector<coord_t> residual(proposed.size(), 0);
    bool pending = false;
    for (std::size_t i = 0; i < proposed.size(); ++i) {
      residual[i] = proposed[i] - out.segments[i].offset;
      pending = pending || residual[i] != 0;
    }
    if (!pending) break;
    const std::vector<MoveLimit> limits = limit_moves(out, residual, rules);
    bool moved = false;
    for (const auto& l : limits) moved = moved || l.allowed != 0;
    if (!moved) break;
    out = apply_moves(out, limits);
  }
  return out;
}

}  // namespace litho
