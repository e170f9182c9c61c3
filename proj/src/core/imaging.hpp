#pragma once
// Partially coherent scalar imaging: TCC assembly on the band-limited
// frequency support, eigendecomposition into coherent kernels, fast
// aerial-image computation, a direct-summation oracle, and resist filtering.

#include <complex>
#include <vector>

#include "raster.hpp"

namespace litho {

using cplx = std::complex<double>;

struct SourcePoint {
  double sx = 0.0;  // pupil-normalized source coordinates
  double sy = 0.0;
  double weight = 0.0;
};

struct SourceMap {
  std::vector<SourcePoint> points;  // weights sum to 1

  void normalize();
  double max_radius() const;
};

SourceMap make_circular_source(double sigma_out, int grid_n = 21);
SourceMap make_annular_source(double sigma_in, double sigma_out, int grid_n = 21);
SourceMap make_point_source();

struct OpticalModel {
  double wavelength_nm = 13.5;
  double na = 0.33;
  SourceMap source = make_point_source();
  bool high_na_defocus = false;  // exact sqrt phase instead of paraxial
  double resist_sigma_nm = 2.0;
  double t_eff = 0.25;
  double tau_print = 0.25;
  double tau_round = 0.5;
  double dose = 1.0;

  double pupil_cutoff() const { return na / wavelength_nm; }  // cycles/nm

  // Complex pupil value at frequency (fx, fy) in cycles/nm, defocus F in nm.
  cplx pupil(double fx, double fy, double focus_nm) const;
};

struct MaskField {
  Grid grid;
  std::vector<cplx> values;  // row-major; [0,1] for thin-mask rasterization

  static MaskField from_layer(const Layer& layer, const Grid& grid, double dbu_per_nm);
  static MaskField from_real(const Grid& grid, const std::vector<double>& v);
};

struct FreqIndex {
  int kx, ky;  // signed DFT indices
};

struct TccMatrix {
  Grid grid;
  double focus_nm = 0.0;
  std::vector<FreqIndex> support;   // frequencies inside the extended cutoff
  std::vector<cplx> m;              // dense row-major |support| x |support|, Hermitian PSD

  std::size_t dim() const { return support.size(); }
  cplx at(std::size_t i, std::size_t j) const { return m[i * dim() + j]; }
  double hermitian_residual() const;
};

// Eq-style TCC: T(f1,f2;F) = sum_s S(s) P(f1+s;F) P*(f2+s;F). The frequency
// support is the DFT grid restricted to |f| <= (1+sigma_max) NA/lambda.
// max_dim guards the dense-matrix memory budget.
TccMatrix build_tcc(const OpticalModel& model, const Grid& grid, double focus_nm,
                    std::size_t max_dim = 6000);

struct SocsKernelSet {
  Grid grid;
  double focus_nm = 0.0;
  std::vector<double> weights;                 // descending, >= 0
  std::vector<std::vector<cplx>> kernels_freq; // full-grid frequency response
  std::vector<std::vector<cplx>> kernels;      // spatial kernels (inverse transform)
  double captured_energy = 1.0;                // fraction of total eigenvalue mass

  std::size_t order() const { return weights.size(); }
};

// Hermitian eigendecomposition, eigenvalues clamped at zero, truncated at
// the energy floor (or fixed K when k_fixed > 0). Deterministic phase:
// largest-magnitude eigenvector component is made real positive.
SocsKernelSet decompose_tcc(const TccMatrix& tcc, double energy_floor = 0.995,
                            int k_fixed = 0);

struct AerialImage {
  Grid grid;
  double focus_nm = 0.0;
  double dose = 1.0;
  std::vector<double> intensity;
};

// Sum of coherent systems: I = dose * sum_k w_k |O (x) Phi_k|^2, cyclic
// frequency-domain convolutions.
AerialImage image_socs(const MaskField& mask, const SocsKernelSet& kernels, double dose);

// Direct quadratic-cost evaluation of the Hopkins double integral over the
// TCC support. Intended as a small-grid oracle.
AerialImage image_hopkins_direct(const MaskField& mask, const TccMatrix& tcc, double dose,
                                 std::size_t max_support = 4096);

struct ResistImage {
  Grid grid;
  double focus_nm = 0.0;
  double threshold = 0.0;
  std::vector<double> values;  // aerial image after resist blur
};

// Gaussian blur with a unit-sum kernel (sigma 0 = identity); threshold is
// carried along for downstream contour extraction.
ResistImage resist_filter(const AerialImage& aerial, double sigma_nm, double threshold);

// --- small FFT helpers shared with ai-bridge ------------------------------

void fft2(std::vector<cplx>& data, int nx, int ny, bool inverse);

// cyclic unit-sum Gaussian blur on a real grid; sigma 0 = identity
std::vector<double> gaussian_blur(const Grid& grid, const std::vector<double>& values,
                                  double sigma_nm);

// bilinear sample between pixel centers, clamped at the border
double sample_bilinear(const Grid& grid, const std::vector<double>& values,
                       double x_nm, double y_nm);

}  // namespace litho
