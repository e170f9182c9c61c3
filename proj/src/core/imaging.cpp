#include "imaging.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace litho {

// FFTW planning is not thread-safe; execution of ready plans is.
static std::mutex g_fftw_mutex;

void fft2(std::vector<cplx>& data, int nx, int ny, bool inverse) {
  if (int(data.size()) != nx * ny) throw std::invalid_argument("fft2: size mismatch");
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    plan = fftw_plan_dft_2d(ny, nx, reinterpret_cast<fftw_complex*>(data.data()),
                            reinterpret_cast<fftw_complex*>(data.data()),
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    fftw_destroy_plan(plan);
  }
}

void SourceMap::normalize() {
  double total = 0;
  for (const auto& p : points) total += p.weight;
  if (total <= 0) throw std::invalid_argument("SourceMap: nonpositive total weight");
  for (auto& p : points) p.weight /= total;
}

double SourceMap::max_radius() const {
  double r = 0;
  for (const auto& p : points) r = std::max(r, std::hypot(p.sx, p.sy));
  return r;
}

SourceMap make_circular_source(double sigma_out, int grid_n) {
  return make_annular_source(0.0, sigma_out, grid_n);
}

SourceMap make_annular_source(double sigma_in, double sigma_out, int grid_n) {
  if (sigma_out <= sigma_in || sigma_out <= 0)
    throw std::invalid_argument("annular source: need 0 <= sigma_in < sigma_out");
  SourceMap src;
  for (int iy = 0; iy < grid_n; ++iy) {
    for (int ix = 0; ix < grid_n; ++ix) {
      const double sx = -1.0 + (ix + 0.5) * 2.0 / grid_n;
      const double sy = -1.0 + (iy + 0.5) * 2.0 / grid_n;
      const double r = std::hypot(sx, sy);
      if (r >= sigma_in && r <= sigma_out) src.points.push_back({sx, sy, 1.0});
    }
  }
  src.normalize();
  return src;
}

SourceMap make_point_source() {
  SourceMap src;
  src.points.push_back({0.0, 0.0, 1.0});
  return src;
}

cplx OpticalModel::pupil(double fx, double fy, double focus_nm) const {
  const double f2 = fx * fx + fy * fy;
  const double fc = pupil_cutoff();
  if (f2 > fc * fc) return {0.0, 0.0};
  double phase;
  if (high_na_defocus) {
    const double s = 1.0 - wavelength_nm * wavelength_nm * f2;
    phase = (2.0 * M_PI * focus_nm / wavelength_nm) * (std::sqrt(std::max(s, 0.0)) - 1.0);
  } else {
    phase = -M_PI * wavelength_nm * focus_nm * f2;  // paraxial
  }
  return std::polar(1.0, phase);
}

MaskField MaskField::from_layer(const Layer& layer, const Grid& grid, double dbu_per_nm) {
  const std::vector<double> pix = rasterize_layer(layer, grid, dbu_per_nm);
  MaskField mf;
  mf.grid = grid;
  mf.values.assign(pix.begin(), pix.end());
  return mf;
}

MaskField MaskField::from_real(const Grid& grid, const std::vector<double>& v) {
  if (v.size() != grid.size()) throw std::invalid_argument("MaskField: size mismatch");
  MaskField mf;
  mf.grid = grid;
  mf.values.assign(v.begin(), v.end());
  return mf;
}

double TccMatrix::hermitian_residual() const {
  double r = 0;
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      r = std::max(r, std::abs(at(i, j) - std::conj(at(j, i))));
  return r;
}

static double freq_of(int k, int n, double pitch) { return double(k) / (double(n) * pitch); }

TccMatrix build_tcc(const OpticalModel& model, const Grid& grid, double focus_nm,
                    std::size_t max_dim) {
  TccMatrix tcc;
  tcc.grid = grid;
  tcc.focus_nm = focus_nm;
  const double fc = model.pupil_cutoff();
  const double fmax = (1.0 + model.source.max_radius()) * fc;
  for (int ky = 0; ky < grid.ny; ++ky) {
    for (int kx = 0; kx < grid.nx; ++kx) {
      const int skx = kx <= grid.nx / 2 ? kx : kx - grid.nx;
      const int sky = ky <= grid.ny / 2 ? ky : ky - grid.ny;
      const double fx = freq_of(skx, grid.nx, grid.pitch_nm);
      const double fy = freq_of(sky, grid.ny, grid.pitch_nm);
      if (fx * fx + fy * fy <= fmax * fmax * (1.0 + 1e-12))
        tcc.support.push_back({skx, sky});
    }
  }
  const std::size_t n = tcc.support.size();
  if (n > max_dim)
    throw std::runtime_error(
        "build_tcc: frequency support exceeds the dense-TCC budget; use the SOCS-only path "
        "on a coarser grid");
  tcc.m.assign(n * n, cplx{0, 0});
  // precompute shifted pupils per source point
  std::vector<cplx> shifted(n);
  for (const auto& sp : model.source.points) {
    const double ox = sp.sx * fc;
    const double oy = sp.sy * fc;
    for (std::size_t i = 0; i < n; ++i) {
      const double fx = freq_of(tcc.support[i].kx, grid.nx, grid.pitch_nm);
      const double fy = freq_of(tcc.support[i].ky, grid.ny, grid.pitch_nm);
      shifted[i] = model.pupil(fx + ox, fy + oy, focus_nm);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (shifted[i] == cplx{0, 0}) continue;
      const cplx wi = sp.weight * shifted[i];
      for (std::size_t j = 0; j < n; ++j)
        tcc.m[i * n + j] += wi * std::conj(shifted[j]);
    }
  }
  return tcc;
}

SocsKernelSet decompose_tcc(const TccMatrix& tcc, double energy_floor, int k_fixed) {
  const std::size_t n = tcc.dim();
  if (n == 0) throw std::invalid_argument("decompose_tcc: empty support");
  if (tcc.hermitian_residual() > 1e-9)
    throw std::invalid_argument("decompose_tcc: input not Hermitian within tolerance");
  Eigen::MatrixXcd h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = tcc.at(i, j);
  // enforce exact Hermitian symmetry before the solve
  h = (h + h.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("decompose_tcc: eigensolver failed");

  // descending order, clamp small negatives
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return solver.eigenvalues()(a) > solver.eigenvalues()(b);
  });
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += std::max(solver.eigenvalues()(i), 0.0);

  SocsKernelSet set;
  set.grid = tcc.grid;
  set.focus_nm = tcc.focus_nm;
  double captured = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const double lambda = std::max(solver.eigenvalues()(order[rank]), 0.0);
    if (k_fixed > 0) {
      if (int(rank) >= k_fixed) break;
    } else if (total > 0 && captured >= energy_floor * total && rank > 0) {
      break;
    }
    if (lambda <= 0 && rank > 0) break;
    Eigen::VectorXcd vec = solver.eigenvectors().col(order[rank]);
    // deterministic phase: largest-magnitude component real positive
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(vec(i)) > std::abs(vec(imax))) imax = i;
    if (std::abs(vec(imax)) > 0) vec *= std::conj(vec(imax)) / std::abs(vec(imax));

    std::vector<cplx> freq(set.grid.size(), cplx{0, 0});
    for (std::size_t i = 0; i < n; ++i) {
      const int kx = (tcc.support[i].kx + set.grid.nx) % set.grid.nx;
      const int ky = (tcc.support[i].ky + set.grid.ny) % set.grid.ny;
      freq[set.grid.index(kx, ky)] = vec(i);
    }
    std::vector<cplx> spatial = freq;
    fft2(spatial, set.grid.nx, set.grid.ny, true);
    const double inv = 1.0 / double(set.grid.size());
    for (auto& s : spatial) s *= inv;

    set.weights.push_back(lambda);
    set.kernels_freq.push_back(std::move(freq));
    set.kernels.push_back(std::move(spatial));
    captured += lambda;
  }
  set.captured_energy = total > 0 ? captured / total : 1.0;
  return set;
}

AerialImage image_socs(const MaskField& mask, const SocsKernelSet& kernels, double dose) {
  if (!(mask.grid == kernels.grid))
    throw std::invalid_argument("image_socs: mask and kernel grids differ");
  const Grid& g = mask.grid;
  std::vector<cplx> spectrum = mask.values;
  fft2(spectrum, g.nx, g.ny, false);
  const double inv_n = 1.0 / double(g.size());
  for (auto& s : spectrum) s *= inv_n;  // Fourier-series coefficients

  AerialImage img;
  img.grid = g;
  img.focus_nm = kernels.focus_nm;
  img.dose = dose;
  img.intensity.assign(g.size(), 0.0);
  std::vector<cplx> field(g.size());
  for (std::size_t k = 0; k < kernels.order(); ++k) {
    for (std::size_t i = 0; i < g.size(); ++i)
      field[i] = spectrum[i] * kernels.kernels_freq[k][i];
    fft2(field, g.nx, g.ny, true);  // unnormalized backward = sum over f
    const double w = kernels.weights[k] * dose;
    for (std::size_t i = 0; i < g.size(); ++i) img.intensity[i] += w * std::norm(field[i]);
  }
  return img;
}

AerialImage image_hopkins_direct(const MaskField& mask, const TccMatrix& tcc, double dose,
                                 std::size_t max_support) {
  if (!(mask.grid == tcc.grid))
    throw std::invalid_argument("image_hopkins_direct: grid mismatch");
  if (tcc.dim() > max_support)
    throw std::invalid_argument("image_hopkins_direct: support exceeds oracle limit");
  const Grid& g = mask.grid;
  std::vector<cplx> spectrum = mask.values;
  fft2(spectrum, g.nx, g.ny, false);
  const double inv_n = 1.0 / double(g.size());
  for (auto& s : spectrum) s *= inv_n;

  auto coeff = [&](const FreqIndex& f) {
    return spectrum[g.index((f.kx + g.nx) % g.nx, (f.ky + g.ny) % g.ny)];
  };
  // group the double sum by difference frequency, then synthesize
  std::vector<cplx> diff(g.size(), cplx{0, 0});
  const std::size_t n = tcc.dim();
  for (std::size_t i = 0; i < n; ++i) {
    const cplx oi = coeff(tcc.support[i]);
    if (oi == cplx{0, 0}) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const cplx c = oi * std::conj(coeff(tcc.support[j])) * tcc.at(i, j);
      const int dx = ((tcc.support[i].kx - tcc.support[j].kx) % g.nx + g.nx) % g.nx;
      const int dy = ((tcc.support[i].ky - tcc.support[j].ky) % g.ny + g.ny) % g.ny;
      diff[g.index(dx, dy)] += c;
    }
  }
  fft2(diff, g.nx, g.ny, true);
  AerialImage img;
  img.grid = g;
  img.focus_nm = tcc.focus_nm;
  img.dose = dose;
  img.intensity.resize(g.size());
  double max_im = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    max_im = std::max(max_im, std::abs(diff[i].imag()));
    img.intensity[i] = dose * diff[i].real();
  }
  if (max_im > 1e-8)
    throw std::runtime_error("image_hopkins_direct: non-negligible imaginary residue");
  return img;
}

std::vector<double> gaussian_blur(const Grid& g, const std::vector<double>& values,
                                  double sigma_nm) {
  if (sigma_nm < 0) throw std::invalid_argument("gaussian_blur: negative sigma");
  if (values.size() != g.size()) throw std::invalid_argument("gaussian_blur: size mismatch");
  if (sigma_nm == 0) return values;
  const double sigma_px = sigma_nm / g.pitch_nm;
  // unit-sum separable Gaussian built in the spatial domain, cyclic
  std::vector<cplx> kernel(g.size(), cplx{0, 0});
  double sum = 0;
  const int rx = std::min(g.nx / 2, int(std::ceil(6 * sigma_px)) + 1);
  const int ry = std::min(g.ny / 2, int(std::ceil(6 * sigma_px)) + 1);
  for (int dy = -ry; dy <= ry; ++dy) {
    for (int dx = -rx; dx <= rx; ++dx) {
      const double v = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma_px * sigma_px));
      kernel[g.index((dx + g.nx) % g.nx, (dy + g.ny) % g.ny)] += v;
      sum += v;
    }
  }
  for (auto& k : kernel) k /= sum;
  fft2(kernel, g.nx, g.ny, false);
  std::vector<cplx> field(values.begin(), values.end());
  fft2(field, g.nx, g.ny, false);
  for (std::size_t i = 0; i < g.size(); ++i) field[i] *= kernel[i] / double(g.size());
  fft2(field, g.nx, g.ny, true);
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = field[i].real();
  return out;
}

ResistImage resist_filter(const AerialImage& aerial, double sigma_nm, double threshold) {
  ResistImage out;
  out.grid = aerial.grid;
  out.focus_nm = aerial.focus_nm;
  out.threshold = threshold;
  out.values = gaussian_blur(aerial.grid, aerial.intensity, sigma_nm);
  return out;
}

double sample_bilinear(const Grid& g, const std::vector<double>& values, double x_nm,
                       double y_nm) {
  if (values.size() != g.size() || g.nx < 1 || g.ny < 1)
    throw std::invalid_argument("sample_bilinear: bad grid");
  const double fx = (x_nm - g.origin_x_nm) / g.pitch_nm - 0.5;
  const double fy = (y_nm - g.origin_y_nm) / g.pitch_nm - 0.5;
  const int ix = std::clamp(int(std::floor(fx)), 0, g.nx - 2 >= 0 ? g.nx - 2 : 0);
  const int iy = std::clamp(int(std::floor(fy)), 0, g.ny - 2 >= 0 ? g.ny - 2 : 0);
  const double tx = std::clamp(fx - ix, 0.0, 1.0);
  const double ty = std::clamp(fy - iy, 0.0, 1.0);
  const int ix1 = std::min(ix + 1, g.nx - 1), iy1 = std::min(iy + 1, g.ny - 1);
  const double v00 = values[g.index(ix, iy)], v10 = values[g.index(ix1, iy)];
  const double v01 = values[g.index(ix, iy1)], v11 = values[g.index(ix1, iy1)];
  return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 +
         tx * ty * v11;
}

}  // namespace litho
