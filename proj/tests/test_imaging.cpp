#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "core/imaging.hpp"
#include "helpers.hpp"

using namespace litho;

namespace {

OpticalModel euv_model(double sigma_in = 0.4, double sigma_out = 0.8, int n = 7) {
  OpticalModel m;
  m.wavelength_nm = 13.5;
  m.na = 0.33;
  m.source = make_annular_source(sigma_in, sigma_out, n);
  return m;
}

std::vector<double> random_mask(std::mt19937_64& rng, const Grid& g) {
  std::vector<double> v(g.size());
  for (auto& x : v) x = litho::test::frand(rng, 0.0, 1.0);
  return v;
}

double rel_linf(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0 ? diff / scale : diff;
}

}  // namespace

TEST_CASE("source maps") {
  const SourceMap pt = make_point_source();
  REQUIRE(pt.points.size() == 1);
  CHECK(pt.points[0].weight == 1.0);
  CHECK(pt.max_radius() == 0.0);

  const SourceMap ann = make_annular_source(0.4, 0.8, 21);
  double total = 0;
  for (const auto& p : ann.points) {
    total += p.weight;
    const double r = std::hypot(p.sx, p.sy);
    CHECK(r >= 0.4);
    CHECK(r <= 0.8);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ann.max_radius() <= 0.8);

  const SourceMap circ = make_circular_source(0.5, 21);
  for (const auto& p : circ.points) CHECK(std::hypot(p.sx, p.sy) <= 0.5);

  CHECK_THROWS(make_annular_source(0.8, 0.4));
  CHECK_THROWS(make_annular_source(0.5, 0.5));
}

TEST_CASE("pupil cutoff and defocus phase") {
  OpticalModel m;
  m.wavelength_nm = 13.5;
  m.na = 0.33;
  const double fc = m.pupil_cutoff();
  CHECK(fc == doctest::Approx(0.33 / 13.5).epsilon(1e-15));

  CHECK(m.pupil(0, 0, 0.0) == cplx{1.0, 0.0});
  CHECK(std::abs(m.pupil(0.99 * fc, 0, 0.0)) == doctest::Approx(1.0));
  CHECK(m.pupil(1.01 * fc, 0, 0.0) == cplx{0.0, 0.0});
  CHECK(m.pupil(0.8 * fc, 0.8 * fc, 0.0) == cplx{0.0, 0.0});  // corner outside

  // paraxial: P = exp(-i pi lambda F |f|^2)
  const double f = 0.5 * fc, F = 40.0;
  const cplx want = std::polar(1.0, -M_PI * m.wavelength_nm * F * f * f);
  CHECK(std::abs(m.pupil(f, 0, F) - want) < 1e-12);
  // conjugate at opposite defocus
  CHECK(std::abs(m.pupil(f, 0, -F) - std::conj(want)) < 1e-12);

  // high-NA phase reduces to paraxial for small f
  m.high_na_defocus = true;
  const double fs = 0.02 * fc;
  const cplx hi = m.pupil(fs, 0, F);
  const cplx par = std::polar(1.0, -M_PI * m.wavelength_nm * F * fs * fs);
  CHECK(std::abs(hi - par) < 1e-6);
}

TEST_CASE("TCC matches triple-loop oracle, Hermitian, PSD") {
  const OpticalModel m = euv_model(0.4, 0.8, 3);  // 9-candidate source grid
  const Grid g{16, 16, 4.0, 0.0, 0.0};
  const double focus = 25.0;
  const TccMatrix tcc = build_tcc(m, g, focus);
  REQUIRE(tcc.dim() > 4);
  CHECK(tcc.hermitian_residual() < 1e-12);

  // independent support: every signed DFT index within the extended cutoff
  const double fc = m.pupil_cutoff();
  const double fmax = (1.0 + m.source.max_radius()) * fc;
  std::size_t count = 0;
  for (int ky = -g.ny / 2 + 1; ky <= g.ny / 2; ++ky)
    for (int kx = -g.nx / 2 + 1; kx <= g.nx / 2; ++kx) {
      const double fx = kx / (g.nx * g.pitch_nm);
      const double fy = ky / (g.ny * g.pitch_nm);
      if (fx * fx + fy * fy <= fmax * fmax * (1.0 + 1e-12)) ++count;
    }
  CHECK(count == tcc.dim());

  // oracle: T(f1,f2) = sum_s S(s) P(f1 + s fc) conj(P(f2 + s fc))
  for (std::size_t i = 0; i < tcc.dim(); ++i) {
    const double f1x = tcc.support[i].kx / (g.nx * g.pitch_nm);
    const double f1y = tcc.support[i].ky / (g.ny * g.pitch_nm);
    for (std::size_t j = 0; j < tcc.dim(); ++j) {
      const double f2x = tcc.support[j].kx / (g.nx * g.pitch_nm);
      const double f2y = tcc.support[j].ky / (g.ny * g.pitch_nm);
      cplx want{0, 0};
      for (const auto& sp : m.source.points)
        want += sp.weight * m.pupil(f1x + sp.sx * fc, f1y + sp.sy * fc, focus) *
                std::conj(m.pupil(f2x + sp.sx * fc, f2y + sp.sy * fc, focus));
      CHECK(std::abs(tcc.at(i, j) - want) < 1e-12);
    }
  }

  Eigen::MatrixXcd h(tcc.dim(), tcc.dim());
  for (std::size_t i = 0; i < tcc.dim(); ++i)
    for (std::size_t j = 0; j < tcc.dim(); ++j) h(i, j) = tcc.at(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver((h + h.adjoint()) / 2.0);
  const double lmin = solver.eigenvalues().minCoeff();
  const double lmax = solver.eigenvalues().maxCoeff();
  CHECK(lmax > 0);
  CHECK(lmin >= -1e-10 * lmax);
}

TEST_CASE("SOCS decomposition properties") {
  const OpticalModel m = euv_model();
  const Grid g{16, 16, 4.0, 0.0, 0.0};
  const TccMatrix tcc = build_tcc(m, g, 0.0);

  const SocsKernelSet full = decompose_tcc(tcc, 1.0, int(tcc.dim()));
  CHECK(full.captured_energy == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t k = 0; k < full.order(); ++k) {
    CHECK(full.weights[k] >= 0.0);
    if (k > 0) CHECK(full.weights[k] <= full.weights[k - 1]);
  }

  const SocsKernelSet one = decompose_tcc(tcc, 0.995, 1);
  CHECK(one.order() == 1);
  CHECK(one.captured_energy <= 1.0);

  const SocsKernelSet floor95 = decompose_tcc(tcc, 0.95);
  CHECK(floor95.captured_energy >= 0.95);
  CHECK(floor95.order() <= full.order());
}

TEST_CASE("full-rank SOCS equals direct Hopkins") {
  std::mt19937_64 rng(41);
  const OpticalModel m = euv_model();
  for (const int n : {12, 16, 24}) {
    const Grid g{n, n, 4.0, 0.0, 0.0};
    for (const double focus : {0.0, 30.0}) {
      const TccMatrix tcc = build_tcc(m, g, focus);
      const SocsKernelSet set = decompose_tcc(tcc, 1.0, int(tcc.dim()));
      const MaskField mask = MaskField::from_real(g, random_mask(rng, g));
      const AerialImage fast = image_socs(mask, set, 1.0);
      const AerialImage slow = image_hopkins_direct(mask, tcc, 1.0);
      CHECK(rel_linf(fast.intensity, slow.intensity) < 1e-6);
    }
  }
}

TEST_CASE("dose linearity") {
  std::mt19937_64 rng(43);
  const OpticalModel m = euv_model();
  const Grid g{16, 16, 4.0, 0.0, 0.0};
  const TccMatrix tcc = build_tcc(m, g, 0.0);
  const SocsKernelSet set = decompose_tcc(tcc);
  const MaskField mask = MaskField::from_real(g, random_mask(rng, g));
  const AerialImage one = image_socs(mask, set, 1.0);
  const AerialImage two = image_socs(mask, set, 2.0);
  for (std::size_t i = 0; i < one.intensity.size(); ++i)
    CHECK(two.intensity[i] == doctest::Approx(2.0 * one.intensity[i]).epsilon(1e-12));
}

TEST_CASE("clear field is flat at the dose") {
  const OpticalModel m = euv_model();
  const Grid g{24, 24, 4.0, 0.0, 0.0};
  const TccMatrix tcc = build_tcc(m, g, 0.0);
  const SocsKernelSet set = decompose_tcc(tcc, 1.0, int(tcc.dim()));
  const MaskField clear = MaskField::from_real(g, std::vector<double>(g.size(), 1.0));
  const AerialImage img = image_socs(clear, set, 1.3);
  // every source point sits inside the pupil, so I = dose everywhere
  for (const double v : img.intensity) CHECK(std::abs(v - 1.3) < 1e-6);
}

TEST_CASE("translation equivariance") {
  std::mt19937_64 rng(47);
  const OpticalModel m = euv_model();
  const Grid g{16, 16, 4.0, 0.0, 0.0};
  const TccMatrix tcc = build_tcc(m, g, 0.0);
  const SocsKernelSet set = decompose_tcc(tcc, 1.0, int(tcc.dim()));
  const std::vector<double> v = random_mask(rng, g);
  const int sx = 3, sy = 5;
  std::vector<double> shifted(g.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      shifted[g.index((ix + sx) % g.nx, (iy + sy) % g.ny)] = v[g.index(ix, iy)];
  const AerialImage base = image_socs(MaskField::from_real(g, v), set, 1.0);
  const AerialImage moved = image_socs(MaskField::from_real(g, shifted), set, 1.0);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      CHECK(moved.intensity[g.index((ix + sx) % g.nx, (iy + sy) % g.ny)] ==
            doctest::Approx(base.intensity[g.index(ix, iy)]).epsilon(1e-9));
}

TEST_CASE("paraxial defocus symmetry for real masks") {
  std::mt19937_64 rng(53);
  const OpticalModel m = euv_model();
  const Grid g{16, 16, 4.0, 0.0, 0.0};
  const MaskField mask = MaskField::from_real(g, random_mask(rng, g));
  const AerialImage plus =
      image_hopkins_direct(mask, build_tcc(m, g, 40.0), 1.0);
  const AerialImage minus =
      image_hopkins_direct(mask, build_tcc(m, g, -40.0), 1.0);
  CHECK(rel_linf(plus.intensity, minus.intensity) < 1e-9);
  // and defocus genuinely differs from focus
  const AerialImage focus = image_hopkins_direct(mask, build_tcc(m, g, 0.0), 1.0);
  CHECK(rel_linf(plus.intensity, focus.intensity) > 1e-4);
}

TEST_CASE("gaussian blur: identity, mass, direct oracle") {
  std::mt19937_64 rng(59);
  const Grid g{16, 12, 2.0, 0.0, 0.0};
  const std::vector<double> v = random_mask(rng, g);

  CHECK(gaussian_blur(g, v, 0.0) == v);

  const std::vector<double> flat(g.size(), 0.7);
  for (const double x : gaussian_blur(g, flat, 3.0))
    CHECK(x == doctest::Approx(0.7).epsilon(1e-12));

  // cyclic direct convolution with the same truncated unit-sum kernel
  const double sigma_nm = 2.5, sp = sigma_nm / g.pitch_nm;
  const int rx = std::min(g.nx / 2, int(std::ceil(6 * sp)) + 1);
  const int ry = std::min(g.ny / 2, int(std::ceil(6 * sp)) + 1);
  std::vector<double> want(g.size(), 0.0);
  double norm = 0;
  for (int dy = -ry; dy <= ry; ++dy)
    for (int dx = -rx; dx <= rx; ++dx)
      norm += std::exp(-0.5 * (dx * dx + dy * dy) / (sp * sp));
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      double acc = 0;
      for (int dy = -ry; dy <= ry; ++dy)
        for (int dx = -rx; dx <= rx; ++dx) {
          const double w = std::exp(-0.5 * (dx * dx + dy * dy) / (sp * sp)) / norm;
          acc += w * v[g.index(((ix - dx) % g.nx + g.nx) % g.nx,
                               ((iy - dy) % g.ny + g.ny) % g.ny)];
        }
      want[g.index(ix, iy)] = acc;
    }
  const std::vector<double> got = gaussian_blur(g, v, sigma_nm);
  CHECK(rel_linf(got, want) < 1e-10);

  double sv = 0, sg = 0;
  for (std::size_t i = 0; i < v.size(); ++i) sv += v[i], sg += got[i];
  CHECK(sg == doctest::Approx(sv).epsilon(1e-10));

  CHECK_THROWS(gaussian_blur(g, v, -1.0));
}

TEST_CASE("resist filter carries threshold") {
  const Grid g{8, 8, 2.0, 0.0, 0.0};
  AerialImage a;
  a.grid = g;
  a.focus_nm = 15.0;
  a.dose = 1.0;
  a.intensity.assign(g.size(), 0.4);
  const ResistImage r = resist_filter(a, 0.0, 0.3);
  CHECK(r.threshold == 0.3);
  CHECK(r.focus_nm == 15.0);
  CHECK(r.values == a.intensity);
}

TEST_CASE("bilinear sampling") {
  const Grid g{4, 4, 2.0, 10.0, 20.0};
  std::vector<double> v(g.size());
  for (int iy = 0; iy < 4; ++iy)
    for (int ix = 0; ix < 4; ++ix) v[g.index(ix, iy)] = ix + 10.0 * iy;

  // pixel center (ix, iy) at origin + (i + 0.5) * pitch
  CHECK(sample_bilinear(g, v, 10.0 + 2.0 * 0.5, 20.0 + 2.0 * 0.5) == doctest::Approx(0.0));
  CHECK(sample_bilinear(g, v, 10.0 + 2.0 * 2.5, 20.0 + 2.0 * 1.5) == doctest::Approx(12.0));
  // midpoint between (1,1) and (2,1)
  CHECK(sample_bilinear(g, v, 10.0 + 2.0 * 2.0, 20.0 + 2.0 * 1.5) == doctest::Approx(11.5));
  // bilinear on a linear field is exact anywhere in the interior
  CHECK(sample_bilinear(g, v, 10.0 + 2.0 * 1.75, 20.0 + 2.0 * 2.25) ==
        doctest::Approx(1.25 + 10.0 * 1.75));
  // clamped outside
  CHECK(sample_bilinear(g, v, -100.0, -100.0) == doctest::Approx(0.0));
  CHECK(sample_bilinear(g, v, 1000.0, 1000.0) == doctest::Approx(33.0));
}
