// Acceptance gate: twelve property checks over the whole pipeline, one
// pass/fail line each. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core/ai.hpp"
#include "core/bench.hpp"
#include "core/bvh.hpp"
#include "core/contour.hpp"
#include "core/imaging.hpp"
#include "core/mrc.hpp"
#include "core/opc.hpp"
#include "core/segment.hpp"
#include "helpers.hpp"

using namespace litho;
using litho::test::rect;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void verdict(int n, const char* what, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s (%s)\n", n, ok ? "PASS" : "FAIL", what,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------- criterion 1

void criterion_boolean() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<coord_t> delta(-3, 5);
  int trials = 0, bad = 0;
  for (int t = 0; t < 200; ++t) {
    const Layer a = test::random_rect_layer(rng, 100);
    const Layer b = test::random_rect_layer(rng, 100);
    for (const BoolOpKind op : {BoolOpKind::AND, BoolOpKind::OR, BoolOpKind::NOT,
                                BoolOpKind::XOR, BoolOpKind::TOUCH}) {
      ++trials;
      if (!test::boolean_pixel_oracle_ok(op, a, &b)) ++bad;
    }
    ++trials;
    if (!test::boolean_pixel_oracle_ok(BoolOpKind::HEAL, a, nullptr)) ++bad;
    ++trials;
    if (!test::boolean_pixel_oracle_ok(BoolOpKind::SIZE, a, nullptr, delta(rng)))
      ++bad;
  }
  const double dt = seconds_since(t0);
  verdict(1, "boolean ops equal the pixel oracle on 200 random layouts",
          bad == 0 && dt <= 300.0,
          fmt("%.0f op checks, %.0f mismatches, %.1f s", trials, bad, dt));
}

// ---------------------------------------------------------------- criterion 2

void criterion_bvh_oracles() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<coord_t> pos(0, 4000), side(1, 120);
  int mismatches = 0, builds_bad = 0;

  std::vector<Aabb> boxes;
  for (int i = 0; i < 1000; ++i) {
    const coord_t x = pos(rng), y = pos(rng);
    boxes.push_back({{x, y}, {x + side(rng), y + side(rng)}});
  }
  const Bvh tree = Bvh::build(boxes);
  if (!test::bvh_invariants_ok(tree, boxes)) ++builds_bad;
  for (int q = 0; q < 100; ++q) {
    const coord_t x = pos(rng), y = pos(rng);
    const Aabb query{{x, y}, {x + side(rng) * 4, y + side(rng) * 4}};
    std::vector<std::uint32_t> got = tree.range_query(query);
    std::vector<std::uint32_t> want;
    for (std::uint32_t i = 0; i < boxes.size(); ++i)
      if (boxes[i].overlaps(query)) want.push_back(i);
    std::sort(got.begin(), got.end());
    if (got != want) ++mismatches;
  }

  std::vector<DSeg> segs;
  std::uniform_real_distribution<double> fp(0.0, 4000.0);
  for (int i = 0; i < 1000; ++i) {
    DSeg s{fp(rng), fp(rng), 0, 0};
    s.x1 = s.x0 + fp(rng) * 0.05;
    s.y1 = s.y0 + fp(rng) * 0.05;
    segs.push_back(s);
  }
  const SegmentBvh stree(segs);
  for (int q = 0; q < 100; ++q) {
    const double px = fp(rng), py = fp(rng);
    double best = std::numeric_limits<double>::infinity();
    for (const DSeg& s : segs)
      best = std::min(best, point_segment_distance(px, py, s));
    const auto hit = stree.nearest(px, py, 1e9);
    if (!hit || std::abs(hit->distance - best) > 1e-12) ++mismatches;
  }

  verdict(2, "range and distance queries equal brute-force oracles",
          mismatches == 0 && builds_bad == 0,
          fmt("%.0f query mismatches, %.0f invariant failures over 200 queries",
              mismatches, builds_bad));
}

// ---------------------------------------------------------------- criterion 3

void criterion_bvh_speed() {
  const double speedup = bvh_speedup(100000, 10000, 3);
  verdict(3, "indexed queries >= 10x over all-pairs at n=1e5, q=1e4",
          speedup >= 10.0, fmt("measured %.1fx", speedup));
}

// ---------------------------------------------------------------- criterion 4

std::uint32_t seg_by_normal(const SegmentedMask& sm, int nx, int ny,
                            std::uint32_t poly) {
  for (std::uint32_t i = 0; i < sm.segments.size(); ++i)
    if (sm.segments[i].poly == poly && sm.segments[i].nx == nx &&
        sm.segments[i].ny == ny)
      return i;
  return 0;
}

Layer lattice_layer(std::mt19937_64& rng, int cells) {
  std::uniform_int_distribution<coord_t> jit(0, 6), side(14, 20);
  Layer layer;
  for (int cy = 0; cy < cells; ++cy)
    for (int cx = 0; cx < cells; ++cx) {
      const coord_t x0 = cx * 40 + jit(rng), y0 = cy * 40 + jit(rng);
      layer.polygons.push_back(rect(x0, y0, x0 + side(rng), y0 + side(rng)));
    }
  return layer;
}

void criterion_mrc() {
  int bad = 0;
  std::string why;
  auto fail = [&](const char* msg) {
    ++bad;
    if (why.empty()) why = msg;
  };

  MrcRuleSet fuzz;
  fuzz.min_space = 8;
  fuzz.min_width = 8;
  fuzz.min_internal_c2c = 8;
  fuzz.min_external_c2c = 8;
  fuzz.min_notch = 8;
  fuzz.min_nub = 3;
  fuzz.min_jog = 3;
  fuzz.min_area = 60;

  // safety: limited moves always re-check clean
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<coord_t> move(-6, 6);
  for (int t = 0; t < 30; ++t) {
    const Layer layer = lattice_layer(rng, 3);
    if (!check_rules(layer, fuzz).clean()) continue;
    const SegmentedMask sm = segment_layout(layer, 1.0, 1000.0);
    std::vector<coord_t> prop(sm.segments.size());
    for (auto& p : prop) p = move(rng);
    const auto lims = limit_moves(sm, prop, fuzz);
    if (!check_rules(reconstruct(apply_moves(sm, lims)), fuzz).clean())
      fail("post-move layout re-checks dirty");
  }

  // permutation invariance: reversed polygon order, geometry-keyed compare
  {
    std::mt19937_64 prng(405);
    const Layer layer = lattice_layer(prng, 3);
    Layer rev = layer;
    std::reverse(rev.polygons.begin(), rev.polygons.end());
    const SegmentedMask sa = segment_layout(layer, 1.0, 1000.0);
    const SegmentedMask sb = segment_layout(rev, 1.0, 1000.0);
    std::vector<coord_t> pa(sa.segments.size());
    std::uniform_int_distribution<coord_t> pm(-6, 6);
    std::map<std::pair<std::pair<coord_t, coord_t>, std::pair<coord_t, coord_t>>,
             coord_t>
        by_geom;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      pa[i] = pm(prng);
      const auto& s = sa.segments[i];
      by_geom[{{s.a.x, s.a.y}, {s.b.x, s.b.y}}] = pa[i];
    }
    std::vector<coord_t> pb(sb.segments.size());
    for (std::size_t i = 0; i < pb.size(); ++i) {
      const auto& s = sb.segments[i];
      pb[i] = by_geom.at({{s.a.x, s.a.y}, {s.b.x, s.b.y}});
    }
    const auto la = limit_moves(sa, pa, fuzz);
    const auto lb = limit_moves(sb, pb, fuzz);
    std::map<std::pair<std::pair<coord_t, coord_t>, std::pair<coord_t, coord_t>>,
             coord_t>
        allowed_a;
    for (const auto& l : la) {
      const auto& s = sa.segments[l.segment_id];
      allowed_a[{{s.a.x, s.a.y}, {s.b.x, s.b.y}}] = l.allowed;
    }
    for (const auto& l : lb) {
      const auto& s = sb.segments[l.segment_id];
      if (allowed_a.at({{s.a.x, s.a.y}, {s.b.x, s.b.y}}) != l.allowed)
        fail("permuted input changed an allowed move");
    }
  }

  // mirror symmetry: clamps mirror with the geometry
  {
    MrcRuleSet r;
    r.min_space = 8;
    Layer layer;
    layer.polygons.push_back(rect(-48, 0, -28, 40));
    layer.polygons.push_back(rect(-10, 0, 10, 40));
    layer.polygons.push_back(rect(28, 0, 48, 40));
    const SegmentedMask sm = segment_layout(layer, 1.0, 1000.0);
    std::vector<coord_t> prop(sm.segments.size(), 0);
    prop[seg_by_normal(sm, 1, 0, 0)] = 10;
    prop[seg_by_normal(sm, -1, 0, 1)] = 10;
    prop[seg_by_normal(sm, 1, 0, 1)] = 10;
    prop[seg_by_normal(sm, -1, 0, 2)] = 10;
    const auto lims = limit_moves(sm, prop, r);
    auto allowed_of = [&](std::uint32_t id) -> coord_t {
      for (const auto& l : lims)
        if (l.segment_id == id) return l.allowed;
      return 0;
    };
    const coord_t left_pair = allowed_of(seg_by_normal(sm, 1, 0, 0)) +
                              allowed_of(seg_by_normal(sm, -1, 0, 1));
    const coord_t right_pair = allowed_of(seg_by_normal(sm, 1, 0, 1)) +
                               allowed_of(seg_by_normal(sm, -1, 0, 2));
    if (left_pair != right_pair) fail("mirror image clamped asymmetrically");
    if (!check_rules(reconstruct(apply_moves(sm, lims)), r).clean())
      fail("mirror fixture re-checks dirty");
  }

  // the eight configuration-switch fixtures
  struct Fixture {
    const char* name;
    Layer layer;
    MrcRuleSet rules;
    std::vector<coord_t> (*propose)(const SegmentedMask&);
    double seg_nm = 1000.0;
  };
  std::vector<Fixture> fixtures;
  {
    Fixture f{"a", {}, {}, nullptr};
    f.layer.polygons.push_back(rect(0, 0, 20, 40));
    f.layer.polygons.push_back(rect(32, 0, 52, 40));
    f.rules.min_space = 8;
    f.propose = [](const SegmentedMask& sm) {
      std::vector<coord_t> p(sm.segments.size(), 0);
      p[seg_by_normal(sm, 1, 0, 0)] = 10;
      p[seg_by_normal(sm, -1, 0, 1)] = 10;
      return p;
    };
    fixtures.push_back(f);
  }
  {
    Fixture f{"b", {}, {}, nullptr};
    f.layer.polygons.push_back(Polygon({{0, 0}, {46, 0}, {46, 40}, {30, 40},
                                        {30, 10}, {16, 10}, {16, 40}, {0, 40}}));
    f.rules.min_notch = 8;
    f.rules.min_width = 6;
    f.propose = [](const SegmentedMask& sm) {
      std::vector<coord_t> p(sm.segments.size(), 0);
      for (std::uint32_t i = 0; i < sm.segments.size(); ++i) {
        const auto& s = sm.segments[i];
        if (s.nx == 1 && s.a.x == 16) p[i] = 6;
        if (s.nx == -1 && s.a.x == 30) p[i] = 6;
      }
      return p;
    };
    fixtures.push_back(f);
  }
  {
    Fixture f{"c", {}, {}, nullptr};
    f.layer.polygons.push_back(rect(0, 0, 20, 20));
    f.layer.polygons.push_back(rect(26, 26, 46, 46));
    f.rules.min_space = 8;
    f.rules.min_external_c2c = 8;
    f.propose = [](const SegmentedMask& sm) {
      std::vector<coord_t> p(sm.segments.size(), 0);
      p[seg_by_normal(sm, 1, 0, 0)] = 12;
      p[seg_by_normal(sm, 0, 1, 0)] = 12;
      return p;
    };
    fixtures.push_back(f);
  }
  {
    Fixture f{"d", {}, {}, nullptr};
    f.layer.polygons.push_back(Polygon({{0, 0}, {40, 0}, {40, 14}, {66, 14},
                                        {66, 34}, {26, 34}, {26, 20}, {0, 20}}));
    f.rules.min_internal_c2c = 10;
    f.rules.min_width = 10;
    f.propose = [](const SegmentedMask& sm) {
      std::vector<coord_t> p(sm.segments.size(), 0);
      for (std::uint32_t i = 0; i < sm.segments.size(); ++i) {
        const auto& s = sm.segments[i];
        if (s.nx == 1 && std::min(s.a.x, s.b.x) == 40) p[i] = -6;
        if (s.nx == -1 && std::min(s.a.x, s.b.x) == 26) p[i] = -6;
      }
      return p;
    };
    fixtures.push_back(f);
  }
  {
    Fixture f{"e", {}, {}, nullptr};
    f.layer.polygons.push_back(rect(0, 0, 120, 30));
    f.rules.min_jog = 5;
    f.seg_nm = 40.0;
    f.propose = [](const SegmentedMask& sm) {
      std::vector<coord_t> p(sm.segments.size(), 0);
      bool first = true;
      for (std::uint32_t i = 0; i < sm.segments.size(); ++i)
        if (sm.segments[i].ny == 1) {
          p[i] = first ? 2 : 0;
          first = false;
        }
      return p;
    };
    fixtures.push_back(f);
  }
  {
    Fixture f{"f", {}, {}, nullptr};
    f.layer.polygons.push_back(Polygon({{0, 0}, {60, 0}, {60, 10}, {40, 10},
                                        {40, 16}, {20, 16}, {20, 10}, {0, 10}}));
    f.rules.min_width = 5;
    f.rules.min_notch = 5;
    f.rules.min_nub = 5;
    f.rules.min_jog = 5;
    f.propose = [](const SegmentedMask& sm) {
      std::vector<coord_t> p(sm.segments.size(), 0);
      for (std::uint32_t i = 0; i < sm.segments.size(); ++i) {
        const auto& s = sm.segments[i];
        if (s.ny == 1 && s.a.y == 16) p[i] = -4;
      }
      return p;
    };
    fixtures.push_back(f);
  }
  {
    Fixture f{"g", {}, {}, nullptr};
    f.layer.polygons.push_back(Polygon({{0, 0}, {50, 0}, {50, 14}, {14, 14},
                                        {14, 50}, {0, 50}}));
    f.rules.min_width = 10;
    f.propose = [](const SegmentedMask& sm) {
      std::vector<coord_t> p(sm.segments.size(), 0);
      for (std::uint32_t i = 0; i < sm.segments.size(); ++i) {
        const auto& s = sm.segments[i];
        if (s.ny == 1 && s.a.y == 14) p[i] = -6;
        if (s.nx == 1 && s.a.x == 14) p[i] = -6;
      }
      return p;
    };
    fixtures.push_back(f);
  }
  {
    Fixture f{"h", {}, {}, nullptr};
    f.layer.polygons.push_back(rect(0, 0, 14, 14));
    f.rules.min_area = 100;
    f.rules.min_width = 4;
    f.propose = [](const SegmentedMask& sm) {
      return std::vector<coord_t>(sm.segments.size(), -3);
    };
    fixtures.push_back(f);
  }
  for (const auto& f : fixtures) {
    if (!check_rules(f.layer, f.rules).clean()) {
      fail("fixture layer not clean before moves");
      continue;
    }
    const SegmentedMask sm = segment_layout(f.layer, 1.0, f.seg_nm);
    const auto lims = limit_moves(sm, f.propose(sm), f.rules);
    if (!check_rules(reconstruct(apply_moves(sm, lims)), f.rules).clean())
      fail("fixture re-checks dirty after limiting");
    bool clamped = false;
    for (const auto& l : lims)
      if (l.clamped) clamped = true;
    if (!clamped) fail("fixture did not provoke its clamp");
  }

  verdict(4, "limit_moves is safe, order-free, symmetric; fixtures a-h clamp",
          bad == 0,
          bad == 0 ? "30 fuzz trials + permutation + mirror + 8 fixtures" : why);
}

// ---------------------------------------------------------------- criterion 5

void criterion_imaging() {
  const auto t0 = std::chrono::steady_clock::now();
  OpticalModel m;
  m.wavelength_nm = 13.5;
  m.na = 0.33;
  m.source = make_annular_source(0.4, 0.8, 7);

  double worst = 0.0, herm = 0.0, psd_floor = 0.0, lin = 0.0, flat = 0.0;
  std::mt19937_64 rng(505);
  for (const int n : {16, 32}) {
    for (const double focus : {0.0, 30.0}) {
      const Grid g{n, n, 4.0, 0.0, 0.0};
      const TccMatrix tcc = build_tcc(m, g, focus);
      const SocsKernelSet ks = decompose_tcc(tcc, 1.0);  // full rank
      std::vector<double> mv(g.size());
      for (auto& x : mv) x = test::frand(rng, 0.0, 1.0);
      const MaskField mask = MaskField::from_real(g, mv);
      const AerialImage a = image_socs(mask, ks, 1.0);
      const AerialImage b = image_hopkins_direct(mask, tcc, 1.0);
      double diff = 0, scale = 0;
      for (std::size_t i = 0; i < a.intensity.size(); ++i) {
        diff = std::max(diff, std::abs(a.intensity[i] - b.intensity[i]));
        scale = std::max(scale, std::abs(b.intensity[i]));
      }
      worst = std::max(worst, diff / scale);

      // dose linearity against the same SOCS stack
      const AerialImage ad = image_socs(mask, ks, 1.3);
      for (std::size_t i = 0; i < a.intensity.size(); ++i)
        lin = std::max(lin, std::abs(ad.intensity[i] - 1.3 * a.intensity[i]));
    }
  }
  {
    const Grid g{16, 16, 4.0, 0.0, 0.0};
    const TccMatrix tcc = build_tcc(m, g, 20.0);
    const std::size_t p = tcc.dim();
    Eigen::MatrixXcd T(p, p);
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < p; ++c) {
        T(long(r), long(c)) = tcc.at(r, c);
        herm = std::max(herm, std::abs(tcc.at(r, c) - std::conj(tcc.at(c, r))));
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T);
    const double lmax = es.eigenvalues().maxCoeff();
    psd_floor = es.eigenvalues().minCoeff() / std::max(lmax, 1e-300);

    const SocsKernelSet ks = decompose_tcc(tcc, 1.0);
    const MaskField clear = MaskField::from_real(g, std::vector<double>(g.size(), 1.0));
    const AerialImage img = image_socs(clear, ks, 1.3);
    double lo = 1e300, hi = -1e300;
    for (double v : img.intensity) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    flat = (hi - lo) / std::max(std::abs(hi), 1e-300);
  }
  const double dt = seconds_since(t0);
  verdict(5, "full-rank SOCS equals direct Hopkins; TCC Hermitian and PSD",
          worst <= 1e-6 && herm <= 1e-12 && psd_floor >= -1e-10 &&
              lin <= 1e-9 && flat <= 1e-6 && dt <= 120.0,
          fmt("rel Linf %.2e, clear-field spread %.2e, %.1f s", worst, flat, dt));
}

// ---------------------------------------------------------------- criterion 6

void criterion_contour() {
  auto circle_error = [](int n, double pitch) {
    const Grid g{n, n, pitch, -double(n) * pitch / 2, -double(n) * pitch / 2};
    ResistImage f;
    f.grid = g;
    f.threshold = 0.0;
    f.values.resize(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.origin_x_nm + (ix + 0.5) * g.pitch_nm;
        const double y = g.origin_y_nm + (iy + 0.5) * g.pitch_nm;
        f.values[g.index(ix, iy)] = 100.0 - x * x - y * y;  // radius-10 circle
      }
    const ContourSet cs = marching_squares(f, 0.0);
    double err = 0.0;
    for (const auto& loop : cs.loops)
      for (std::size_t i = 0; i < loop.size(); ++i)
        err = std::max(err, std::abs(std::hypot(loop.xs[i], loop.ys[i]) - 10.0));
    return err;
  };
  const double e1 = circle_error(32, 1.0);
  const double e2 = circle_error(64, 0.5);
  const double e3 = circle_error(128, 0.25);

  // vertices sit on the interpolated level set
  double level_err = 0.0, level_range = 1.0;
  {
    const Grid g{48, 48, 0.75, -18.0, -18.0};
    ResistImage f;
    f.grid = g;
    f.threshold = 0.0;
    f.values.resize(g.size());
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.origin_x_nm + (ix + 0.5) * g.pitch_nm;
        const double y = g.origin_y_nm + (iy + 0.5) * g.pitch_nm;
        f.values[g.index(ix, iy)] = 100.0 - x * x - y * y;
      }
    for (const double v : f.values) level_range = std::max(level_range, std::abs(v));
    const double threshold = 0.05;
    const ContourSet cs = marching_squares(f, threshold);
    auto value_at = [&](int ix, int iy) { return f.values[g.index(ix, iy)]; };
    for (const auto& loop : cs.loops)
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const double gx = (loop.xs[i] - g.origin_x_nm) / g.pitch_nm - 0.5;
        const double gy = (loop.ys[i] - g.origin_y_nm) / g.pitch_nm - 0.5;
        double v;
        if (std::abs(gx - std::round(gx)) < 1e-7) {  // vertical grid line
          const int ix = int(std::lround(gx));
          const int iy = int(std::floor(gy));
          const double t = gy - iy;
          v = (1 - t) * value_at(ix, iy) + t * value_at(ix, iy + 1);
        } else {
          const int iy = int(std::lround(gy));
          const int ix = int(std::floor(gx));
          const double t = gx - ix;
          v = (1 - t) * value_at(ix, iy) + t * value_at(ix + 1, iy);
        }
        level_err = std::max(level_err, std::abs(v - threshold));
      }
  }
  verdict(6, "marching squares converges at second order on a circle",
          e1 / e2 >= 3.5 && e2 / e3 >= 3.5 && level_err <= 1e-9 * level_range,
          fmt("error ratios %.2f, %.2f; level-set residual %.1e", e1 / e2,
              e2 / e3, level_err));
}

// ---------------------------------------------------------------- criterion 7

void criterion_effective_epe() {
  std::mt19937_64 rng(707);
  int bad = 0;
  for (int t = 0; t < 100000; ++t) {
    const double f0 = test::frand(rng, -5.0, 5.0);
    const double fp = test::frand(rng, -5.0, 5.0);
    const double fn = test::frand(rng, -5.0, 5.0);
    const double tp = test::frand(rng, 0.1, 3.0);
    const double tn = -test::frand(rng, 0.1, 3.0);
    const bool drop = (t % 3) == 0;
    double want;
    if (f0 > tp)
      want = f0 - tp;
    else if (f0 < tn)
      want = f0 - tn;
    else if (drop)
      want = (f0 + fp) / 2.0;
    else
      want = (f0 + fp + fn) / 3.0;
    if (effective_epe(f0, fp, fn, tp, tn, drop) != want) ++bad;
  }
  verdict(7, "flexible-window EPE equals the piecewise oracle exactly",
          bad == 0, fmt("%.0f mismatches over 1e5 samples", bad));
}

// ---------------------------------------------------------------- criterion 8

void criterion_gradient() {
  OpticalModel m;
  m.wavelength_nm = 13.5;
  m.na = 0.33;
  m.source = make_annular_source(0.4, 0.8, 5);
  const Grid g{16, 16, 4.0, 0.0, 0.0};
  const TccMatrix tcc = build_tcc(m, g, 0.0);
  const SocsKernelSet ks = decompose_tcc(tcc, 1.0);
  std::mt19937_64 rng(808);
  double worst = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    std::vector<double> mv(g.size());
    for (auto& x : mv) x = test::frand(rng, 0.0, 1.0);
    const MaskField mask = MaskField::from_real(g, mv);
    const std::vector<double> grad = intensity_gradient(mask, ks, 1.3);
    double scale = 0.0;
    for (double v : grad) scale = std::max(scale, std::abs(v));
    const double h = 1e-5;
    for (std::size_t i = 0; i < g.size(); i += 5) {
      std::vector<double> up = mv, dn = mv;
      up[i] += h;
      dn[i] -= h;
      double sum_up = 0, sum_dn = 0;
      for (double v : image_socs(MaskField::from_real(g, up), ks, 1.3).intensity)
        sum_up += v;
      for (double v : image_socs(MaskField::from_real(g, dn), ks, 1.3).intensity)
        sum_dn += v;
      const double fd = (sum_up - sum_dn) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[i]) / scale);
    }
  }
  verdict(8, "intensity gradient matches central differences",
          worst <= 1e-4, fmt("rel Linf %.2e on random 16^2 masks", worst));
}

// ----------------------------------------------------------- criteria 9 - 11

struct OpcCase {
  std::string name;
  Layer target;
};

// suite coordinates are dbu at 2 dbu/nm: half-nm moves keep the controller
// from rounding sub-pixel corrections to zero
constexpr double kSuiteDbu = 2.0;

std::vector<OpcCase> opc_suite() {
  std::vector<OpcCase> cases;
  for (const coord_t pitch : {60, 75, 90}) {  // line/space, width 30 nm
    OpcCase c{"line_space_p" + std::to_string(pitch), {}};
    c.target.polygons.push_back(rect(0, 0, 60, 240));
    c.target.polygons.push_back(rect(2 * pitch, 0, 2 * pitch + 60, 240));
    cases.push_back(c);
  }
  for (const coord_t gap : {12, 16, 20}) {  // tip to tip, gap in nm
    OpcCase c{"tip_gap" + std::to_string(gap), {}};
    c.target.polygons.push_back(rect(0, 0, 200, 60));
    c.target.polygons.push_back(rect(200 + 2 * gap, 0, 400 + 2 * gap, 60));
    cases.push_back(c);
  }
  for (const coord_t w : {48, 60, 72}) {  // L shapes, arm width w/2 nm
    OpcCase c{"l_shape_w" + std::to_string(w / 2), {}};
    c.target.polygons.push_back(Polygon(
        {{0, 0}, {3 * w, 0}, {3 * w, w}, {w, w}, {w, 3 * w}, {0, 3 * w}}));
    cases.push_back(c);
  }
  return cases;
}

OpticalModel suite_model() {
  OpticalModel m;
  m.wavelength_nm = 13.5;
  m.na = 0.33;
  m.source = make_annular_source(0.4, 0.8, 5);
  m.resist_sigma_nm = 2.0;
  return m;
}

// on-focus window: converged (eff <= 0.25) implies best-focus |EPE| <= 0.5
OpcConfig suite_config() {
  OpcConfig c;
  c.pitch_nm = 2.0;
  // 10 nm segments put a gauge on the tip-center bulge; 20 nm leaves it unsampled
  c.seg_length_nm = 10.0;
  c.tol_pos_nm = 0.25;
  c.tol_neg_nm = -0.25;
  c.convergence_nm = 0.25;
  c.through_focus = false;
  return c;
}

MrcRuleSet suite_rules() {
  MrcRuleSet r;
  r.min_space = 16;
  r.min_width = 16;
  r.min_area = 400;
  return r;
}

OpticalModel calibrated_model(const Layer& target, const OpcConfig& cfg) {
  OpticalModel m = suite_model();
  const OpcOptics optics = build_optics(target, kSuiteDbu, m, cfg);
  m.t_eff = calibrate_threshold(target, kSuiteDbu, optics, cfg.seg_length_nm);
  return m;
}

// worst |EPE| of a corrected mask measured at one focus of the target gauges
struct FocusScan {
  double max_abs = 0.0;
  int open = 0;
  std::vector<Defect> defects;
};

FocusScan scan_focus(const OpcResult& res, const Layer& target,
                     const OpticalModel& model, const OpcConfig& cfg,
                     std::size_t focus_index) {
  const OpcOptics optics = build_optics(target, kSuiteDbu, model, cfg);
  const SegmentedMask tseg = segment_layout(target, kSuiteDbu, cfg.seg_length_nm);
  const std::vector<Gauge> gauges = make_gauges(tseg);
  const EpeEval eval =
      evaluate_epe(res.mask, gauges, optics, focus_index, cfg.search_radius_nm);
  FocusScan scan;
  for (const auto& r : eval.records) {
    if (r.open)
      ++scan.open;
    else
      scan.max_abs = std::max(scan.max_abs, std::abs(r.epe_nm));
  }
  const ContourSet cs = marching_squares(eval.resist, model.t_eff);
  scan.defects = detect_defects(cs, target, kSuiteDbu, eval.records, gauges,
                                DefectLimits{8.0, 8.0});
  return scan;
}

void criteria_opc(OpcResult& tip_cold_out, OpticalModel& tip_model_out,
                  OpcConfig& tip_cfg_out, Layer& tip_target_out) {
  const auto t0 = std::chrono::steady_clock::now();
  const MrcRuleSet rules = suite_rules();
  int bad = 0;
  std::string why;
  auto fail = [&](const std::string& msg) {
    ++bad;
    if (why.empty()) why = msg;
  };
  double worst_f0 = 0.0;
  int worst_iters = 0;

  for (const OpcCase& cs : opc_suite()) {
    const OpcConfig cfg = suite_config();
    const OpticalModel model = calibrated_model(cs.target, cfg);
    const OpcResult res = run_opc(cs.target, kSuiteDbu, model, rules, cfg);
    if (!res.converged || int(res.reports.size()) > 16)
      fail(cs.name + ": did not converge within 16 iterations");
    worst_iters = std::max(worst_iters, int(res.reports.size()));
    if (!check_rules(res.corrected, rules).clean())
      fail(cs.name + ": corrected mask violates MRC");
    for (std::size_t fi = 0; fi < 3; ++fi) {
      const FocusScan scan = scan_focus(res, cs.target, model, cfg, fi);
      if (fi == 0) worst_f0 = std::max(worst_f0, scan.max_abs);
      if (fi == 0 && scan.max_abs > 0.5)
        fail(cs.name + ": best-focus |EPE| above 0.5 nm");
      if (scan.open > 0) fail(cs.name + ": open gauges");
      if (!scan.defects.empty()) fail(cs.name + ": pinch/bridge detected");
    }
    if (cs.name == "tip_gap16") {
      tip_cold_out = res;
      tip_model_out = model;
      tip_cfg_out = cfg;
      tip_target_out = cs.target;
    }
  }

  // iteration-prefix property: every intermediate mask is MRC clean (the
  // loop is deterministic, so capping max_iterations replays its prefix)
  {
    const OpcCase cs = opc_suite()[4];  // tip to tip, mid gap
    OpcConfig cfg = suite_config();
    const OpticalModel model = calibrated_model(cs.target, cfg);
    const int total =
        int(run_opc(cs.target, kSuiteDbu, model, rules, cfg).reports.size());
    for (int k = 1; k < total; ++k) {
      cfg.max_iterations = k;
      const OpcResult part = run_opc(cs.target, kSuiteDbu, model, rules, cfg);
      if (!check_rules(part.corrected, rules).clean())
        fail("intermediate iterate violates MRC");
    }
  }

  const double dt = seconds_since(t0);
  if (dt > 600.0) fail("suite exceeded 10 minutes");
  verdict(9, "OPC suite converges <=16 iters, MRC clean, defect free",
          bad == 0,
          bad == 0 ? fmt("9 targets, worst f0 |EPE| %.2f nm, <=%.0f iters, %.0f s",
                         worst_f0, worst_iters, dt)
                   : why);
}

void criterion_through_focus() {
  const MrcRuleSet rules = suite_rules();
  int bad = 0;
  std::string why;
  double worst_tf = 0.0, worst_f0only = 0.0;
  for (const coord_t gap : {24, 32, 40}) {  // dbu; 12/16/20 nm
    Layer target;
    target.polygons.push_back(rect(0, 0, 200, 60));
    target.polygons.push_back(rect(200 + gap, 0, 400 + gap, 60));
    OpcConfig cfg;  // defaults: flexible window +-1 nm, convergence 0.5
    cfg.pitch_nm = 2.0;
    cfg.seg_length_nm = 20.0;
    cfg.focus.fp = 20.0;
    cfg.focus.fn = -20.0;
    const OpticalModel model = calibrated_model(target, cfg);
    const OpcResult tf = run_opc(target, kSuiteDbu, model, rules, cfg);
    cfg.through_focus = false;
    const OpcResult f0only = run_opc(target, kSuiteDbu, model, rules, cfg);
    cfg.through_focus = true;
    for (std::size_t fi = 1; fi < 3; ++fi) {
      worst_tf = std::max(worst_tf, scan_focus(tf, target, model, cfg, fi).max_abs);
      worst_f0only =
          std::max(worst_f0only, scan_focus(f0only, target, model, cfg, fi).max_abs);
    }
    const FocusScan best = scan_focus(tf, target, model, cfg, 0);
    if (best.max_abs > cfg.tol_pos_nm) {
      ++bad;
      if (why.empty()) why = "through-focus run left best focus out of tolerance";
    }
  }
  if (!(worst_tf < worst_f0only)) {
    ++bad;
    if (why.empty()) why = "no defocus improvement";
  }
  verdict(10, "through-focus OPC beats on-focus-only at defocus",
          bad == 0,
          fmt("worst defocus |EPE| %.2f vs %.2f nm (%.2fx)", worst_tf,
              worst_f0only, worst_f0only / std::max(worst_tf, 1e-12)));
}

void criterion_warm_start(const OpcResult& cold, const OpticalModel& model,
                          const OpcConfig& cfg, const Layer& target) {
  const MrcRuleSet rules = suite_rules();
  // bridge the converged correction through the continuous-field interface:
  // rasterize, re-extract per-segment displacements, clamp, and seed
  const Aabb box = bounding_box(cold.corrected);
  const int margin = 20;  // dbu
  const Grid g{int(box.hi.x - box.lo.x) + 2 * margin,
               int(box.hi.y - box.lo.y) + 2 * margin, 1.0 / kSuiteDbu,
               double(box.lo.x - margin) / kSuiteDbu,
               double(box.lo.y - margin) / kSuiteDbu};
  const ContinuousMaskField field{g, rasterize_layer(cold.corrected, g, kSuiteDbu)};
  const SegmentedMask base = segment_layout(target, kSuiteDbu, cfg.seg_length_nm);
  const SegmentMoves moves =
      extract_segment_moves(field, base, 0.5, cfg.search_radius_nm);
  const SegmentedMask seeded = apply_segment_moves(base, moves.ds_nm, rules);
  std::vector<coord_t> init;
  for (const auto& s : seeded.segments) init.push_back(s.offset);

  const OpcResult warm = run_opc(target, kSuiteDbu, model, rules, cfg, &init);
  const std::size_t cold_iters = cold.reports.size();
  const std::size_t warm_iters = warm.reports.size();
  verdict(11, "ai-bridge warm start halves the iteration count",
          warm.converged && warm_iters * 2 <= cold_iters,
          fmt("warm %.0f vs cold %.0f iterations", double(warm_iters),
              double(cold_iters)));
}

// --------------------------------------------------------------- criterion 12

void criterion_amdahl() {
  const double inf = std::numeric_limits<double>::infinity();
  const bool exact = amdahl_bound(0.5, inf) == 2.0;
  const BenchReport rep = run_bench("end-to-end", 96, 3, 12);
  verdict(12, "amdahl_bound(0.5, inf) == 2.0 and measured <= bound",
          exact && rep.measured_speedup <= rep.bound,
          fmt("measured %.2fx <= bound %.2fx", rep.measured_speedup, rep.bound));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_boolean();
  criterion_bvh_oracles();
  criterion_bvh_speed();
  criterion_mrc();
  criterion_imaging();
  criterion_contour();
  criterion_effective_epe();
  criterion_gradient();
  OpcResult tip_cold;
  OpticalModel tip_model;
  OpcConfig tip_cfg;
  Layer tip_target;
  criteria_opc(tip_cold, tip_model, tip_cfg, tip_target);
  criterion_through_focus();
  criterion_warm_start(tip_cold, tip_model, tip_cfg, tip_target);
  criterion_amdahl();
  std::printf("acceptance: %d/12 passed in %.0f s\n", 12 - failures,
              seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
