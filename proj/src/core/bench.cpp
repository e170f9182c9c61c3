#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>

#include "boolean.hpp"
#include "bvh.hpp"
#include "contour.hpp"
#include "mrc.hpp"
#include "opc.hpp"

namespace litho {

double amdahl_bound(double p, double s) {
  if (p < 0 || p > 1) throw std::invalid_argument("amdahl_bound: p outside [0,1]");
  if (s < 1) throw std::invalid_argument("amdahl_bound: s < 1");
  const double serial = 1.0 - p;
  if (std::isinf(s)) {
    if (serial == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / serial;
  }
  return 1.0 / (serial + p / s);
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto t0 = Clock::now();
  fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// staggered grid of jittered rectangles; Manhattan, comfortably rule-clean
Layer make_bench_layer(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<coord_t> jitter(0, 20);
  Layer layer;
  layer.name = "bench";
  const int cols = std::max(1, int(std::sqrt(double(n))));
  for (int i = 0; i < n; ++i) {
    const coord_t x0 = coord_t(i % cols) * 200 + jitter(rng);
    const coord_t y0 = coord_t(i / cols) * 200 + jitter(rng);
    const coord_t w = 80 + jitter(rng);
    const coord_t h = 80 + jitter(rng);
    layer.polygons.push_back(
        Polygon({{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}}));
  }
  return layer;
}

std::vector<Aabb> make_boxes(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<coord_t> pos(0, 1000000);
  std::uniform_int_distribution<coord_t> ext(1, 1000);
  std::vector<Aabb> boxes(n);
  for (auto& b : boxes) {
    const Point lo{pos(rng), pos(rng)};
    b = Aabb{lo, {lo.x + ext(rng), lo.y + ext(rng)}};
  }
  return boxes;
}

std::vector<Aabb> make_queries(std::size_t q, std::mt19937_64& rng) {
  std::uniform_int_distribution<coord_t> pos(0, 1000000);
  std::vector<Aabb> queries(q);
  for (auto& b : queries) {
    const Point lo{pos(rng), pos(rng)};
    b = Aabb{lo, {lo.x + 5000, lo.y + 5000}};
  }
  return queries;
}

struct StageFns {
  std::string name;
  std::function<void()> accelerated;
  std::function<void()> baseline;  // empty when none registered
};

volatile double g_sink = 0.0;  // defeats dead-code elimination

std::vector<StageFns> build_stages(const std::string& suite, int size,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<StageFns> stages;
  auto want = [&](const char* s) { return suite == "end-to-end" || suite == s; };

  if (want("booleans")) {
    auto a = std::make_shared<Layer>(make_bench_layer(size, rng));
    auto b = std::make_shared<Layer>(*a);
    for (auto& poly : b->polygons)
      for (auto& v : poly.vertices) {
        v.x += 40;
        v.y += 40;
      }
    stages.push_back({"booleans",
                      [a, b] {
                        const Layer r = boolean_op(BoolOpKind::OR, *a, b.get());
                        g_sink = g_sink + double(r.polygons.size());
                      },
                      {}});
  }
  if (want("bvh")) {
    const std::size_t n = std::size_t(size) * 16;
    const std::size_t q = std::max<std::size_t>(1, n / 10);
    auto boxes = std::make_shared<std::vector<Aabb>>(make_boxes(n, rng));
    auto queries = std::make_shared<std::vector<Aabb>>(make_queries(q, rng));
    stages.push_back({"bvh",
                      [boxes, queries] {
                        const Bvh tree = Bvh::build(*boxes);
                        std::size_t hits = 0;
                        for (const Aabb& qb : *queries)
                          hits += tree.range_query(qb).size();
                        g_sink = g_sink + double(hits);
                      },
                      [boxes, queries] {
                        std::size_t hits = 0;
                        for (const Aabb& qb : *queries)
                          for (const Aabb& b : *boxes)
                            if (b.overlaps(qb)) ++hits;
                        g_sink = g_sink + double(hits);
                      }});
  }
  if (want("mrc")) {
    auto a = std::make_shared<Layer>(make_bench_layer(size, rng));
    MrcRuleSet rules;
    rules.min_space = 40;
    rules.min_width = 40;
    rules.min_external_c2c = 40;
    rules.min_area = 1600;
    stages.push_back({"mrc",
                      [a, rules] {
                        const MrcReport r = check_rules(*a, rules);
                        g_sink = g_sink + double(r.violations.size());
                      },
                      {}});
  }

  // one small imaging clip shared by the imaging and contour stages
  std::shared_ptr<MaskField> mask;
  std::shared_ptr<TccMatrix> tcc;
  std::shared_ptr<SocsKernelSet> kernels;
  if (want("imaging") || want("contour")) {
    OpticalModel model;
    model.source = make_annular_source(0.4, 0.8, 7);
    Grid grid{24, 24, 2.0, 0.0, 0.0};
    Layer clip;
    clip.name = "clip";
    clip.polygons.push_back(Polygon({{8, 8}, {40, 8}, {40, 40}, {8, 40}}));
    clip.polygons.push_back(Polygon({{8, 16}, {24, 16}, {24, 32}, {8, 32}}));
    mask = std::make_shared<MaskField>(MaskField::from_layer(clip, grid, 1.0));
    tcc = std::make_shared<TccMatrix>(build_tcc(model, grid, 0.0));
    kernels = std::make_shared<SocsKernelSet>(decompose_tcc(*tcc, 1.0));
  }
  if (want("imaging")) {
    stages.push_back({"imaging",
                      [mask, kernels] {
                        const AerialImage img = image_socs(*mask, *kernels, 1.0);
                        g_sink = g_sink + img.intensity[0];
                      },
                      [mask, tcc] {
                        const AerialImage img = image_hopkins_direct(*mask, *tcc, 1.0);
                        g_sink = g_sink + img.intensity[0];
                      }});
  }
  if (want("contour")) {
    const AerialImage img = image_socs(*mask, *kernels, 1.0);
    auto resist = std::make_shared<ResistImage>(resist_filter(img, 2.0, 0.2));
    stages.push_back({"contour",
                      [resist] {
                        const ContourSet c = marching_squares(*resist, 0.2);
                        double len = 0;
                        for (const auto& loop : c.loops) len += loop.perimeter();
                        g_sink = g_sink + len;
                      },
                      {}});
  }
  if (want("controller")) {
    const std::size_t n = std::size_t(size) * 64;
    auto epes = std::make_shared<std::vector<double>>(n);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (auto& e : *epes) e = d(rng);
    stages.push_back({"controller",
                      [epes] {
                        double acc = 0;
                        for (std::size_t i = 0; i + 2 < epes->size(); i += 3) {
                          const double eff =
                              effective_epe((*epes)[i], (*epes)[i + 1],
                                            (*epes)[i + 2], 1.0, -1.0);
                          acc += propose_move_nm(eff, 1.5, 1.0, 2.0);
                        }
                        g_sink = g_sink + acc;
                      },
                      {}});
  }
  if (stages.empty()) throw std::invalid_argument("unknown bench suite: " + suite);
  return stages;
}

}  // namespace

BenchReport run_bench(const std::string& suite, int size, int repetitions,
                      std::uint64_t seed) {
  if (size < 1 || repetitions < 1)
    throw std::invalid_argument("run_bench: size and repetitions must be >= 1");
  BenchReport report;
  report.suite = suite;
  report.seed = seed;
  report.size = size;
  report.repetitions = repetitions;

  for (auto& st : build_stages(suite, size, seed)) {
    StageTiming t;
    t.stage = st.name;
    for (int r = 0; r < repetitions; ++r)
      t.samples_ms.push_back(time_ms(st.accelerated));
    t.median_ms = median(t.samples_ms);
    if (st.baseline) {
      std::vector<double> base;
      for (int r = 0; r < repetitions; ++r) base.push_back(time_ms(st.baseline));
      t.baseline_median_ms = median(base);
      t.speedup = t.baseline_median_ms / t.median_ms;
    }
    report.stages.push_back(std::move(t));
  }

  double total_acc = 0.0, total_base = 0.0, accelerated_base = 0.0;
  for (const auto& t : report.stages) {
    total_acc += t.median_ms;
    const double base = t.baseline_median_ms > 0 ? t.baseline_median_ms : t.median_ms;
    total_base += base;
    if (t.baseline_median_ms > 0) {
      accelerated_base += base;
      report.component_speedup = std::max(report.component_speedup, t.speedup);
    }
  }
  for (auto& t : report.stages) t.fraction = t.median_ms / total_acc;
  report.accelerated_fraction = total_base > 0 ? accelerated_base / total_base : 0.0;
  report.bound = amdahl_bound(report.accelerated_fraction, report.component_speedup);
  report.measured_speedup = total_acc > 0 ? total_base / total_acc : 1.0;
  return report;
}

double bvh_speedup(std::size_t n, std::size_t q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<Aabb> boxes = make_boxes(n, rng);
  const std::vector<Aabb> queries = make_queries(q, rng);
  std::size_t hits_indexed = 0, hits_brute = 0;
  const double acc = time_ms([&] {
    const Bvh tree = Bvh::build(boxes);
    for (const Aabb& qb : queries) hits_indexed += tree.range_query(qb).size();
  });
  const double base = time_ms([&] {
    for (const Aabb& qb : queries)
      for (const Aabb& b : boxes)
        if (b.overlaps(qb)) ++hits_brute;
  });
  if (hits_indexed != hits_brute)
    throw std::logic_error("bvh_speedup: indexed/brute hit counts differ");
  return base / acc;
}

void write_bench_csv(const std::string& path, const BenchReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "format_version,1\n";
  out.precision(17);
  out << "suite," << report.suite << ",seed," << report.seed << ",size,"
      << report.size << ",repetitions," << report.repetitions << "\n";
  out << "stage,median_ms,baseline_median_ms,fraction,speedup,samples_ms...\n";
  for (const auto& t : report.stages) {
    out << t.stage << "," << t.median_ms << "," << t.baseline_median_ms << ","
        << t.fraction << "," << t.speedup;
    for (double s : t.samples_ms) out << "," << s;
    out << "\n";
  }
  out << "amdahl,p," << report.accelerated_fraction << ",s,"
      << report.component_speedup << ",bound," << report.bound << ",measured,"
      << report.measured_speedup << "\n";
}

}  // namespace litho
