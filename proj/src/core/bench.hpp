#pragma once
// Seeded micro-benchmark harness: per-stage wall times over the OPC flow
// stages, fractions of the end-to-end total, speedups against brute-force
// baselines, and the Amdahl projection for the composed pipeline.

#include <cstdint>
#include <string>
#include <vector>

namespace litho {

// 1 / ((1-p) + p/s); s may be infinite (bound 1/(1-p)).
double amdahl_bound(double p, double s);

struct StageTiming {
  std::string stage;
  double median_ms = 0.0;           // accelerated (or only) path
  double baseline_median_ms = 0.0;  // 0 when no registered baseline
  double fraction = 0.0;            // of the summed accelerated medians
  double speedup = 1.0;             // baseline / accelerated
  std::vector<double> samples_ms;   // accelerated samples, all repetitions
};

struct BenchReport {
  std::string suite;
  std::uint64_t seed = 0;
  int size = 0;
  int repetitions = 0;
  std::vector<StageTiming> stages;
  double accelerated_fraction = 0.0;  // p: baseline share of accelerated stages
  double component_speedup = 1.0;     // s: best per-stage speedup
  double bound = 1.0;                 // Amdahl projection from (p, s)
  double measured_speedup = 1.0;      // composed from per-stage medians
};

// suite in {booleans, bvh, mrc, imaging, contour, controller, end-to-end}.
// size scales the workload (primitive count); repetitions >= 1.
BenchReport run_bench(const std::string& suite, int size, int repetitions,
                      std::uint64_t seed);

// Measured (build + q queries) speedup of the indexed range-query path over
// the all-pairs baseline at n boxes. Shared by bench and the acceptance gate.
double bvh_speedup(std::size_t n, std::size_t q, std::uint64_t seed);

void write_bench_csv(const std::string& path, const BenchReport& report);

}  // namespace litho
