// Command-line front end over the C API. Exit codes: 0 success, 1 domain
// error, 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "litho/litho.h"

namespace {

int report(litho_status status) {
  if (status != LITHO_OK) std::fprintf(stderr, "error: %s\n", litho_last_error());
  return int(status);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"litho: layout booleans, spatial queries, mask rule checks, "
               "partially coherent imaging, contours, EPE metrology, OPC"};
  app.require_subcommand(1);

  int workers = 0;  // informational; pipelines run single-process
  if (const char* env = std::getenv("LITHO_WORKERS")) workers = std::atoi(env);
  app.add_option("--workers", workers, "worker count (reported; single-process)");

  std::string in, out, config, rules;
  std::string op, layer_a, layer_b, suite = "end-to-end", report_path, warm_start;
  double focus = 0.0, dose = 1.0, threshold = 0.25, radius = 30.0;
  long long size_delta = 0;
  int iterations = 0, queries = 100, bench_size = 64, reps = 5;
  unsigned long long seed = 1;
  bool resist = false;

  auto* c_boolean = app.add_subcommand("boolean", "layer set operation");
  c_boolean->add_option("--in", in)->required();
  c_boolean->add_option("--out", out)->required();
  c_boolean->add_option("--op", op, "and|or|not|sub|xor|heal|size|touch")->required();
  c_boolean->add_option("--layer-a", layer_a, "defaults to the first layer");
  c_boolean->add_option("--layer-b", layer_b);
  c_boolean->add_option("--size-delta", size_delta, "dbu, for --op size");

  auto* c_bvh = app.add_subcommand("bvh-query", "seeded random range queries");
  c_bvh->add_option("--in", in)->required();
  c_bvh->add_option("--out", out)->required();
  c_bvh->add_option("--queries", queries);
  c_bvh->add_option("--seed", seed);

  auto* c_mrc = app.add_subcommand("mrc-check", "mask rule check report");
  c_mrc->add_option("--in", in)->required();
  c_mrc->add_option("--rules", rules)->required();
  c_mrc->add_option("--out", out)->required();
  c_mrc->add_option("--histogram", report_path, "near-threshold histogram CSV");

  auto* c_image = app.add_subcommand("image", "aerial or resist image (AIMG)");
  c_image->add_option("--in", in)->required();
  c_image->add_option("--out", out)->required();
  c_image->add_option("--config", config);
  c_image->add_option("--focus", focus, "defocus, nm");
  c_image->add_option("--dose", dose);
  c_image->add_flag("--resist", resist, "apply the resist blur");

  auto* c_contour = app.add_subcommand("contour", "iso-contours of an AIMG");
  c_contour->add_option("--in", in)->required();
  c_contour->add_option("--out", out)->required();
  c_contour->add_option("--threshold", threshold)->required();

  auto* c_measure = app.add_subcommand("measure", "EPE against a target layout");
  c_measure->add_option("--in", in, "target layout JSON")->required();
  c_measure->add_option("--image", report_path, "AIMG to measure")->required();
  c_measure->add_option("--out", out)->required();
  c_measure->add_option("--config", config);
  c_measure->add_option("--threshold", threshold)->required();
  c_measure->add_option("--radius", radius, "search radius, nm");

  auto* c_opc = app.add_subcommand("opc", "run the OPC loop");
  c_opc->add_option("--in", in)->required();
  c_opc->add_option("--rules", rules)->required();
  c_opc->add_option("--out", out)->required();
  c_opc->add_option("--config", config);
  c_opc->add_option("--report", report_path, "per-iteration CSV");
  c_opc->add_option("--warm-start", warm_start, "segment_id,offset_dbu CSV");

  auto* c_ai = app.add_subcommand("ai-init", "training-tensor channels");
  c_ai->add_option("--in", in)->required();
  c_ai->add_option("--out", out, "output path prefix")->required();
  c_ai->add_option("--config", config);

  auto* c_bench = app.add_subcommand("bench", "timing suites + Amdahl projection");
  c_bench->add_option("--suite", suite,
                      "booleans|bvh|mrc|imaging|contour|controller|end-to-end");
  c_bench->add_option("--out", out)->required();
  c_bench->add_option("--size", bench_size);
  c_bench->add_option("--repetitions", reps);
  c_bench->add_option("--seed", seed);

  auto* c_validate = app.add_subcommand("validate", "layout sanity scan");
  c_validate->add_option("--in", in)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*c_boolean)
    return report(litho_boolean(in.c_str(), out.c_str(), op.c_str(), opt(layer_a),
                                opt(layer_b), size_delta));
  if (*c_bvh) {
    std::printf("seed %llu\n", seed);
    return report(litho_bvh_query(in.c_str(), out.c_str(), queries, seed));
  }
  if (*c_mrc) {
    int count = 0;
    const litho_status st = litho_mrc_check(in.c_str(), rules.c_str(), out.c_str(),
                                            opt(report_path), &count);
    if (st == LITHO_OK) std::printf("violations %d\n", count);
    return report(st);
  }
  if (*c_image)
    return report(litho_image(in.c_str(), opt(config), out.c_str(), focus, dose,
                              resist ? 1 : 0));
  if (*c_contour)
    return report(litho_contour(in.c_str(), out.c_str(), threshold));
  if (*c_measure)
    return report(litho_measure(in.c_str(), opt(config), report_path.c_str(),
                                out.c_str(), threshold, radius));
  if (*c_opc) {
    int converged = 0;
    const litho_status st =
        litho_opc(in.c_str(), opt(config), rules.c_str(), out.c_str(),
                  opt(report_path), opt(warm_start), &iterations, &converged);
    if (st == LITHO_OK)
      std::printf("iterations %d converged %d\n", iterations, converged);
    return report(st);
  }
  if (*c_ai)
    return report(litho_ai_init(in.c_str(), opt(config), out.c_str()));
  if (*c_bench) {
    std::printf("seed %llu workers %d\n", seed, workers);
    return report(litho_bench(suite.c_str(), bench_size, reps, seed, out.c_str()));
  }
  if (*c_validate) {
    litho_layout* layout = nullptr;
    litho_status st = litho_layout_load(in.c_str(), &layout);
    if (st != LITHO_OK) return report(st);
    int findings = 0;
    st = litho_layout_validate(layout, &findings);
    litho_layout_free(layout);
    if (st == LITHO_OK) std::printf("findings %d\n", findings);
    return report(st);
  }
  return 2;
}
