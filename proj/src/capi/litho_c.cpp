#include "litho/litho.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "core/ai.hpp"
#include "core/bench.hpp"
#include "core/boolean.hpp"
#include "core/bvh.hpp"
#include "core/io.hpp"
#include "core/mrc.hpp"
#include "core/opc.hpp"

namespace {

thread_local std::string g_last_error;

litho_status fail(litho_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

litho_status usage(const std::string& msg) { return fail(LITHO_ERR_USAGE, msg); }

template <typename Fn>
litho_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LITHO_OK;
  } catch (const std::exception& e) {
    return fail(LITHO_ERR_DOMAIN, e.what());
  } catch (...) {
    return fail(LITHO_ERR_DOMAIN, "unknown error");
  }
}

const litho::Layer& first_layer(const litho::Layout& layout) {
  if (layout.layers.empty()) throw std::runtime_error("layout has no layers");
  return layout.layers.front();
}

// shared window/optics construction so image, measure and ai-init agree
struct Scene {
  litho::Layout layout;
  litho::RunConfig config;
  litho::Grid grid;

  Scene(const char* layout_path, const char* config_path) {
    layout = litho::load_layout(layout_path);
    config = config_path ? litho::load_config(config_path) : litho::RunConfig{};
    grid = litho::make_window(first_layer(layout), layout.dbu_per_nm(),
                              config.opc.pitch_nm, config.opc.guard_band_nm);
  }
};

}  // namespace

extern "C" {

const char* litho_last_error(void) { return g_last_error.c_str(); }

struct litho_layout {
  litho::Layout data;
};

litho_status litho_layout_load(const char* path, litho_layout** out) {
  if (!path || !out) return usage("litho_layout_load: null argument");
  return guarded([&] {
    auto* handle = new litho_layout{litho::load_layout(path)};
    *out = handle;
  });
}

litho_status litho_layout_save(const litho_layout* layout, const char* path) {
  if (!layout || !path) return usage("litho_layout_save: null argument");
  return guarded([&] { litho::save_layout(layout->data, path); });
}

void litho_layout_free(litho_layout* layout) { delete layout; }

litho_status litho_layout_validate(const litho_layout* layout, int* finding_count) {
  if (!layout || !finding_count) return usage("litho_layout_validate: null argument");
  return guarded([&] {
    *finding_count = int(litho::validate_layout(layout->data).findings.size());
  });
}

litho_status litho_boolean(const char* in_path, const char* out_path,
                           const char* op, const char* layer_a,
                           const char* layer_b, long long size_delta_dbu) {
  if (!in_path || !out_path || !op) return usage("litho_boolean: null argument");
  litho::BoolOpKind kind;
  const std::string name = op;
  if (name == "and") kind = litho::BoolOpKind::AND;
  else if (name == "or") kind = litho::BoolOpKind::OR;
  else if (name == "not" || name == "sub") kind = litho::BoolOpKind::NOT;
  else if (name == "xor") kind = litho::BoolOpKind::XOR;
  else if (name == "heal") kind = litho::BoolOpKind::HEAL;
  else if (name == "size") kind = litho::BoolOpKind::SIZE;
  else if (name == "touch") kind = litho::BoolOpKind::TOUCH;
  else return usage("litho_boolean: unknown op \"" + name + "\"");
  const bool binary = kind == litho::BoolOpKind::AND || kind == litho::BoolOpKind::OR ||
                      kind == litho::BoolOpKind::NOT || kind == litho::BoolOpKind::XOR ||
                      kind == litho::BoolOpKind::TOUCH;
  if (binary && !layer_b)
    return usage("litho_boolean: op \"" + name + "\" needs layer_b");

  return guarded([&] {
    litho::Layout layout = litho::load_layout(in_path);
    auto pick = [&](const char* want) -> const litho::Layer& {
      if (!want || !*want) return first_layer(layout);
      const litho::Layer* l = layout.find_layer(want);
      if (!l) throw std::runtime_error(std::string("no layer named ") + want);
      return *l;
    };
    const litho::Layer& a = pick(layer_a);
    litho::Layer result;
    if (kind == litho::BoolOpKind::TOUCH) {
      result = litho::touch_layer(a, pick(layer_b));
    } else if (kind == litho::BoolOpKind::SIZE) {
      result = litho::size_layer(a, litho::coord_t(size_delta_dbu));
    } else if (binary) {
      const litho::Layer& b = pick(layer_b);
      result = litho::boolean_op(kind, a, &b);
    } else {
      result = litho::boolean_op(kind, a, nullptr);
    }
    result.name = name;
    litho::Layout out;
    out.dbu_num = layout.dbu_num;
    out.dbu_den = layout.dbu_den;
    out.layers.push_back(std::move(result));
    litho::save_layout(out, out_path);
  });
}

litho_status litho_bvh_query(const char* in_path, const char* out_csv,
                             int n_queries, unsigned long long seed) {
  if (!in_path || !out_csv) return usage("litho_bvh_query: null argument");
  if (n_queries < 1) return usage("litho_bvh_query: n_queries must be >= 1");
  return guarded([&] {
    const litho::Layout layout = litho::load_layout(in_path);
    const litho::Layer& layer = first_layer(layout);
    std::vector<litho::Aabb> boxes;
    for (const auto& poly : layer.polygons)
      boxes.push_back(litho::bounding_box(poly));
    if (boxes.empty()) throw std::runtime_error("layer has no polygons");
    const litho::Bvh tree = litho::Bvh::build(boxes);
    litho::Aabb scene = tree.scene_bounds();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<litho::coord_t> dx(scene.lo.x, scene.hi.x);
    std::uniform_int_distribution<litho::coord_t> dy(scene.lo.y, scene.hi.y);
    const litho::coord_t qw =
        std::max<litho::coord_t>(1, (scene.hi.x - scene.lo.x) / 10);
    const litho::coord_t qh =
        std::max<litho::coord_t>(1, (scene.hi.y - scene.lo.y) / 10);
    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error(std::string("cannot write ") + out_csv);
    out << "format_version," << litho::kFormatVersion << "\n";
    out << "query,lo_x,lo_y,hi_x,hi_y,hits...\n";
    for (int i = 0; i < n_queries; ++i) {
      const litho::Point lo{dx(rng), dy(rng)};
      const litho::Aabb q{lo, {lo.x + qw, lo.y + qh}};
      out << i << "," << q.lo.x << "," << q.lo.y << "," << q.hi.x << ","
          << q.hi.y;
      for (std::uint32_t id : tree.range_query(q)) out << "," << id;
      out << "\n";
    }
  });
}

litho_status litho_mrc_check(const char* in_path, const char* rules_path,
                             const char* out_csv, const char* hist_csv,
                             int* violation_count) {
  if (!in_path || !rules_path || !out_csv)
    return usage("litho_mrc_check: null argument");
  return guarded([&] {
    const litho::Layout layout = litho::load_layout(in_path);
    const double dbu = layout.dbu_per_nm();
    const litho::MrcRuleSet rules = litho::load_rules(rules_path).to_dbu(dbu);
    const litho::MrcReport report = litho::check_rules(first_layer(layout), rules);
    litho::write_violation_csv(out_csv, report, dbu);
    if (hist_csv) litho::write_histogram_csv(hist_csv, report);
    if (violation_count) *violation_count = int(report.violations.size());
  });
}

litho_status litho_image(const char* in_path, const char* config_path,
                         const char* out_aimg, double focus_nm, double dose,
                         int apply_resist) {
  if (!in_path || !out_aimg) return usage("litho_image: null argument");
  return guarded([&] {
    Scene scene(in_path, config_path);
    const litho::Layer& layer = first_layer(scene.layout);
    const double dbu = scene.layout.dbu_per_nm();
    const litho::OpticalModel& model = scene.config.optical;
    const litho::MaskField mask =
        litho::MaskField::from_layer(layer, scene.grid, dbu);
    const litho::TccMatrix tcc = litho::build_tcc(model, scene.grid, focus_nm);
    const litho::SocsKernelSet kernels =
        litho::decompose_tcc(tcc, scene.config.opc.energy_floor);
    const litho::AerialImage aerial = litho::image_socs(mask, kernels, dose);
    if (apply_resist) {
      const litho::ResistImage resist =
          litho::resist_filter(aerial, model.resist_sigma_nm, model.t_eff);
      litho::write_aimg(out_aimg, scene.grid, resist.values);
    } else {
      litho::write_aimg(out_aimg, scene.grid, aerial.intensity);
    }
  });
}

litho_status litho_contour(const char* in_aimg, const char* out_csv,
                           double threshold) {
  if (!in_aimg || !out_csv) return usage("litho_contour: null argument");
  return guarded([&] {
    litho::ResistImage field;
    litho::read_aimg(in_aimg, field.grid, field.values);
    field.threshold = threshold;
    litho::write_contour_csv(out_csv, litho::marching_squares(field, threshold));
  });
}

litho_status litho_measure(const char* layout_path, const char* config_path,
                           const char* in_aimg, const char* out_csv,
                           double threshold, double search_radius_nm) {
  if (!layout_path || !in_aimg || !out_csv)
    return usage("litho_measure: null argument");
  return guarded([&] {
    Scene scene(layout_path, config_path);
    litho::ResistImage field;
    litho::read_aimg(in_aimg, field.grid, field.values);
    if (field.grid.nx != scene.grid.nx || field.grid.ny != scene.grid.ny ||
        field.grid.pitch_nm != scene.grid.pitch_nm)
      throw std::runtime_error("image does not match the layout window");
    field.grid = scene.grid;  // restore the window origin the AIMG cannot carry
    field.threshold = threshold;
    const litho::ContourSet contours = litho::marching_squares(field, threshold);
    const litho::SegmentedMask seg = litho::segment_layout(
        first_layer(scene.layout), scene.layout.dbu_per_nm(),
        scene.config.opc.seg_length_nm);
    const std::vector<litho::Gauge> gauges = litho::make_gauges(seg);
    litho::write_epe_csv(
        out_csv, litho::measure_epe(contours, gauges, search_radius_nm));
  });
}

litho_status litho_opc(const char* in_path, const char* config_path,
                       const char* rules_path, const char* out_path,
                       const char* report_csv, const char* warm_start_csv,
                       int* iterations, int* converged) {
  if (!in_path || !rules_path || !out_path) return usage("litho_opc: null argument");
  return guarded([&] {
    litho::Layout layout = litho::load_layout(in_path);
    const double dbu = layout.dbu_per_nm();
    litho::RunConfig config =
        config_path ? litho::load_config(config_path) : litho::RunConfig{};
    const litho::MrcRuleSet rules = litho::load_rules(rules_path).to_dbu(dbu);
    const litho::Layer& target = first_layer(layout);

    if (config.auto_threshold) {
      litho::OpcOptics optics;
      optics.model = config.optical;
      optics.grid = litho::make_window(target, dbu, config.opc.pitch_nm,
                                       config.opc.guard_band_nm);
      const litho::TccMatrix tcc =
          litho::build_tcc(config.optical, optics.grid, config.opc.focus.f0);
      optics.kernels.push_back(litho::decompose_tcc(tcc, config.opc.energy_floor));
      config.optical.t_eff = litho::calibrate_threshold(
          target, dbu, optics, config.opc.seg_length_nm);
    }

    std::vector<litho::coord_t> init;
    if (warm_start_csv) {
      std::ifstream in(warm_start_csv);
      if (!in)
        throw std::runtime_error(std::string("cannot open ") + warm_start_csv);
      std::string line;
      std::vector<std::pair<std::size_t, litho::coord_t>> rows;
      while (std::getline(in, line)) {
        if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0])))
          continue;
        std::istringstream ls(line);
        std::size_t id;
        long long off;
        char comma;
        if (ls >> id >> comma >> off) rows.emplace_back(id, litho::coord_t(off));
      }
      std::size_t max_id = 0;
      for (const auto& [id, off] : rows) max_id = std::max(max_id, id);
      init.assign(max_id + 1, 0);
      for (const auto& [id, off] : rows) init[id] = off;
    }

    const litho::OpcResult result =
        litho::run_opc(target, dbu, config.optical, rules, config.opc,
                       init.empty() ? nullptr : &init);

    litho::Layout out;
    out.dbu_num = layout.dbu_num;
    out.dbu_den = layout.dbu_den;
    out.layers.push_back(result.corrected);
    out.layers.back().name = target.name.empty() ? "corrected" : target.name;
    litho::save_layout(out, out_path);
    if (report_csv) litho::write_opc_report_csv(report_csv, result.reports);
    if (iterations) *iterations = int(result.reports.size());
    if (converged) *converged = result.converged ? 1 : 0;
    if (!result.converged && !result.diagnostic.empty())
      g_last_error = result.diagnostic;
  });
}

litho_status litho_ai_init(const char* in_path, const char* config_path,
                           const char* out_prefix) {
  if (!in_path || !out_prefix) return usage("litho_ai_init: null argument");
  return guarded([&] {
    Scene scene(in_path, config_path);
    const litho::Layer& layer = first_layer(scene.layout);
    const double dbu = scene.layout.dbu_per_nm();
    const litho::OpticalModel& model = scene.config.optical;
    const litho::TccMatrix tcc = litho::build_tcc(model, scene.grid, 0.0);
    const litho::SocsKernelSet kernels =
        litho::decompose_tcc(tcc, scene.config.opc.energy_floor);
    const litho::FieldTensor tensor =
        litho::build_field_tensor(layer, dbu, model, kernels, scene.grid);
    const std::string prefix = out_prefix;
    litho::write_aimg(prefix + "_m0.aimg", tensor.grid, tensor.m0);
    litho::write_aimg(prefix + "_i0.aimg", tensor.grid, tensor.i0);
    litho::write_aimg(prefix + "_grad.aimg", tensor.grid, tensor.grad);
    std::ofstream norm(prefix + "_norm.csv");
    if (!norm) throw std::runtime_error("cannot write " + prefix + "_norm.csv");
    norm << "format_version," << litho::kFormatVersion << "\n";
    norm.precision(17);
    norm << "channel,offset,scale\n";
    norm << "i0," << tensor.norm_i0.offset << "," << tensor.norm_i0.scale << "\n";
    norm << "grad," << tensor.norm_grad.offset << "," << tensor.norm_grad.scale
         << "\n";
  });
}

litho_status litho_bench(const char* suite, int size, int repetitions,
                         unsigned long long seed, const char* out_csv) {
  if (!suite || !out_csv) return usage("litho_bench: null argument");
  return guarded([&] {
    const litho::BenchReport report =
        litho::run_bench(suite, size, repetitions, seed);
    litho::write_bench_csv(out_csv, report);
  });
}

double litho_amdahl_bound(double p, double s) {
  try {
    return litho::amdahl_bound(p, s);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return std::nan("");
  }
}

}  // extern "C"
