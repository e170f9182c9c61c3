#include "io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace litho {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, unused] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw std::runtime_error("unknown key \"" + key + "\" in " + where);
  }
}

void check_version(const json& j, const std::string& path) {
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kFormatVersion)
    throw std::runtime_error(path + ": missing or unsupported format_version");
}

coord_t as_coord(const json& v, const std::string& where) {
  if (!v.is_number_integer())
    throw std::runtime_error("non-integer coordinate in " + where);
  const std::int64_t x = v.get<std::int64_t>();
  if (x != coord_t(x)) throw std::runtime_error("coordinate overflow in " + where);
  return coord_t(x);
}

}  // namespace

Layout load_layout(const std::string& path) {
  const json j = parse_file(path);
  check_version(j, path);
  check_keys(j, {"format_version", "dbu_per_nm", "layers"}, path);
  Layout layout;
  if (!j.contains("dbu_per_nm")) throw std::runtime_error(path + ": missing dbu_per_nm");
  const json& d = j["dbu_per_nm"];
  if (d.is_number_integer()) {
    layout.dbu_num = d.get<std::int64_t>();
    layout.dbu_den = 1;
  } else if (d.is_array() && d.size() == 2) {
    layout.dbu_num = d[0].get<std::int64_t>();
    layout.dbu_den = d[1].get<std::int64_t>();
  } else {
    throw std::runtime_error(path + ": dbu_per_nm must be an integer or [num, den]");
  }
  if (layout.dbu_num <= 0 || layout.dbu_den <= 0)
    throw std::runtime_error(path + ": dbu_per_nm must be positive");
  for (const json& jl : j.value("layers", json::array())) {
    check_keys(jl, {"name", "polygons"}, path + " layer");
    Layer layer;
    layer.name = jl.value("name", "");
    for (std::size_t pi = 0; pi < jl.value("polygons", json::array()).size(); ++pi) {
      const json& jp = jl["polygons"][pi];
      Polygon poly;
      const std::string where =
          path + " layer \"" + layer.name + "\" polygon " + std::to_string(pi);
      for (const json& jv : jp) {
        if (!jv.is_array() || jv.size() != 2)
          throw std::runtime_error("bad vertex in " + where);
        poly.vertices.push_back({as_coord(jv[0], where), as_coord(jv[1], where)});
      }
      layer.polygons.push_back(std::move(poly));
    }
    layout.layers.push_back(std::move(layer));
  }
  return layout;
}

void save_layout(const Layout& layout, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  if (layout.dbu_den == 1) {
    j["dbu_per_nm"] = layout.dbu_num;
  } else {
    j["dbu_per_nm"] = json::array({layout.dbu_num, layout.dbu_den});
  }
  j["layers"] = json::array();
  for (const auto& layer : layout.layers) {
    json jl;
    jl["name"] = layer.name;
    jl["polygons"] = json::array();
    for (const auto& poly : layer.polygons) {
      json jp = json::array();
      for (const auto& v : poly.vertices)
        jp.push_back(json::array({std::int64_t(v.x), std::int64_t(v.y)}));
      jl["polygons"].push_back(std::move(jp));
    }
    j["layers"].push_back(std::move(jl));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << "\n";
}

MrcRuleSet MrcRulesNm::to_dbu(double dbu_per_nm) const {
  auto conv = [&](double nm) { return coord_t(std::llround(nm * dbu_per_nm)); };
  MrcRuleSet r;
  r.min_space = conv(min_space);
  r.min_width = conv(min_width);
  r.min_internal_c2c = conv(min_internal_c2c);
  r.min_external_c2c = conv(min_external_c2c);
  r.min_notch = conv(min_notch);
  r.min_nub = conv(min_nub);
  r.min_jog = conv(min_jog);
  r.min_area = wide_t(std::llround(min_area * dbu_per_nm * dbu_per_nm));
  return r;
}

MrcRulesNm load_rules(const std::string& path) {
  const json j = parse_file(path);
  check_version(j, path);
  check_keys(j,
             {"format_version", "min_space", "min_width", "min_internal_c2c",
              "min_external_c2c", "min_notch", "min_nub", "min_jog", "min_area"},
             path);
  MrcRulesNm r;
  r.min_space = j.value("min_space", 0.0);
  r.min_width = j.value("min_width", 0.0);
  r.min_internal_c2c = j.value("min_internal_c2c", 0.0);
  r.min_external_c2c = j.value("min_external_c2c", 0.0);
  r.min_notch = j.value("min_notch", 0.0);
  r.min_nub = j.value("min_nub", 0.0);
  r.min_jog = j.value("min_jog", 0.0);
  r.min_area = j.value("min_area", 0.0);
  return r;
}

void save_rules(const MrcRulesNm& r, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["min_space"] = r.min_space;
  j["min_width"] = r.min_width;
  j["min_internal_c2c"] = r.min_internal_c2c;
  j["min_external_c2c"] = r.min_external_c2c;
  j["min_notch"] = r.min_notch;
  j["min_nub"] = r.min_nub;
  j["min_jog"] = r.min_jog;
  j["min_area"] = r.min_area;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << "\n";
}

RunConfig load_config(const std::string& path) {
  const json j = parse_file(path);
  check_version(j, path);
  check_keys(j, {"format_version", "optical", "opc"}, path);
  RunConfig cfg;
  if (j.contains("optical")) {
    const json& o = j["optical"];
    check_keys(o,
               {"wavelength_nm", "na", "source", "high_na_defocus", "resist_sigma_nm",
                "t_eff", "tau_print", "tau_round", "dose"},
               path + " optical");
    OpticalModel& m = cfg.optical;
    m.wavelength_nm = o.value("wavelength_nm", m.wavelength_nm);
    m.na = o.value("na", m.na);
    if (!(m.na > 0 && m.na < 1) || m.wavelength_nm <= 0)
      throw std::runtime_error(path + ": need 0 < NA < 1 and wavelength > 0");
    m.high_na_defocus = o.value("high_na_defocus", false);
    m.resist_sigma_nm = o.value("resist_sigma_nm", m.resist_sigma_nm);
    m.tau_print = o.value("tau_print", m.tau_print);
    m.tau_round = o.value("tau_round", m.tau_round);
    m.dose = o.value("dose", m.dose);
    if (o.contains("t_eff")) {
      m.t_eff = o["t_eff"].get<double>();
      cfg.auto_threshold = false;
    }
    if (o.contains("source")) {
      const json& s = o["source"];
      check_keys(s, {"type", "sigma_in", "sigma_out", "grid_n", "path"},
                 path + " source");
      const std::string type = s.value("type", "point");
      const int grid_n = s.value("grid_n", 21);
      if (type == "point") {
        m.source = make_point_source();
      } else if (type == "circular") {
        m.source = make_circular_source(s.value("sigma_out", 0.5), grid_n);
      } else if (type == "annular") {
        m.source = make_annular_source(s.value("sigma_in", 0.4),
                                       s.value("sigma_out", 0.8), grid_n);
      } else if (type == "csv") {
        std::ifstream in(s.value("path", ""));
        if (!in) throw std::runtime_error(path + ": cannot open source csv");
        SourceMap src;
        double sx, sy, w;
        char c1, c2;
        while (in >> sx >> c1 >> sy >> c2 >> w) src.points.push_back({sx, sy, w});
        src.normalize();
        m.source = src;
      } else {
        throw std::runtime_error(path + ": unknown source type " + type);
      }
    }
  }
  if (j.contains("opc")) {
    const json& o = j["opc"];
    check_keys(o,
               {"focus",          "dose",
                "tol_pos_nm",     "tol_neg_nm",
                "max_iterations", "convergence_nm",
                "gain",           "meef_min",
                "meef_max",       "max_step_nm",
                "seg_length_nm",  "search_radius_nm",
                "meef_refresh",   "meef_probe_nm",
                "meef_batch_radius_nm", "through_focus",
                "hammerhead",     "head_width_nm",
                "head_length_nm", "retarget_pullback_nm",
                "lateral_lock",   "short_line_nm",
                "drop_fn_line_ends", "drop_fn_extends_meef",
                "driver_mask_radius_nm", "driver_mask_min_width_nm",
                "guard_band_nm",  "pitch_nm",
                "energy_floor"},
               path + " opc");
    OpcConfig& c = cfg.opc;
    if (o.contains("focus")) {
      const json& f = o["focus"];
      check_keys(f, {"f0", "fp", "fn"}, path + " focus");
      c.focus.f0 = f.value("f0", c.focus.f0);
      c.focus.fp = f.value("fp", c.focus.fp);
      c.focus.fn = f.value("fn", c.focus.fn);
      if (!(c.focus.fn < c.focus.f0 && c.focus.f0 < c.focus.fp))
        throw std::runtime_error(path + ": need fn < f0 < fp");
    }
    c.dose = o.value("dose", c.dose);
    c.tol_pos_nm = o.value("tol_pos_nm", c.tol_pos_nm);
    c.tol_neg_nm = o.value("tol_neg_nm", c.tol_neg_nm);
    if (!(c.tol_neg_nm < 0 && 0 < c.tol_pos_nm))
      throw std::runtime_error(path + ": need tol_neg < 0 < tol_pos");
    c.max_iterations = o.value("max_iterations", c.max_iterations);
    c.convergence_nm = o.value("convergence_nm", c.convergence_nm);
    c.gain = o.value("gain", c.gain);
    if (!(c.gain > 0 && c.gain <= 2))
      throw std::runtime_error(path + ": gain outside (0, 2]");
    c.meef_min = o.value("meef_min", c.meef_min);
    c.meef_max = o.value("meef_max", c.meef_max);
    if (c.meef_min <= 0) throw std::runtime_error(path + ": meef_min must be > 0");
    c.max_step_nm = o.value("max_step_nm", c.max_step_nm);
    c.seg_length_nm = o.value("seg_length_nm", c.seg_length_nm);
    c.search_radius_nm = o.value("search_radius_nm", c.search_radius_nm);
    c.meef_refresh = o.value("meef_refresh", c.meef_refresh);
    c.meef_probe_nm = o.value("meef_probe_nm", c.meef_probe_nm);
    c.meef_batch_radius_nm = o.value("meef_batch_radius_nm", c.meef_batch_radius_nm);
    c.through_focus = o.value("through_focus", c.through_focus);
    c.hammerhead = o.value("hammerhead", c.hammerhead);
    c.head_width_nm = o.value("head_width_nm", c.head_width_nm);
    c.head_length_nm = o.value("head_length_nm", c.head_length_nm);
    c.retarget_pullback_nm = o.value("retarget_pullback_nm", c.retarget_pullback_nm);
    c.lateral_lock = o.value("lateral_lock", c.lateral_lock);
    c.short_line_nm = o.value("short_line_nm", c.short_line_nm);
    c.drop_fn_line_ends = o.value("drop_fn_line_ends", c.drop_fn_line_ends);
    c.drop_fn_extends_meef = o.value("drop_fn_extends_meef", c.drop_fn_extends_meef);
    c.driver_mask_radius_nm = o.value("driver_mask_radius_nm", c.driver_mask_radius_nm);
    c.driver_mask_min_width_nm =
        o.value("driver_mask_min_width_nm", c.driver_mask_min_width_nm);
    c.guard_band_nm = o.value("guard_band_nm", c.guard_band_nm);
    c.pitch_nm = o.value("pitch_nm", c.pitch_nm);
    c.energy_floor = o.value("energy_floor", c.energy_floor);
  }
  return cfg;
}

void save_config(const RunConfig& cfg, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  json o;
  o["wavelength_nm"] = cfg.optical.wavelength_nm;
  o["na"] = cfg.optical.na;
  o["high_na_defocus"] = cfg.optical.high_na_defocus;
  o["resist_sigma_nm"] = cfg.optical.resist_sigma_nm;
  if (!cfg.auto_threshold) o["t_eff"] = cfg.optical.t_eff;
  o["tau_print"] = cfg.optical.tau_print;
  o["tau_round"] = cfg.optical.tau_round;
  o["dose"] = cfg.optical.dose;
  j["optical"] = std::move(o);
  json c;
  c["focus"] = {{"f0", cfg.opc.focus.f0}, {"fp", cfg.opc.focus.fp},
                {"fn", cfg.opc.focus.fn}};
  c["tol_pos_nm"] = cfg.opc.tol_pos_nm;
  c["tol_neg_nm"] = cfg.opc.tol_neg_nm;
  c["max_iterations"] = cfg.opc.max_iterations;
  c["convergence_nm"] = cfg.opc.convergence_nm;
  c["gain"] = cfg.opc.gain;
  c["max_step_nm"] = cfg.opc.max_step_nm;
  c["seg_length_nm"] = cfg.opc.seg_length_nm;
  c["pitch_nm"] = cfg.opc.pitch_nm;
  c["guard_band_nm"] = cfg.opc.guard_band_nm;
  j["opc"] = std::move(c);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << "\n";
}

void write_aimg(const std::string& path, const Grid& grid,
                const std::vector<double>& values) {
  if (values.size() != grid.size())
    throw std::invalid_argument("write_aimg: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write("AIMG", 4);
  const std::uint32_t w = std::uint32_t(grid.nx), h = std::uint32_t(grid.ny);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(&grid.pitch_nm), 8);
  out.write(reinterpret_cast<const char*>(values.data()),
            std::streamsize(values.size() * 8));
}

void read_aimg(const std::string& path, Grid& grid, std::vector<double>& values) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AIMG", 4) != 0)
    throw std::runtime_error(path + ": not an AIMG file");
  std::uint32_t w = 0, h = 0;
  double pitch = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  in.read(reinterpret_cast<char*>(&pitch), 8);
  if (!in || w == 0 || h == 0 || pitch <= 0)
    throw std::runtime_error(path + ": bad AIMG header");
  grid = Grid{int(w), int(h), pitch, 0.0, 0.0};
  values.resize(std::size_t(w) * h);
  in.read(reinterpret_cast<char*>(values.data()), std::streamsize(values.size() * 8));
  if (!in) throw std::runtime_error(path + ": truncated AIMG payload");
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "format_version," << kFormatVersion << "\n";
  out.precision(17);
  return out;
}

}  // namespace

void write_contour_csv(const std::string& path, const ContourSet& contours) {
  auto out = open_csv(path);
  out << "contour_id,vertex_index,x_nm,y_nm\n";
  for (std::size_t li = 0; li < contours.loops.size(); ++li) {
    const auto& loop = contours.loops[li];
    for (std::size_t i = 0; i < loop.size(); ++i)
      out << li << "," << i << "," << loop.xs[i] << "," << loop.ys[i] << "\n";
  }
}

void write_epe_csv(const std::string& path, const std::vector<EpeRecord>& records) {
  auto out = open_csv(path);
  out << "segment_id,epe_nm,open\n";
  for (const auto& r : records)
    out << r.segment_id << "," << r.epe_nm << "," << (r.open ? 1 : 0) << "\n";
}

void write_violation_csv(const std::string& path, const MrcReport& report,
                         double dbu_per_nm) {
  auto out = open_csv(path);
  out << "rule,measured_dbu,measured_nm,poly_a,poly_b,x_dbu,y_dbu\n";
  for (const auto& v : report.violations) {
    out << mrc_rule_name(v.rule) << "," << v.measured << ","
        << v.measured / dbu_per_nm << "," << v.poly_a << "," << v.poly_b << ","
        << v.location.x << "," << v.location.y << "\n";
  }
}

void write_histogram_csv(const std::string& path, const MrcReport& report) {
  auto out = open_csv(path);
  out << "rule,measured_over_threshold\n";
  for (std::size_t r = 0; r < report.histogram.ratios.size(); ++r) {
    for (double ratio : report.histogram.ratios[r])
      out << mrc_rule_name(MrcRule(r)) << "," << ratio << "\n";
  }
}

void write_opc_report_csv(const std::string& path,
                          const std::vector<IterationReport>& reports) {
  auto out = open_csv(path);
  out << "iteration,max_abs_eff_nm,gain,clamp_count,moved_count,converged,"
         "f0_max,f0_mean,f0_rms,f0_open,"
         "fp_max,fp_mean,fp_rms,fp_open,"
         "fn_max,fn_mean,fn_rms,fn_open\n";
  for (const auto& r : reports) {
    out << r.iteration << "," << r.max_abs_eff << "," << r.gain << ","
        << r.clamp_count << "," << r.moved_count << "," << (r.converged ? 1 : 0);
    for (const ConditionStats* st : {&r.f0, &r.fp, &r.fn}) {
      out << "," << st->max_abs << "," << st->mean << "," << st->rms << ","
          << st->open_count;
    }
    out << "\n";
  }
}

}  // namespace litho
