#pragma once
// Serialization: JSON layouts, rule decks and run configs (fail-fast on
// unknown keys), the AIMG binary image format, and CSV report emission.
// Every artifact carries a format_version.

#include <string>
#include <vector>

#include "contour.hpp"
#include "mrc.hpp"
#include "opc.hpp"

namespace litho {

inline constexpr int kFormatVersion = 1;

// JSON layout: {format_version, dbu_per_nm, layers:[{name, polygons}]}
Layout load_layout(const std::string& path);
void save_layout(const Layout& layout, const std::string& path);

// Rule deck: nm values, eight keys, absent = disabled.
struct MrcRulesNm {
  double min_space = 0, min_width = 0, min_internal_c2c = 0, min_external_c2c = 0,
         min_notch = 0, min_nub = 0, min_jog = 0, min_area = 0;  // area in nm^2

  MrcRuleSet to_dbu(double dbu_per_nm) const;
};
MrcRulesNm load_rules(const std::string& path);
void save_rules(const MrcRulesNm& rules, const std::string& path);

struct RunConfig {
  OpticalModel optical;
  OpcConfig opc;
  bool auto_threshold = true;  // calibrate t_eff from the target when true
};
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);

// AIMG binary: magic "AIMG", u32 width, u32 height, f64 pitch_nm, row-major
// f64 samples. The grid origin is a convention of the producing window.
void write_aimg(const std::string& path, const Grid& grid,
                const std::vector<double>& values);
void read_aimg(const std::string& path, Grid& grid, std::vector<double>& values);

// CSV reports (first line: format_version,N)
void write_contour_csv(const std::string& path, const ContourSet& contours);
void write_epe_csv(const std::string& path, const std::vector<EpeRecord>& records);
void write_violation_csv(const std::string& path, const MrcReport& report,
                         double dbu_per_nm);
void write_histogram_csv(const std::string& path, const MrcReport& report);
void write_opc_report_csv(const std::string& path,
                          const std::vector<IterationReport>& reports);

}  // namespace litho
