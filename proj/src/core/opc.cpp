#include "opc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "boolean.hpp"

namespace litho {

double effective_epe(double epe_f0, double epe_fp, double epe_fn, double tol_pos,
                     double tol_neg, bool drop_fn) {
  if (!(tol_neg < 0 && 0 < tol_pos))
    throw std::invalid_argument("effective_epe: need tol_neg < 0 < tol_pos");
  if (epe_f0 > tol_pos) return epe_f0 - tol_pos;
  if (epe_f0 < tol_neg) return epe_f0 - tol_neg;
  return drop_fn ? (epe_f0 + epe_fp) / 2.0 : (epe_f0 + epe_fp + epe_fn) / 3.0;
}

double propose_move_nm(double epe_eff, double meef, double gain, double max_step_nm) {
  const double m = -gain * epe_eff / meef;
  return std::clamp(m, -max_step_nm, max_step_nm);
}

namespace {

struct EdgeInfo {
  int dx, dy;   // unit direction
  coord_t len;
};

EdgeInfo edge_info(const Point& a, const Point& b) {
  if (a.x == b.x && a.y != b.y) return {0, b.y > a.y ? 1 : -1, std::abs(b.y - a.y)};
  if (a.y == b.y && a.x != b.x) return {b.x > a.x ? 1 : -1, 0, std::abs(b.x - a.x)};
  throw std::invalid_argument("opc: non-Manhattan or zero-length edge");
}

bool is_line_end_edge(const std::vector<Point>& v, std::size_t ei, int orient) {
  const std::size_t n = v.size();
  const Point& a = v[ei];
  const Point& b = v[(ei + 1) % n];
  const Point& prev = v[(ei + n - 1) % n];
  const Point& next = v[(ei + 2) % n];
  const EdgeInfo d = edge_info(a, b);
  const EdgeInfo dp = edge_info(prev, a);
  const EdgeInfo dn = edge_info(b, next);
  const bool convex_a = orient * (wide_t(dp.dx) * d.dy - wide_t(dp.dy) * d.dx) > 0;
  const bool convex_b = orient * (wide_t(d.dx) * dn.dy - wide_t(d.dy) * dn.dx) > 0;
  return convex_a && convex_b && dp.dx == -dn.dx && dp.dy == -dn.dy &&
         d.len < dp.len && d.len < dn.len;
}

}  // namespace

Layer retarget_tips(const Layer& layer, double dbu_per_nm, double pullback_nm) {
  if (pullback_nm < 0) throw std::invalid_argument("retarget_tips: negative pullback");
  const coord_t p = coord_t(std::llround(pullback_nm * dbu_per_nm));
  if (p == 0) return layer;
  Layer out = layer;
  std::string collapsed;
  for (std::size_t pi = 0; pi < out.polygons.size(); ++pi) {
    auto& v = out.polygons[pi].vertices;
    const std::size_t n = v.size();
    if (n < 4) continue;
    const int orient = signed_area2(out.polygons[pi]) > 0 ? 1 : -1;
    std::vector<std::pair<std::size_t, Point>> shifts;  // vertex -> new position
    for (std::size_t ei = 0; ei < n; ++ei) {
      if (!is_line_end_edge(v, ei, orient)) continue;
      const Point& a = v[ei];
      const Point& b = v[(ei + 1) % n];
      const EdgeInfo d = edge_info(a, b);
      // inward = opposite of the outward normal (dy, -dx)
      const int nx = d.dy, ny = -d.dx;
      shifts.emplace_back(ei, Point{a.x - nx * p, a.y - ny * p});
      shifts.emplace_back((ei + 1) % n, Point{b.x - nx * p, b.y - ny * p});
    }
    const std::vector<Point> before = v;
    for (const auto& [vi, np] : shifts) v[vi] = np;
    // opposing tips may share a flank: validate every edge kept its direction
    for (std::size_t ei = 0; !shifts.empty() && ei < n; ++ei) {
      const EdgeInfo od = edge_info(before[ei], before[(ei + 1) % n]);
      const Point& a = v[ei];
      const Point& b = v[(ei + 1) % n];
      const wide_t along = wide_t(od.dx) * (b.x - a.x) + wide_t(od.dy) * (b.y - a.y);
      if (along < 1) {
        collapsed += (collapsed.empty() ? "" : ", ") + std::to_string(pi);
        break;
      }
    }
  }
  if (!collapsed.empty())
    throw std::runtime_error("retarget_tips: pullback collapses polygon(s) " + collapsed);
  return out;
}

Grid make_window(const Layer& layer, double dbu_per_nm, double pitch_nm,
                 double guard_nm) {
  const Aabb box = bounding_box(layer);
  const double scale = 1.0 / dbu_per_nm;
  const double x0 = double(box.lo.x) * scale - guard_nm;
  const double y0 = double(box.lo.y) * scale - guard_nm;
  const double x1 = double(box.hi.x) * scale + guard_nm;
  const double y1 = double(box.hi.y) * scale + guard_nm;
  Grid g;
  g.pitch_nm = pitch_nm;
  g.origin_x_nm = x0;
  g.origin_y_nm = y0;
  g.nx = std::max(2, int(std::ceil((x1 - x0) / pitch_nm)));
  g.ny = std::max(2, int(std::ceil((y1 - y0) / pitch_nm)));
  return g;
}

OpcOptics build_optics(const Layer& target, double dbu_per_nm,
                       const OpticalModel& model, const OpcConfig& config) {
  OpcOptics optics;
  optics.model = model;
  optics.grid = make_window(target, dbu_per_nm, config.pitch_nm, config.guard_band_nm);
  for (double focus : {config.focus.f0, config.focus.fp, config.focus.fn}) {
    const TccMatrix tcc = build_tcc(model, optics.grid, focus);
    optics.kernels.push_back(decompose_tcc(tcc, config.energy_floor));
  }
  return optics;
}

double calibrate_threshold(const Layer& target, double dbu_per_nm,
                           const OpcOptics& optics, double seg_length_nm) {
  const SegmentedMask seg = segment_layout(target, dbu_per_nm, seg_length_nm);
  const std::vector<Gauge> gauges = make_gauges(seg);
  if (gauges.empty()) throw std::invalid_argument("calibrate_threshold: empty target");
  const MaskField mf = MaskField::from_layer(target, optics.grid, dbu_per_nm);
  const AerialImage img = image_socs(mf, optics.kernels[0], optics.model.dose);
  const std::vector<double> blurred =
      gaussian_blur(optics.grid, img.intensity, optics.model.resist_sigma_nm);
  double sum = 0;
  for (const auto& g : gauges) sum += sample_bilinear(optics.grid, blurred, g.x, g.y);
  return sum / double(gauges.size());
}

EpeEval evaluate_epe(const SegmentedMask& mask, const std::vector<Gauge>& gauges,
                     const OpcOptics& optics, std::size_t focus_index,
                     double search_radius_nm) {
  const Layer geom = reconstruct(mask);
  const MaskField mf = MaskField::from_layer(geom, optics.grid, mask.dbu_per_nm);
  const AerialImage img = image_socs(mf, optics.kernels[focus_index], optics.model.dose);
  EpeEval eval;
  eval.resist = resist_filter(img, optics.model.resist_sigma_nm, optics.model.t_eff);
  const ContourSet contours = marching_squares(eval.resist, optics.model.t_eff);
  eval.records = measure_epe(contours, gauges, search_radius_nm);
  return eval;
}

std::vector<double> estimate_meef(const SegmentedMask& mask,
                                  const std::vector<Gauge>& gauges,
                                  const OpcOptics& optics,
                                  const std::vector<EpeRecord>& base,
                                  const OpcConfig& config) {
  const std::size_t n = mask.segments.size();
  std::vector<double> meef(n, 1.0);
  const coord_t probe_dbu =
      std::max<coord_t>(1, coord_t(std::llround(config.meef_probe_nm * mask.dbu_per_nm)));
  const double probe_nm = double(probe_dbu) / mask.dbu_per_nm;

  // greedy batches: no two probes closer than the interaction radius
  std::vector<std::vector<std::uint32_t>> batches;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (mask.segments[i].fixed_meef) continue;
    bool placed = false;
    for (auto& batch : batches) {
      bool ok = true;
      for (std::uint32_t j : batch) {
        const double d = std::hypot(gauges[i].x - gauges[j].x, gauges[i].y - gauges[j].y);
        if (d < config.meef_batch_radius_nm) {
          ok = false;
          break;
        }
      }
      if (ok) {
        batch.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) batches.push_back({i});
  }

  for (const auto& batch : batches) {
    SegmentedMask probed = mask;
    for (std::uint32_t i : batch) probed.segments[i].offset += probe_dbu;
    const EpeEval eval =
        evaluate_epe(probed, gauges, optics, 0, config.search_radius_nm);
    for (std::uint32_t i : batch) {
      if (base[i].open || eval.records[i].open) {
        meef[i] = config.meef_max;
      } else {
        meef[i] = std::clamp((eval.records[i].epe_nm - base[i].epe_nm) / probe_nm,
                             config.meef_min, config.meef_max);
      }
    }
  }
  return meef;
}

SegmentedMask hammerhead_init(const SegmentedMask& mask, const MrcRuleSet& rules,
                              double head_width_nm, double head_length_nm) {
  const coord_t len_dbu = coord_t(std::llround(head_length_nm * mask.dbu_per_nm));
  const coord_t wid_dbu = coord_t(std::llround(head_width_nm * mask.dbu_per_nm));
  if (len_dbu == 0 && wid_dbu == 0) return mask;
  const std::size_t n = mask.segments.size();
  std::vector<coord_t> proposed(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (mask.segments[i].role != SegRole::LineEnd) continue;
    proposed[i] = len_dbu;
    const MaskSegment& end = mask.segments[i];
    // flanking pieces: segments of neighbor edges that touch the end edge
    for (std::uint32_t j = 0; j < n; ++j) {
      const MaskSegment& s = mask.segments[j];
      if (s.poly != end.poly || s.edge == end.edge) continue;
      if (s.b == end.a || s.a == end.b) proposed[j] = std::max(proposed[j], wid_dbu);
    }
  }
  return apply_moves(mask, limit_moves(mask, proposed, rules));
}

namespace {

ConditionStats make_stats(const std::vector<EpeRecord>& recs) {
  ConditionStats st;
  double sum = 0, sum2 = 0;
  int count = 0;
  for (const auto& r : recs) {
    if (r.open) {
      ++st.open_count;
      continue;
    }
    st.max_abs = std::max(st.max_abs, std::abs(r.epe_nm));
    sum += r.epe_nm;
    sum2 += r.epe_nm * r.epe_nm;
    ++count;
  }
  if (count > 0) {
    st.mean = sum / count;
    st.rms = std::sqrt(sum2 / count);
  }
  return st;
}

}  // namespace

OpcResult run_opc(const Layer& target, double dbu_per_nm, const OpticalModel& model,
                  const MrcRuleSet& rules, const OpcConfig& config,
                  const std::vector<coord_t>* init_offsets) {
  Layer tgt = config.retarget_pullback_nm > 0
                  ? retarget_tips(target, dbu_per_nm, config.retarget_pullback_nm)
                  : heal(target);
  SegmentedMask seg = segment_layout(tgt, dbu_per_nm, config.seg_length_nm);

  // strategy flags
  const coord_t short_dbu = coord_t(std::llround(config.short_line_nm * dbu_per_nm));
  for (auto& s : seg.segments) {
    const Aabb box = bounding_box(seg.base.polygons[s.poly]);
    const coord_t long_dim = std::max(box.hi.x - box.lo.x, box.hi.y - box.lo.y);
    if (config.lateral_lock && long_dim < short_dbu && s.role != SegRole::LineEnd)
      s.lock_lateral = true;
    if (config.drop_fn_line_ends && s.role == SegRole::LineEnd) s.drop_fn = true;
  }
  if (config.driver_mask_radius_nm > 0) {
    const coord_t rad = coord_t(std::llround(config.driver_mask_radius_nm * dbu_per_nm));
    const coord_t min_w =
        coord_t(std::llround(config.driver_mask_min_width_nm * dbu_per_nm));
    std::vector<Aabb> wide_boxes;
    std::vector<std::uint32_t> wide_polys;
    for (std::uint32_t pi = 0; pi < seg.base.polygons.size(); ++pi) {
      const Aabb box = bounding_box(seg.base.polygons[pi]);
      if (std::min(box.hi.x - box.lo.x, box.hi.y - box.lo.y) >= min_w) {
        wide_boxes.push_back(box);
        wide_polys.push_back(pi);
      }
    }
    for (auto& s : seg.segments) {
      for (std::size_t k = 0; k < wide_boxes.size(); ++k) {
        if (wide_polys[k] == s.poly) continue;
        Aabb grown = wide_boxes[k];
        grown.lo.x -= rad;
        grown.lo.y -= rad;
        grown.hi.x += rad;
        grown.hi.y += rad;
        const Point mid{(s.a.x + s.b.x) / 2, (s.a.y + s.b.y) / 2};
        if (grown.contains(mid)) {
          s.fixed_meef = true;
          break;
        }
      }
    }
  }

  if (init_offsets) {
    if (init_offsets->size() != seg.segments.size())
      throw std::invalid_argument("run_opc: init offset size mismatch");
    // the limiter splits pair slack conservatively, so a large seed applied
    // in one shot falls short of offsets that are reachable incrementally;
    // iterate the residual to the limiter's fixed point
    for (int pass = 0; pass < 8; ++pass) {
      std::vector<coord_t> residual(seg.segments.size(), 0);
      bool pending = false;
      for (std::size_t i = 0; i < seg.segments.size(); ++i) {
        residual[i] = (*init_offsets)[i] - seg.segments[i].offset;
        pending = pending || residual[i] != 0;
      }
      if (!pending) break;
      const std::vector<MoveLimit> limits = limit_moves(seg, residual, rules);
      bool moved = false;
      for (const auto& l : limits) moved = moved || l.allowed != 0;
      if (!moved) break;
      seg = apply_moves(seg, limits);
    }
  }
  if (config.hammerhead)
    seg = hammerhead_init(seg, rules, config.head_width_nm, config.head_length_nm);

  const OpcOptics optics = build_optics(tgt, dbu_per_nm, model, config);
  const std::vector<Gauge> gauges = make_gauges(seg);
  const std::size_t nseg = seg.segments.size();

  OpcResult result;
  std::vector<double> meef(nseg, 1.0);
  bool meef_valid = false;
  double gain = config.gain;
  double prev_max = std::numeric_limits<double>::infinity();
  int rising = 0;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const EpeEval e0 = evaluate_epe(seg, gauges, optics, 0, config.search_radius_nm);
    const EpeEval ep = evaluate_epe(seg, gauges, optics, 1, config.search_radius_nm);
    const EpeEval en = evaluate_epe(seg, gauges, optics, 2, config.search_radius_nm);

    std::vector<double> eff(nseg, 0.0);
    std::vector<bool> open(nseg, false);
    double max_eff = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) {
      open[i] = e0.records[i].open || ep.records[i].open || en.records[i].open;
      if (open[i]) continue;
      if (config.through_focus) {
        eff[i] = effective_epe(e0.records[i].epe_nm, ep.records[i].epe_nm,
                               en.records[i].epe_nm, config.tol_pos_nm,
                               config.tol_neg_nm, seg.segments[i].drop_fn);
      } else {
        // tolerance branches only: in-window errors are accepted as-is
        const double f0 = e0.records[i].epe_nm;
        eff[i] = f0 > config.tol_pos_nm   ? f0 - config.tol_pos_nm
                 : f0 < config.tol_neg_nm ? f0 - config.tol_neg_nm
                                          : 0.0;
      }
      max_eff = std::max(max_eff, std::abs(eff[i]));
    }
    const int open_total = int(std::count(open.begin(), open.end(), true));

    IterationReport rep;
    rep.iteration = iter;
    rep.f0 = make_stats(e0.records);
    rep.fp = make_stats(ep.records);
    rep.fn = make_stats(en.records);
    rep.max_abs_eff = max_eff;
    rep.gain = gain;

    if (max_eff <= config.convergence_nm && open_total == 0) {
      rep.converged = true;
      result.reports.push_back(rep);
      result.converged = true;
      break;
    }

    if (max_eff > prev_max) {
      if (++rising >= 3) {
        gain /= 2;
        rising = 0;
        if (gain < 0.1) {
          result.reports.push_back(rep);
          result.diagnostic = "diverged: gain fell below 0.1 at iteration " +
                              std::to_string(iter);
          break;
        }
      }
    } else {
      rising = 0;
    }
    prev_max = max_eff;

    if (!meef_valid || (iter - 1) % config.meef_refresh == 0) {
      meef = estimate_meef(seg, gauges, optics, e0.records, config);
      meef_valid = true;
    }

    std::vector<coord_t> proposed(nseg, 0);
    for (std::size_t i = 0; i < nseg; ++i) {
      double move_nm;
      if (open[i]) {
        // defect priority: bounded recovery step toward material add/remove
        const double v =
            sample_bilinear(optics.grid, e0.resist.values, gauges[i].x, gauges[i].y);
        move_nm = v < optics.model.t_eff ? config.max_step_nm : -config.max_step_nm;
      } else if (seg.segments[i].lock_lateral) {
        move_nm = 0.0;
      } else {
        const double m = seg.segments[i].fixed_meef ? 1.0 : meef[i];
        move_nm = propose_move_nm(eff[i], m, gain, config.max_step_nm);
      }
      proposed[i] = coord_t(std::llround(move_nm * dbu_per_nm));
    }

    const std::vector<MoveLimit> limits = limit_moves(seg, proposed, rules);
    for (const auto& l : limits) {
      if (l.clamped && l.allowed != l.proposed) ++rep.clamp_count;
      if (l.allowed != 0) ++rep.moved_count;
    }
    seg = apply_moves(seg, limits);
    result.reports.push_back(rep);
  }

  result.corrected = reconstruct(seg);
  {
    const MrcReport final_check = check_rules(result.corrected, rules);
    if (!final_check.clean())
      throw std::runtime_error("run_opc: final mask violates MRC");
  }
  result.mask = std::move(seg);
  return result;
}

}  // namespace litho
