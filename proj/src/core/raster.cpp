#include "raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "boolean.hpp"

namespace litho {

namespace {

struct DPoly {
  std::vector<std::pair<double, double>> v;
};

double poly_area(const DPoly& p) {
  double a = 0;
  for (std::size_t i = 0, n = p.v.size(); i < n; ++i) {
    const auto& [x0, y0] = p.v[i];
    const auto& [x1, y1] = p.v[(i + 1) % n];
    a += x0 * y1 - x1 * y0;
  }
  return 0.5 * a;
}

// Sutherland-Hodgman clip against an axis-aligned half-plane. The crossing
// point's clipped coordinate is pinned exactly to the boundary so gridded
// inputs rasterize exactly (no drift from t * (x1 - x0) rounding).
// axis 0: keep sign*(x - bound) >= 0; axis 1: same for y.
DPoly clip_axis(const DPoly& in, int axis, double bound, double sign) {
  DPoly out;
  const std::size_t n = in.v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [x0, y0] = in.v[i];
    const auto& [x1, y1] = in.v[(i + 1) % n];
    const double d0 = sign * ((axis == 0 ? x0 : y0) - bound);
    const double d1 = sign * ((axis == 0 ? x1 : y1) - bound);
    if (d0 >= 0) out.v.emplace_back(x0, y0);
    if ((d0 >= 0) != (d1 >= 0)) {
      const double t = d0 / (d0 - d1);
      if (axis == 0)
        out.v.emplace_back(bound, y0 + t * (y1 - y0));
      else
        out.v.emplace_back(x0 + t * (x1 - x0), bound);
    }
  }
  return out;
}

}  // namespace

std::vector<double> rasterize_layer(const Layer& layer, const Grid& grid,
                                    double dbu_per_nm) {
  if (grid.pitch_nm <= 0) throw std::invalid_argument("rasterize_layer: nonpositive pitch");
  if (grid.nx <= 0 || grid.ny <= 0) throw std::invalid_argument("rasterize_layer: empty grid");
  std::vector<double> pix(grid.size(), 0.0);
  const Layer healed = heal(layer);
  const double scale = 1.0 / dbu_per_nm;  // dbu -> nm
  const double inv_area = 1.0 / (grid.pitch_nm * grid.pitch_nm);

  for (const auto& poly : healed.polygons) {
    if (poly.vertices.size() < 3) continue;
    DPoly dp;
    dp.v.reserve(poly.vertices.size());
    double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
    for (const auto& p : poly.vertices) {
      const double x = (double(p.x) * scale - grid.origin_x_nm) / grid.pitch_nm;
      const double y = (double(p.y) * scale - grid.origin_y_nm) / grid.pitch_nm;
      dp.v.emplace_back(x, y);
      minx = std::min(minx, x);
      maxx = std::max(maxx, x);
      miny = std::min(miny, y);
      maxy = std::max(maxy, y);
    }
    // holes are CW in healed output; their signed area subtracts
    const int iy0 = std::max(0, int(std::floor(miny)));
    const int iy1 = std::min(grid.ny - 1, int(std::ceil(maxy)));
    const int ix0 = std::max(0, int(std::floor(minx)));
    const int ix1 = std::min(grid.nx - 1, int(std::ceil(maxx)));
    for (int iy = iy0; iy <= iy1; ++iy) {
      const DPoly row =
          clip_axis(clip_axis(dp, 1, double(iy), 1.0), 1, double(iy + 1), -1.0);
      if (row.v.size() < 3) continue;
      for (int ix = ix0; ix <= ix1; ++ix) {
        const DPoly cell = clip_axis(clip_axis(row, 0, double(ix), 1.0), 0,
                                     double(ix + 1), -1.0);
        if (cell.v.size() < 3) continue;
        pix[grid.index(ix, iy)] += poly_area(cell);
      }
    }
  }
  for (auto& p : pix) p = std::clamp(p, 0.0, 1.0);
  (void)inv_area;  // areas computed in pixel units already
  return pix;
}

}  // namespace litho
