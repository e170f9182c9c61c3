#pragma once
// Exact area-weighted rasterization of polygon layers onto a uniform grid.

#include <vector>

#include "geometry.hpp"

namespace litho {

struct Grid {
  int nx = 0;
  int ny = 0;
  double pitch_nm = 1.0;
  double origin_x_nm = 0.0;  // lower-left corner of pixel (0,0)
  double origin_y_nm = 0.0;

  std::size_t size() const { return std::size_t(nx) * ny; }
  std::size_t index(int ix, int iy) const { return std::size_t(iy) * nx + ix; }
  friend bool operator==(const Grid&, const Grid&) = default;
};

// Pixel value = covered-area fraction in [0,1]. The layer is healed first so
// overlaps and holes resolve under the nonzero winding rule.
std::vector<double> rasterize_layer(const Layer& layer, const Grid& grid,
                                    double dbu_per_nm);

}  // namespace litho
