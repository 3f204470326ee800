#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "impplan/envworld.hpp"

namespace impplan {

struct GridD {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  GridD() = default;
  GridD(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}
  double& at(std::size_t ix, std::size_t iy) { return v[iy * cols + ix]; }
  double at(std::size_t ix, std::size_t iy) const { return v[iy * cols + ix]; }
};

// Scalar field over the workspace, bilinearly interpolable with analytic
// gradients. Cell (ix, iy) has its center at
// (origin_x + (ix+0.5)*res, origin_y + (iy+0.5)*res).
struct CostMap {
  GridD grid;
  double resolution = 0.1;
  double origin_x = 0.0;
  double origin_y = 0.0;
};

struct HeightMap {
  GridD grid;
  double resolution = 0.1;
  double origin_x = 0.0;
  double origin_y = 0.0;
};

struct SmoothingConfig {
  double sigma1 = 2.0;           // cells, pre-filter
  double sigma2 = 3.0;           // cells, post-filter
  double gradient_scale = 0.2;   // cost per meter of signed-distance shaping
  double inversion_scale = 0.2;  // cost per meter of lowest-cost centering
};

struct InterpSample {
  double value = 0.0;
  double ddx = 0.0;
  double ddy = 0.0;
  bool out_of_bounds = false;  // query clamped to the cell-center hull
};

// Separable Gaussian, kernel truncated at radius ceil(3*sigma) and
// renormalized; borders replicate the edge cells. Constant grids are
// reproduced exactly.
GridD gaussian_filter(const GridD& grid, double sigma);

// Exact Euclidean signed distance in meters: positive inside the mask,
// negative outside, magnitude = distance to the nearest opposite-value cell
// center. Degenerate masks (all true or all false) return all zeros.
GridD signed_distance(const std::vector<uint8_t>& mask, std::size_t rows, std::size_t cols,
                      double resolution);

// Semantic costmap of the environment:
//  (1) per-cell class group cost, (2) Gaussian sigma1, (3) inside every
//  region of a non-minimum cost group the cost rises with the signed
//  distance from the boundary (capped at the inter-group gap so class
//  ordering survives), (4) inside minimum-cost-group regions it falls
//  toward the region center (floored at 0), (5) Gaussian sigma2.
CostMap build_costmap(const Environment2D& env, const CostTable& table,
                      const SmoothingConfig& cfg);

// Same pipeline on the binary geometry-only view: obstacle-group cells get
// c_obs, everything else c_free.
CostMap geometric_costmap(const Environment2D& env, const CostTable& table,
                          const SmoothingConfig& cfg);

HeightMap build_heightmap(const Environment2D& env);

InterpSample interpolate(const CostMap& map, double x, double y);
InterpSample height_at(const HeightMap& map, double x, double y);

// "IPCM1" binary format: magic, u32 rows, u32 cols, f64 resolution, f64
// origin_x, f64 origin_y, row-major f64 values, little-endian.
void save_ipcm(const CostMap& map, const std::string& path);
CostMap load_ipcm(const std::string& path);

// 8-bit PGM with values scaled linearly to 0..255.
void save_pgm(const GridD& grid, const std::string& path);

}  // namespace impplan
