#include "impplan/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "impplan/kernels.hpp"

namespace impplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> gaussian_taps(double sigma, int& radius) {
  radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    taps[t + radius] = std::exp(-0.5 * (t * t) / (sigma * sigma));
    sum += taps[t + radius];
  }
  for (double& k : taps) k /= sum;
  return taps;
}

// 1D lower envelope of parabolas (Felzenszwalb & Huttenlocher). f and d are
// squared distances; all quantities stay integer-valued in cell units, so
// the result is exact.
void edt_1d(const double* f, double* d, int n, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Squared distance (in cells) from every cell to the nearest site cell.
// A large finite sentinel stands in for "no site" so the parabola
// intersections stay finite (plain INF breaks the envelope recursion);
// any real site beats the sentinel, and the caller guarantees one exists.
GridD edt_squared(const std::vector<uint8_t>& sites, std::size_t rows, std::size_t cols) {
  constexpr double kNoSite = 1e12;
  GridD d(rows, cols);
  const int n = static_cast<int>(std::max(rows, cols));
  std::vector<double> f(n), out(n), z(n + 1);
  std::vector<int> v(n);

  // columns first
  GridD tmp(rows, cols);
  for (std::size_t ix = 0; ix < cols; ++ix) {
    for (std::size_t iy = 0; iy < rows; ++iy)
      f[iy] = sites[iy * cols + ix] ? 0.0 : kNoSite;
    edt_1d(f.data(), out.data(), static_cast<int>(rows), v.data(), z.data());
    for (std::size_t iy = 0; iy < rows; ++iy) tmp.at(ix, iy) = out[iy];
  }
  // then rows
  for (std::size_t iy = 0; iy < rows; ++iy) {
    for (std::size_t ix = 0; ix < cols; ++ix) f[ix] = tmp.at(ix, iy);
    edt_1d(f.data(), out.data(), static_cast<int>(cols), v.data(), z.data());
    for (std::size_t ix = 0; ix < cols; ++ix) d.at(ix, iy) = out[ix];
  }
  return d;
}

CostMap run_pipeline(const Environment2D& env, const CostTable& table,
                     const SmoothingConfig& cfg, const std::vector<double>& raw_costs) {
  if (cfg.sigma1 <= 0.0 || cfg.sigma2 <= 0.0)
    throw std::invalid_argument("smoothing sigmas must be positive");
  if (cfg.gradient_scale < 0.0 || cfg.inversion_scale < 0.0)
    throw std::invalid_argument("shaping scales must be non-negative");

  CostMap map;
  map.resolution = env.resolution;
  map.grid = GridD(env.rows, env.cols);
  for (std::size_t i = 0; i < raw_costs.size(); ++i) map.grid.v[i] = raw_costs[i];

  map.grid = gaussian_filter(map.grid, cfg.sigma1);

  // distinct group levels present in this environment, plus where they sit in
  // the table's global ladder (for the shaping caps)
  std::vector<double> ladder;
  for (int g = 0; g < kNumGroups; ++g) ladder.push_back(table.group_cost(static_cast<CostGroup>(g)));
  std::set<double> present(raw_costs.begin(), raw_costs.end());
  const double min_level = table.c_free();

  for (double level : present) {
    std::vector<uint8_t> mask(raw_costs.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = raw_costs[i] == level ? 1 : 0;
    GridD sd = signed_distance(mask, env.rows, env.cols, env.resolution);

    if (level == min_level) {
      // lowest-cost group: pull the cost down toward the region center
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (sd.v[i] > 0.0)
          map.grid.v[i] = std::max(map.grid.v[i] - cfg.inversion_scale * sd.v[i], 0.0);
      }
    } else {
      // other groups: cost rises away from the boundary, capped at the gap to
      // the adjacent group level so shaped values keep the class ordering
      auto it = std::lower_bound(ladder.begin(), ladder.end(), level);
      double cap;
      if (it + 1 != ladder.end())
        cap = *(it + 1) - level;
      else
        cap = level - *(it - 1);  // top group keeps the same headroom
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (sd.v[i] > 0.0)
          map.grid.v[i] += std::min(cfg.gradient_scale * sd.v[i], cap);
      }
    }
  }

  map.grid = gaussian_filter(map.grid, cfg.sigma2);
  for (double& x : map.grid.v) x = std::max(x, 0.0);
  return map;
}

template <typename MapT>
InterpSample sample_bilinear(const MapT& map, double x, double y) {
  const GridD& g = map.grid;
  if (g.rows < 2 || g.cols < 2) throw std::invalid_argument("map too small to interpolate");
  InterpSample s;
  double u = (x - map.origin_x) / map.resolution - 0.5;
  double v = (y - map.origin_y) / map.resolution - 0.5;
  const double u_max = static_cast<double>(g.cols - 1);
  const double v_max = static_cast<double>(g.rows - 1);
  bool clamped_x = false, clamped_y = false;
  if (u < 0.0) { u = 0.0; clamped_x = true; }
  if (u > u_max) { u = u_max; clamped_x = true; }
  if (v < 0.0) { v = 0.0; clamped_y = true; }
  if (v > v_max) { v = v_max; clamped_y = true; }
  s.out_of_bounds = clamped_x || clamped_y;

  std::size_t ix = std::min(static_cast<std::size_t>(u), g.cols - 2);
  std::size_t iy = std::min(static_cast<std::size_t>(v), g.rows - 2);
  const double fx = u - static_cast<double>(ix);
  const double fy = v - static_cast<double>(iy);
  const double v00 = g.at(ix, iy);
  const double v10 = g.at(ix + 1, iy);
  const double v01 = g.at(ix, iy + 1);
  const double v11 = g.at(ix + 1, iy + 1);
  s.value = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
  // derivative of the bilinear form; clamped axes are flat by construction
  s.ddx = clamped_x ? 0.0 : ((1.0 - fy) * (v10 - v00) + fy * (v11 - v01)) / map.resolution;
  s.ddy = clamped_y ? 0.0 : ((1.0 - fx) * (v01 - v00) + fx * (v11 - v10)) / map.resolution;
  return s;
}

}  // namespace

GridD gaussian_filter(const GridD& grid, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("gaussian_filter needs sigma > 0");
  int radius = 0;
  const std::vector<double> taps = gaussian_taps(sigma, radius);
  const auto& k = kernels::active();
  GridD a(grid.rows, grid.cols), b(grid.rows, grid.cols);
  k.conv_horizontal(a.v.data(), grid.v.data(), grid.rows, grid.cols, taps.data(), radius);
  k.conv_vertical(b.v.data(), a.v.data(), grid.rows, grid.cols, taps.data(), radius);
  return b;
}

GridD signed_distance(const std::vector<uint8_t>& mask, std::size_t rows, std::size_t cols,
                      double resolution) {
  if (mask.size() != rows * cols) throw std::invalid_argument("mask size mismatch");
  GridD out(rows, cols);
  bool any_true = false, any_false = false;
  for (uint8_t m : mask) (m ? any_true : any_false) = true;
  if (!any_true || !any_false) return out;  // degenerate: all zeros

  std::vector<uint8_t> inv(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) inv[i] = mask[i] ? 0 : 1;
  const GridD d2_to_false = edt_squared(inv, rows, cols);
  const GridD d2_to_true = edt_squared(mask, rows, cols);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out.v[i] = mask[i] ? resolution * std::sqrt(d2_to_false.v[i])
                       : -resolution * std::sqrt(d2_to_true.v[i]);
  }
  return out;
}

CostMap build_costmap(const Environment2D& env, const CostTable& table,
                      const SmoothingConfig& cfg) {
  std::vector<double> raw(env.labels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = table.cost_of(env.labels[i]);
  return run_pipeline(env, table, cfg, raw);
}

CostMap geometric_costmap(const Environment2D& env, const CostTable& table,
                          const SmoothingConfig& cfg) {
  std::vector<double> raw(env.labels.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = table.is_obstacle(env.labels[i]) ? table.c_obs() : table.c_free();
  return run_pipeline(env, table, cfg, raw);
}

HeightMap build_heightmap(const Environment2D& env) {
  HeightMap h;
  h.resolution = env.resolution;
  h.grid = GridD(env.rows, env.cols);
  h.grid.v = env.heights;
  return h;
}

InterpSample interpolate(const CostMap& map, double x, double y) {
  return sample_bilinear(map, x, y);
}

InterpSample height_at(const HeightMap& map, double x, double y) {
  return sample_bilinear(map, x, y);
}

namespace {

template <typename T>
void write_le(std::ofstream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw std::runtime_error("truncated IPCM file while reading " + what);
  return v;
}

}  // namespace

void save_ipcm(const CostMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write("IPCM1", 5);
  write_le(out, static_cast<uint32_t>(map.grid.rows));
  write_le(out, static_cast<uint32_t>(map.grid.cols));
  write_le(out, map.resolution);
  write_le(out, map.origin_x);
  write_le(out, map.origin_y);
  out.write(reinterpret_cast<const char*>(map.grid.v.data()),
            static_cast<std::streamsize>(map.grid.v.size() * sizeof(double)));
}

CostMap load_ipcm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open costmap: " + path);
  char magic[5];
  if (!in.read(magic, 5) || std::memcmp(magic, "IPCM1", 5) != 0)
    throw std::runtime_error("bad IPCM magic in " + path);
  CostMap map;
  const uint32_t rows = read_le<uint32_t>(in, "rows");
  const uint32_t cols = read_le<uint32_t>(in, "cols");
  map.resolution = read_le<double>(in, "resolution");
  map.origin_x = read_le<double>(in, "origin_x");
  map.origin_y = read_le<double>(in, "origin_y");
  map.grid = GridD(rows, cols);
  if (!in.read(reinterpret_cast<char*>(map.grid.v.data()),
               static_cast<std::streamsize>(map.grid.v.size() * sizeof(double))))
    throw std::runtime_error("truncated IPCM values in " + path);
  return map;
}

void save_pgm(const GridD& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  double lo = kInf, hi = -kInf;
  for (double v : grid.v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  out << "P5\n" << grid.cols << " " << grid.rows << "\n255\n";
  for (std::size_t iy = 0; iy < grid.rows; ++iy) {
    for (std::size_t ix = 0; ix < grid.cols; ++ix) {
      const double t = (grid.at(ix, iy) - lo) / span;
      out.put(static_cast<char>(static_cast<uint8_t>(std::lround(t * 255.0))));
    }
  }
}

}  // namespace impplan
