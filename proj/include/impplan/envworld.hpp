#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "impplan/geometry.hpp"
#include "impplan/semantics.hpp"

namespace impplan {

// Metric 2D grid world. Cell (ix, iy) covers [ix*res, (ix+1)*res) x
// [iy*res, (iy+1)*res) in world coordinates; grids are row-major with iy as
// the row index. Immutable after generation.
struct Environment2D {
  double width = 0.0;   // meters
  double height = 0.0;  // meters
  double resolution = 0.1;
  std::size_t rows = 0;  // ceil(height / resolution)
  std::size_t cols = 0;  // ceil(width / resolution)
  std::vector<uint16_t> labels;  // class index into the cost table
  std::vector<double> heights;   // terrain elevation, meters

  std::size_t idx(std::size_t ix, std::size_t iy) const { return iy * cols + ix; }
  bool contains(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x < width && y < height;
  }
  std::size_t cell_x(double x) const;
  std::size_t cell_y(double y) const;
  uint16_t label_at(double x, double y) const;  // throws when out of bounds
};

struct RobotPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;  // normalized to (-pi, pi]

  RobotPose() = default;
  RobotPose(double x_, double y_, double yaw_) : x(x_), y(y_), yaw(wrap_angle(yaw_)) {}
};

struct SensorConfig {
  double fov = M_PI / 2.0;
  int n_rays = 64;
  double max_range = 10.0;
};

struct DepthScan {
  std::vector<double> ranges;  // 0 < ranges[i] <= max_range
  double fov = 0.0;
  double max_range = 0.0;
};

struct SemanticScan {
  std::vector<Rgb> colors;  // class color of the first hit, same length as ranges
  double fov = 0.0;
};

// Casts n_rays rays with DDA grid traversal. Ray i leaves at bearing
// yaw - fov/2 + i*fov/(n_rays-1). A ray stops at the first obstacle-group
// cell (the cell containing the sensor never blocks), at the environment
// boundary (reported with the "unknown" color), or at max_range (reported
// with the color of the cell it ends in).
std::pair<DepthScan, SemanticScan> raycast(const Environment2D& env, const CostTable& table,
                                           const RobotPose& pose, double fov, int n_rays,
                                           double max_range);

inline std::pair<DepthScan, SemanticScan> raycast(const Environment2D& env,
                                                  const CostTable& table,
                                                  const RobotPose& pose,
                                                  const SensorConfig& s) {
  return raycast(env, table, pose, s.fov, s.n_rays, s.max_range);
}

// Procedural environments, deterministic given the seed.
Environment2D make_corridor(const CostTable& table, double length, double width,
                            const std::string& terrain_pattern, uint64_t seed);
Environment2D make_urban_toy(const CostTable& table, uint64_t seed);
Environment2D make_rooms(const CostTable& table, int n_rooms, uint64_t seed);

// JSON with a legend of class names plus flat row-major label/height grids.
std::string env_to_json(const Environment2D& env, const CostTable& table);
Environment2D env_from_json(const std::string& text, const CostTable& table);
void save_env(const Environment2D& env, const CostTable& table, const std::string& path);
Environment2D load_env(const std::string& path, const CostTable& table);

}  // namespace impplan
