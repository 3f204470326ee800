#include "impplan/envworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "impplan/rng.hpp"
#include "json.hpp"

namespace impplan {

namespace {

std::size_t grid_dim(double extent, double res) {
  return static_cast<std::size_t>(std::ceil(extent / res - 1e-12));
}

Environment2D make_blank(const CostTable& table, const std::string& fill, double width,
                         double height, double res) {
  Environment2D env;
  env.width = width;
  env.height = height;
  env.resolution = res;
  env.cols = grid_dim(width, res);
  env.rows = grid_dim(height, res);
  env.labels.assign(env.rows * env.cols, static_cast<uint16_t>(table.index_of(fill)));
  env.heights.assign(env.rows * env.cols, 0.0);
  return env;
}

// Paints the label over a world-coordinate rectangle [x0,x1) x [y0,y1).
void paint_rect(Environment2D& env, uint16_t label, double x0, double y0, double x1, double y1) {
  const double res = env.resolution;
  const long ix0 = std::max(0l, static_cast<long>(std::floor(x0 / res + 1e-9)));
  const long iy0 = std::max(0l, static_cast<long>(std::floor(y0 / res + 1e-9)));
  const long ix1 = std::min(static_cast<long>(env.cols), static_cast<long>(std::ceil(x1 / res - 1e-9)));
  const long iy1 = std::min(static_cast<long>(env.rows), static_cast<long>(std::ceil(y1 / res - 1e-9)));
  for (long iy = iy0; iy < iy1; ++iy)
    for (long ix = ix0; ix < ix1; ++ix)
      env.labels[env.idx(ix, iy)] = label;
}

void paint_border(Environment2D& env, uint16_t label) {
  for (std::size_t ix = 0; ix < env.cols; ++ix) {
    env.labels[env.idx(ix, 0)] = label;
    env.labels[env.idx(ix, env.rows - 1)] = label;
  }
  for (std::size_t iy = 0; iy < env.rows; ++iy) {
    env.labels[env.idx(0, iy)] = label;
    env.labels[env.idx(env.cols - 1, iy)] = label;
  }
}

}  // namespace

std::size_t Environment2D::cell_x(double x) const {
  long ix = static_cast<long>(std::floor(x / resolution));
  return static_cast<std::size_t>(std::clamp(ix, 0l, static_cast<long>(cols) - 1));
}

std::size_t Environment2D::cell_y(double y) const {
  long iy = static_cast<long>(std::floor(y / resolution));
  return static_cast<std::size_t>(std::clamp(iy, 0l, static_cast<long>(rows) - 1));
}

uint16_t Environment2D::label_at(double x, double y) const {
  if (!contains(x, y)) {
    std::ostringstream msg;
    msg << "point (" << x << ", " << y << ") outside environment " << width << "x" << height;
    throw std::domain_error(msg.str());
  }
  return labels[idx(cell_x(x), cell_y(y))];
}

std::pair<DepthScan, SemanticScan> raycast(const Environment2D& env, const CostTable& table,
                                           const RobotPose& pose, double fov, int n_rays,
                                           double max_range) {
  if (!env.contains(pose.x, pose.y)) {
    std::ostringstream msg;
    msg << "raycast pose (" << pose.x << ", " << pose.y << ") outside environment bounds";
    throw std::domain_error(msg.str());
  }
  if (n_rays < 2) throw std::invalid_argument("raycast needs n_rays >= 2");

  const std::size_t unknown = table.index_of("unknown");
  const double res = env.resolution;
  const double inf = std::numeric_limits<double>::infinity();

  DepthScan depth;
  depth.fov = fov;
  depth.max_range = max_range;
  depth.ranges.resize(n_rays);
  SemanticScan sem;
  sem.fov = fov;
  sem.colors.resize(n_rays);

  for (int i = 0; i < n_rays; ++i) {
    const double bearing = pose.yaw - fov / 2.0 + fov * static_cast<double>(i) / (n_rays - 1);
    const double dx = std::cos(bearing);
    const double dy = std::sin(bearing);

    long ix = static_cast<long>(env.cell_x(pose.x));
    long iy = static_cast<long>(env.cell_y(pose.y));
    const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
    const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
    const double t_delta_x = step_x ? res / std::abs(dx) : inf;
    const double t_delta_y = step_y ? res / std::abs(dy) : inf;
    double t_max_x = inf;
    double t_max_y = inf;
    if (step_x > 0) t_max_x = ((ix + 1) * res - pose.x) / dx;
    if (step_x < 0) t_max_x = (ix * res - pose.x) / dx;
    if (step_y > 0) t_max_y = ((iy + 1) * res - pose.y) / dy;
    if (step_y < 0) t_max_y = (iy * res - pose.y) / dy;

    double range = max_range;
    std::size_t hit_class = unknown;
    bool resolved = false;
    while (!resolved) {
      const double t_next = std::min(t_max_x, t_max_y);
      if (t_next >= max_range) {
        // ends inside the current cell
        range = max_range;
        hit_class = env.labels[env.idx(ix, iy)];
        break;
      }
      if (t_max_x <= t_max_y) {
        ix += step_x;
        t_max_x += t_delta_x;
      } else {
        iy += step_y;
        t_max_y += t_delta_y;
      }
      if (ix < 0 || iy < 0 || ix >= static_cast<long>(env.cols) ||
          iy >= static_cast<long>(env.rows)) {
        // world edge is opaque
        range = t_next;
        hit_class = unknown;
        resolved = true;
        break;
      }
      const std::size_t cls = env.labels[env.idx(ix, iy)];
      if (table.is_obstacle(cls)) {
        range = t_next;
        hit_class = cls;
        resolved = true;
      }
    }
    depth.ranges[i] = range;
    sem.colors[i] = table.class_at(hit_class).color;
  }
  return {std::move(depth), std::move(sem)};
}

Environment2D make_corridor(const CostTable& table, double length, double width,
                            const std::string& terrain_pattern, uint64_t seed) {
  if (length <= 0.0 || width <= 0.0) throw std::invalid_argument("corridor dimensions must be positive");
  (void)seed;  // layout is fixed; the seed is accepted for interface symmetry
  Environment2D env = make_blank(table, terrain_pattern, length, width, 0.1);
  paint_border(env, static_cast<uint16_t>(table.index_of("wall")));
  return env;
}

Environment2D make_urban_toy(const CostTable& table, uint64_t seed) {
  const double W = 30.0, H = 30.0;
  Environment2D env = make_blank(table, "terrain", W, H, 0.1);
  const uint16_t sidewalk = static_cast<uint16_t>(table.index_of("sidewalk"));
  const uint16_t road = static_cast<uint16_t>(table.index_of("road"));
  const uint16_t crosswalk = static_cast<uint16_t>(table.index_of("crosswalk"));
  const uint16_t building = static_cast<uint16_t>(table.index_of("building"));
  const uint16_t stairs = static_cast<uint16_t>(table.index_of("stairs"));
  const uint16_t tree = static_cast<uint16_t>(table.index_of("tree"));
  const uint16_t wall = static_cast<uint16_t>(table.index_of("wall"));

  // east-west road band with flanking sidewalks and one crosswalk
  paint_rect(env, sidewalk, 0.0, 10.0, W, 12.0);
  paint_rect(env, road, 0.0, 12.0, W, 18.0);
  paint_rect(env, sidewalk, 0.0, 18.0, W, 20.0);
  paint_rect(env, crosswalk, 14.0, 12.0, 16.0, 18.0);

  // fixed buildings framing the blocks
  paint_rect(env, building, 3.0, 22.0, 9.0, 28.0);
  paint_rect(env, building, 20.0, 23.0, 27.0, 28.0);
  paint_rect(env, building, 4.0, 2.0, 10.0, 7.0);

  // stairs with a linear height ramp, ascending in +x
  paint_rect(env, stairs, 22.0, 2.0, 26.0, 6.0);
  for (std::size_t iy = 0; iy < env.rows; ++iy) {
    for (std::size_t ix = 0; ix < env.cols; ++ix) {
      const double cx = (ix + 0.5) * env.resolution;
      const double cy = (iy + 0.5) * env.resolution;
      if (cx >= 22.0 && cx < 26.0 && cy >= 2.0 && cy < 6.0)
        env.heights[env.idx(ix, iy)] = (cx - 22.0) / 4.0;  // 0 -> 1 m
    }
  }

  // seeded scatter of small obstacles away from the road corridor
  Rng rng(seed);
  for (int k = 0; k < 10; ++k) {
    const double x = rng.uniform(1.5, W - 2.5);
    const double y = rng.uniform() < 0.5 ? rng.uniform(1.5, 8.5) : rng.uniform(21.0, H - 2.5);
    const uint16_t what = rng.uniform() < 0.5 ? tree : building;
    const double s = rng.uniform(0.4, 1.2);
    paint_rect(env, what, x, y, x + s, y + s);
  }

  paint_border(env, wall);
  return env;
}

Environment2D make_rooms(const CostTable& table, int n_rooms, uint64_t seed) {
  if (n_rooms < 1) throw std::invalid_argument("make_rooms needs n_rooms >= 1");
  const double room = 6.0;
  const int per_side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_rooms))));
  const double W = per_side * room + 0.2;
  const double H = static_cast<double>((n_rooms + per_side - 1) / per_side) * room + 0.2;
  Environment2D env = make_blank(table, "floor", W, H, 0.1);
  const uint16_t wall = static_cast<uint16_t>(table.index_of("wall"));
  const uint16_t furniture = static_cast<uint16_t>(table.index_of("furniture"));

  paint_border(env, wall);
  Rng rng(seed);
  for (int r = 0; r < n_rooms; ++r) {
    const int gx = r % per_side;
    const int gy = r / per_side;
    const double x0 = 0.1 + gx * room;
    const double y0 = 0.1 + gy * room;
    // interior partition walls with a 1 m doorway on each shared edge
    if (gx > 0) {
      paint_rect(env, wall, x0, y0, x0 + 0.2, y0 + room);
      const double door = y0 + rng.uniform(1.0, room - 2.0);
      paint_rect(env, static_cast<uint16_t>(table.index_of("floor")), x0, door, x0 + 0.2, door + 1.0);
    }
    if (gy > 0) {
      paint_rect(env, wall, x0, y0, x0 + room, y0 + 0.2);
      const double door = x0 + rng.uniform(1.0, room - 2.0);
      paint_rect(env, static_cast<uint16_t>(table.index_of("floor")), door, y0, door + 1.0, y0 + 0.2);
    }
    // up to three furniture blocks per room
    const int blocks = static_cast<int>(rng.uniform_index(4));
    for (int b = 0; b < blocks; ++b) {
      const double bx = x0 + rng.uniform(1.0, room - 2.0);
      const double by = y0 + rng.uniform(1.0, room - 2.0);
      const double s = rng.uniform(0.3, 0.9);
      paint_rect(env, furniture, bx, by, bx + s, by + s);
    }
  }
  return env;
}

std::string env_to_json(const Environment2D& env, const CostTable& table) {
  nlohmann::json j;
  j["width"] = env.width;
  j["height"] = env.height;
  j["resolution"] = env.resolution;
  j["rows"] = env.rows;
  j["cols"] = env.cols;
  nlohmann::json legend = nlohmann::json::array();
  for (const auto& c : table.classes()) legend.push_back(c.name);
  j["legend"] = legend;
  j["labels"] = env.labels;
  j["heights"] = env.heights;
  return j.dump();
}

Environment2D env_from_json(const std::string& text, const CostTable& table) {
  nlohmann::json j = nlohmann::json::parse(text);
  Environment2D env;
  env.width = j.at("width").get<double>();
  env.height = j.at("height").get<double>();
  env.resolution = j.at("resolution").get<double>();
  env.rows = j.at("rows").get<std::size_t>();
  env.cols = j.at("cols").get<std::size_t>();
  if (env.resolution <= 0.0) throw std::runtime_error("environment resolution must be positive");
  if (env.rows != grid_dim(env.height, env.resolution) ||
      env.cols != grid_dim(env.width, env.resolution))
    throw std::runtime_error("environment grid dimensions do not match extents");

  const auto legend = j.at("legend").get<std::vector<std::string>>();
  std::vector<uint16_t> remap(legend.size());
  for (std::size_t i = 0; i < legend.size(); ++i)
    remap[i] = static_cast<uint16_t>(table.index_of(legend[i]));  // throws on unknown

  const auto raw = j.at("labels").get<std::vector<uint32_t>>();
  env.heights = j.at("heights").get<std::vector<double>>();
  if (raw.size() != env.rows * env.cols || env.heights.size() != raw.size())
    throw std::runtime_error("environment grids have wrong cell count");
  env.labels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] >= legend.size())
      throw std::runtime_error("label index " + std::to_string(raw[i]) + " outside legend");
    env.labels[i] = remap[raw[i]];
  }
  for (double h : env.heights)
    if (!std::isfinite(h)) throw std::runtime_error("non-finite terrain height");
  return env;
}

void save_env(const Environment2D& env, const CostTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << env_to_json(env, table) << "\n";
}

Environment2D load_env(const std::string& path, const CostTable& table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open environment: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return env_from_json(ss.str(), table);
}

}  // namespace impplan
