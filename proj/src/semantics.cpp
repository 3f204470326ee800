#include "impplan/semantics.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace impplan {

namespace {

const char* kGroupNames[kNumGroups] = {"free", "mid1", "mid2", "mid3", "obs"};

}  // namespace

const char* group_name(CostGroup g) { return kGroupNames[static_cast<int>(g)]; }

CostGroup group_from_name(std::string_view name) {
  for (int i = 0; i < kNumGroups; ++i)
    if (name == kGroupNames[i]) return static_cast<CostGroup>(i);
  throw std::out_of_range("unknown cost group: " + std::string(name));
}

CostTable::CostTable(std::vector<SemanticClass> classes,
                     std::array<double, kNumGroups> group_costs)
    : classes_(std::move(classes)), group_costs_(group_costs) {
  auto violations = validate();
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid cost table:";
    for (const auto& v : violations) msg << "\n  - " << v;
    throw std::runtime_error(msg.str());
  }
}

CostTable CostTable::default_table() {
  using G = CostGroup;
  std::vector<SemanticClass> c = {
      // traversable, lowest cost: vivid greens
      {"sidewalk", {0, 255, 0}, G::free},
      {"crosswalk", {0, 255, 100}, G::free},
      {"floor", {80, 255, 40}, G::free},
      {"stairs", {0, 210, 50}, G::free},
      // loose ground: yellow-greens
      {"gravel", {150, 255, 0}, G::mid1},
      {"sand", {210, 255, 50}, G::mid1},
      {"snow", {90, 230, 120}, G::mid1},
      // natural ground (grass, dirt): olive
      {"terrain", {190, 210, 0}, G::mid2},
      // drivable but to be avoided: orange
      {"road", {255, 160, 0}, G::mid3},
      // dynamic obstacles: reds
      {"person", {255, 0, 0}, G::obs},
      {"animal", {230, 0, 40}, G::obs},
      {"vehicle", {255, 50, 50}, G::obs},
      {"trains", {200, 0, 90}, G::obs},
      {"motorcycle", {255, 90, 30}, G::obs},
      {"bicycle", {220, 40, 0}, G::obs},
      // static structure: blues
      {"building", {0, 0, 255}, G::obs},
      {"wall", {50, 60, 220}, G::obs},
      {"fence", {0, 100, 255}, G::obs},
      {"bridge", {100, 0, 255}, G::obs},
      {"tunnel", {20, 40, 180}, G::obs},
      {"furniture", {80, 80, 255}, G::obs},
      {"tree", {0, 60, 150}, G::obs},
      {"water_surface", {0, 170, 255}, G::obs},
      // thin street furniture: violets
      {"pole", {140, 0, 220}, G::obs},
      {"traffic_sign", {180, 0, 255}, G::obs},
      {"traffic_light", {255, 0, 200}, G::obs},
      {"bench", {120, 60, 200}, G::obs},
      // non-ground
      {"sky", {70, 130, 250}, G::obs},
      {"ceiling", {160, 160, 255}, G::obs},
      {"unknown", {0, 0, 0}, G::obs},
  };
  return CostTable(std::move(c), {0.0, 0.5, 1.0, 1.5, 2.0});
}

double CostTable::group_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 1; i < kNumGroups; ++i)
    gap = std::min(gap, group_costs_[i] - group_costs_[i - 1]);
  return gap;
}

double CostTable::cost_of(std::string_view name) const {
  return cost_of(index_of(name));
}

double CostTable::cost_of(std::size_t index) const {
  return group_cost(classes_.at(index).group);
}

std::size_t CostTable::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i].name == name) return i;
  throw std::out_of_range("unknown semantic class: " + std::string(name));
}

std::size_t CostTable::index_of_color(const Rgb& color) const {
  std::size_t best = 0;
  long best_d2 = std::numeric_limits<long>::max();
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const Rgb& c = classes_[i].color;
    long d2 = 0;
    for (int k = 0; k < 3; ++k) {
      long d = static_cast<long>(c[k]) - static_cast<long>(color[k]);
      d2 += d * d;
    }
    if (d2 < best_d2) {  // ties keep the lowest index
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

const SemanticClass& CostTable::class_of_color(const Rgb& color) const {
  return classes_[index_of_color(color)];
}

std::vector<std::string> CostTable::validate() const {
  return validate_fields(classes_, group_costs_);
}

std::vector<std::string> CostTable::validate_fields(
    const std::vector<SemanticClass>& classes,
    const std::array<double, kNumGroups>& group_costs) {
  std::vector<std::string> v;
  if (classes.size() != 30)
    v.push_back("table must have exactly 30 classes, got " + std::to_string(classes.size()));
  for (int i = 1; i < kNumGroups; ++i)
    if (!(group_costs[i - 1] < group_costs[i]))
      v.push_back(std::string("group costs not strictly increasing: ") + kGroupNames[i - 1] +
                  " >= " + kGroupNames[i]);
  for (double c : group_costs)
    if (!(c >= 0.0) || !(c <= 2.0))
      v.push_back("group cost out of [0, 2]: " + std::to_string(c));
  std::set<std::string> names;
  std::set<std::array<int, 3>> colors;
  for (const auto& cls : classes) {
    if (cls.name.empty()) v.push_back("empty class name");
    if (!names.insert(cls.name).second) v.push_back("duplicate class name: " + cls.name);
    std::array<int, 3> key = {cls.color[0], cls.color[1], cls.color[2]};
    if (!colors.insert(key).second) v.push_back("duplicate class color for: " + cls.name);
  }
  return v;
}

std::string CostTable::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : classes_) {
    arr.push_back({{"name", c.name},
                   {"color", {c.color[0], c.color[1], c.color[2]}},
                   {"group", group_name(c.group)}});
  }
  return arr.dump(2);
}

CostTable CostTable::from_json(const std::string& text) {
  nlohmann::json arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::runtime_error("cost table JSON must be an array");
  std::vector<SemanticClass> classes;
  std::vector<std::string> violations;
  for (const auto& e : arr) {
    SemanticClass c;
    c.name = e.at("name").get<std::string>();
    const auto& col = e.at("color");
    if (!col.is_array() || col.size() != 3) {
      violations.push_back("color of '" + c.name + "' must be [r,g,b]");
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      long ch = col[k].get<long>();
      if (ch < 0 || ch > 255)
        violations.push_back("color channel of '" + c.name + "' out of [0,255]");
      c.color[k] = static_cast<uint8_t>(std::clamp(ch, 0l, 255l));
    }
    c.group = group_from_name(e.at("group").get<std::string>());
    classes.push_back(std::move(c));
  }
  const std::array<double, kNumGroups> costs = {0.0, 0.5, 1.0, 1.5, 2.0};
  auto inv = validate_fields(classes, costs);
  violations.insert(violations.end(), inv.begin(), inv.end());
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "cost table schema validation failed:";
    for (const auto& s : violations) msg << "\n  - " << s;
    throw std::runtime_error(msg.str());
  }
  return CostTable(std::move(classes), costs);
}

void CostTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_json() << "\n";
}

CostTable CostTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open cost table: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace impplan
