#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace impplan {

using Rgb = std::array<uint8_t, 3>;

enum class CostGroup { free = 0, mid1, mid2, mid3, obs };

constexpr int kNumGroups = 5;

struct SemanticClass {
  std::string name;
  Rgb color;
  CostGroup group;
};

// The 30-class semantic taxonomy with its RGB encoding and per-group motion
// cost factors. Traversable groups sit in the green part of the colorspace,
// obstacles in the red/blue part. Immutable after construction.
class CostTable {
 public:
  CostTable(std::vector<SemanticClass> classes, std::array<double, kNumGroups> group_costs);

  // Built-in table: 30 classes, group costs {0.0, 0.5, 1.0, 1.5, 2.0}.
  static CostTable default_table();

  const std::vector<SemanticClass>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }

  double group_cost(CostGroup g) const { return group_costs_[static_cast<int>(g)]; }
  double c_free() const { return group_costs_[0]; }
  double c_obs() const { return group_costs_[kNumGroups - 1]; }
  // Smallest difference between consecutive group costs.
  double group_gap() const;

  // Throws std::out_of_range naming the identifier when unknown.
  double cost_of(std::string_view name) const;
  double cost_of(std::size_t index) const;
  std::size_t index_of(std::string_view name) const;

  const SemanticClass& class_at(std::size_t index) const { return classes_.at(index); }
  bool is_obstacle(std::size_t index) const { return classes_.at(index).group == CostGroup::obs; }

  // Nearest class in Euclidean RGB distance; ties broken by lowest index.
  const SemanticClass& class_of_color(const Rgb& color) const;
  std::size_t index_of_color(const Rgb& color) const;

  // All invariant violations, empty when the table is valid.
  std::vector<std::string> validate() const;
  static std::vector<std::string> validate_fields(
      const std::vector<SemanticClass>& classes,
      const std::array<double, kNumGroups>& group_costs);

  // JSON array of {name, color:[r,g,b], group}; group costs are the built-in
  // defaults. Deserialization throws std::runtime_error listing every
  // violated invariant.
  std::string to_json() const;
  static CostTable from_json(const std::string& text);
  void save(const std::string& path) const;
  static CostTable load(const std::string& path);

 private:
  std::vector<SemanticClass> classes_;
  std::array<double, kNumGroups> group_costs_;
};

const char* group_name(CostGroup g);
CostGroup group_from_name(std::string_view name);  // throws on unknown

}  // namespace impplan
