#pragma once

#include <vector>

#include "impplan/costmap.hpp"
#include "impplan/trajectory.hpp"

namespace impplan {

struct LossWeights {
  double alpha = 5.0;  // traversability
  double beta = 2.0;   // goal
  double gamma = 1.0;  // motion
  double delta = 2.0;  // height
};

struct LossConfig {
  LossWeights weights;
  double w_R = 0.5;                 // robot half-width offset, meters
  double h_R = 0.5;                 // robot base height, meters
  double obstacle_threshold = 1.75; // interpolated cost marking non-traversable
  int samples_per_segment = 10;
};

struct LossBreakdown {
  double traversability = 0.0;
  double goal = 0.0;
  double motion = 0.0;
  double height = 0.0;
  double collision = 0.0;
  double total = 0.0;
  bool collision_flag = false;
  std::vector<double> grad_keypoints;  // n_k x 3, row-major
  double grad_mu_logit = 0.0;
};

// Mean interpolated cost over center and +-w_R offset points. Normals are
// constants in the backward pass; gradients flow through the three
// evaluation positions only. grad is (waypoints x 3) row-major, z rows 0.
std::pair<double, std::vector<double>> traversability_loss(const Trajectory& t,
                                                           const CostMap& m, double w_R);

// log(|p_n - goal| + 1); gradient w.r.t. the terminal point (zero at
// coincidence).
std::pair<double, Vec3> goal_loss(const Trajectory& t, const Vec3& goal);

// Spacing-uniformity penalty: population variance of segment lengths over
// squared mean length (0 for uniform spacing). grad is (waypoints x 3).
std::pair<double, std::vector<double>> motion_loss(const Trajectory& t);

// Mean |z - interpolated terrain - h_R|; subgradient 0 at exact zeros.
std::pair<double, std::vector<double>> height_loss(const Trajectory& t, const HeightMap& h,
                                                   double h_R);

struct CollisionLoss {
  double value = 0.0;
  double grad_mu_logit = 0.0;  // d BCE / d logit = mu - target
  bool colliding = false;
};

// Path labeled colliding iff any waypoint's interpolated cost reaches the
// threshold; returns BCE(mu, label) with mu clamped to [1e-7, 1-1e-7].
CollisionLoss collision_loss(const Trajectory& t, const CostMap& m, double mu,
                             double obstacle_threshold);

// Composes spline -> normals -> component losses and chains all gradients
// back to the keypoints through the spline Jacobian. `origin` is the robot
// position in map coordinates.
LossBreakdown total_loss(const KeyPointSet& k, double mu, const CostMap& semantic,
                         const HeightMap& height, const Vec3& goal, const LossConfig& cfg,
                         const Vec3& origin);

// Single text line for training logs.
std::string loss_to_string(const LossBreakdown& b);

}  // namespace impplan
