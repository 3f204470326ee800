#include "impplan/losses.hpp"

#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace impplan {

namespace {

constexpr double kMuClamp = 1e-7;

double clamp_mu(double mu) {
  if (!(mu > 0.0) || !(mu < 1.0)) {
    // produced by a sigmoid, so this only fires on numerical saturation
    mu = std::min(std::max(mu, 0.0), 1.0);
  }
  return std::min(std::max(mu, kMuClamp), 1.0 - kMuClamp);
}

}  // namespace

std::pair<double, std::vector<double>> traversability_loss(const Trajectory& t,
                                                           const CostMap& m, double w_R) {
  if (t.normals.size() != t.waypoints.size())
    throw std::invalid_argument("traversability_loss requires computed normals");
  const std::size_t n = t.waypoints.size();
  std::vector<double> grad(n * 3, 0.0);
  double sum = 0.0;
  const double scale = 1.0 / (3.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = t.waypoints[i];
    const Vec2& nv = t.normals[i];
    const double offs[3][2] = {{0.0, 0.0},
                               {w_R * nv.x, w_R * nv.y},
                               {-w_R * nv.x, -w_R * nv.y}};
    for (const auto& o : offs) {
      const InterpSample s = interpolate(m, p.x + o[0], p.y + o[1]);
      sum += s.value;
      grad[i * 3 + 0] += scale * s.ddx;
      grad[i * 3 + 1] += scale * s.ddy;
    }
  }
  return {scale * sum, std::move(grad)};
}

std::pair<double, Vec3> goal_loss(const Trajectory& t, const Vec3& goal) {
  if (t.waypoints.empty()) throw std::invalid_argument("goal_loss needs a trajectory");
  const Vec3 p = t.waypoints.back();
  const Vec3 d = p - goal;
  const double dist = norm(d);
  const double value = std::log(dist + 1.0);
  Vec3 grad{0.0, 0.0, 0.0};
  if (dist > 0.0) grad = (1.0 / (dist * (dist + 1.0))) * d;
  return {value, grad};
}

std::pair<double, std::vector<double>> motion_loss(const Trajectory& t) {
  const std::size_t n = t.waypoints.size();
  if (n < 2) throw std::invalid_argument("motion_loss needs at least 2 waypoints");
  const std::size_t m = n - 1;
  std::vector<double> grad(n * 3, 0.0);

  double mean = 0.0;
  for (double l : t.seg_lengths) mean += l;
  mean /= static_cast<double>(m);
  if (mean < 1e-12) return {0.0, std::move(grad)};  // fully degenerate path

  double var = 0.0;
  for (double l : t.seg_lengths) var += (l - mean) * (l - mean);
  var /= static_cast<double>(m);
  const double value = var / (mean * mean);

  // d value / d L_j, then chain through L_j = |p_{j+1} - p_j|
  for (std::size_t j = 0; j < m; ++j) {
    const double lj = t.seg_lengths[j];
    const double dval = 2.0 * (lj - mean) / (static_cast<double>(m) * mean * mean) -
                        2.0 * var / (static_cast<double>(m) * mean * mean * mean);
    if (lj < 1e-12) continue;  // kink of the norm; subgradient 0
    const Vec3 dir = (1.0 / lj) * (t.waypoints[j + 1] - t.waypoints[j]);
    grad[(j + 1) * 3 + 0] += dval * dir.x;
    grad[(j + 1) * 3 + 1] += dval * dir.y;
    grad[(j + 1) * 3 + 2] += dval * dir.z;
    grad[j * 3 + 0] -= dval * dir.x;
    grad[j * 3 + 1] -= dval * dir.y;
    grad[j * 3 + 2] -= dval * dir.z;
  }
  return {value, std::move(grad)};
}

std::pair<double, std::vector<double>> height_loss(const Trajectory& t, const HeightMap& h,
                                                   double h_R) {
  const std::size_t n = t.waypoints.size();
  if (n == 0) throw std::invalid_argument("height_loss needs a trajectory");
  std::vector<double> grad(n * 3, 0.0);
  double sum = 0.0;
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = t.waypoints[i];
    const InterpSample s = height_at(h, p.x, p.y);
    const double e = p.z - s.value - h_R;
    sum += std::abs(e);
    if (e == 0.0) continue;
    const double sign = e > 0.0 ? 1.0 : -1.0;
    grad[i * 3 + 0] += scale * sign * (-s.ddx);
    grad[i * 3 + 1] += scale * sign * (-s.ddy);
    grad[i * 3 + 2] += scale * sign;
  }
  return {scale * sum, std::move(grad)};
}

CollisionLoss collision_loss(const Trajectory& t, const CostMap& m, double mu,
                             double obstacle_threshold) {
  CollisionLoss out;
  for (const Vec3& p : t.waypoints) {
    if (interpolate(m, p.x, p.y).value >= obstacle_threshold) {
      out.colliding = true;
      break;
    }
  }
  const double mu_c = clamp_mu(mu);
  const double target = out.colliding ? 1.0 : 0.0;
  out.value = -(target * std::log(mu_c) + (1.0 - target) * std::log(1.0 - mu_c));
  out.grad_mu_logit = mu_c - target;
  return out;
}

LossBreakdown total_loss(const KeyPointSet& k, double mu, const CostMap& semantic,
                         const HeightMap& height, const Vec3& goal, const LossConfig& cfg,
                         const Vec3& origin) {
  Trajectory t = spline_interpolate(k, cfg.samples_per_segment, origin);
  compute_normals(t);

  LossBreakdown b;
  auto [tv, tg] = traversability_loss(t, semantic, cfg.w_R);
  auto [gv, gg] = goal_loss(t, goal);
  auto [mv, mg] = motion_loss(t);
  auto [hv, hg] = height_loss(t, height, cfg.h_R);
  const CollisionLoss c = collision_loss(t, semantic, mu, cfg.obstacle_threshold);

  b.traversability = tv;
  b.goal = gv;
  b.motion = mv;
  b.height = hv;
  b.collision = c.value;
  b.collision_flag = c.colliding;
  b.grad_mu_logit = c.grad_mu_logit;
  const LossWeights& w = cfg.weights;
  b.total = w.alpha * tv + w.beta * gv + w.gamma * mv + w.delta * hv + c.value;

  // weighted waypoint gradient, goal term only touching the terminal point
  const std::size_t n = t.waypoints.size();
  std::vector<double> gw(n * 3, 0.0);
  for (std::size_t i = 0; i < n * 3; ++i)
    gw[i] = w.alpha * tg[i] + w.gamma * mg[i] + w.delta * hg[i];
  gw[(n - 1) * 3 + 0] += w.beta * gg.x;
  gw[(n - 1) * 3 + 1] += w.beta * gg.y;
  gw[(n - 1) * 3 + 2] += w.beta * gg.z;

  // chain through the spline Jacobian
  const std::size_t n_k = k.points.size();
  b.grad_keypoints.assign(n_k * 3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n_k; ++j) {
      const double coeff = t.dwp_dkp[i * n_k + j];
      if (coeff == 0.0) continue;
      b.grad_keypoints[j * 3 + 0] += coeff * gw[i * 3 + 0];
      b.grad_keypoints[j * 3 + 1] += coeff * gw[i * 3 + 1];
      b.grad_keypoints[j * 3 + 2] += coeff * gw[i * 3 + 2];
    }
  }

  assert(std::abs(b.total - (w.alpha * b.traversability + w.beta * b.goal + w.gamma * b.motion +
                             w.delta * b.height + b.collision)) <= 1e-12);
  return b;
}

std::string loss_to_string(const LossBreakdown& b) {
  std::ostringstream out;
  out.precision(6);
  out << "total=" << b.total << " trav=" << b.traversability << " goal=" << b.goal
      << " motion=" << b.motion << " height=" << b.height << " coll=" << b.collision
      << (b.collision_flag ? " [colliding]" : "");
  return out.str();
}

}  // namespace impplan
