#include "impplan/trajectory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace impplan {

namespace {

// Catmull-Rom basis at parameter t for control points (j-1, j, j+1, j+2).
void catmull_rom_basis(double t, double b[4]) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  b[0] = 0.5 * (-t3 + 2.0 * t2 - t);
  b[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
  b[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
  b[3] = 0.5 * (t3 - t2);
}

bool same_point(const Vec3& a, const Vec3& b) {
  return a.x == b.x && a.y == b.y && a.z == b.z;
}

}  // namespace

Trajectory spline_interpolate(const KeyPointSet& k, int samples_per_segment, const Vec3& origin) {
  if (k.points.empty()) throw std::invalid_argument("spline needs at least one keypoint");
  if (samples_per_segment < 1)
    throw std::invalid_argument("spline needs samples_per_segment >= 1");
  for (const Vec3& p : k.points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw std::invalid_argument("non-finite keypoint coordinate");

  const std::size_t n_k = k.points.size();

  // control polygon = origin + keypoints, dropping consecutive duplicates;
  // ctrl_kp[i] = keypoint index of control i (-1 for the origin)
  std::vector<Vec3> ctrl = {origin};
  std::vector<long> ctrl_kp = {-1};
  for (std::size_t j = 0; j < n_k; ++j) {
    if (same_point(ctrl.back(), k.points[j])) continue;  // skip zero-length span
    ctrl.push_back(k.points[j]);
    ctrl_kp.push_back(static_cast<long>(j));
  }

  Trajectory out;
  out.n_keypoints = n_k;
  const std::size_t spans = ctrl.size() - 1;
  const std::size_t n_wp = 1 + spans * static_cast<std::size_t>(samples_per_segment);
  out.waypoints.resize(n_wp);
  out.dwp_dkp.assign(n_wp * n_k, 0.0);

  auto add_coeff = [&](std::size_t wp, long ctrl_index, double c) {
    // phantom reflection folds out-of-range controls back into real ones:
    //   C[-1] = 2 C[0] - C[1],     C[m+1] = 2 C[m] - C[m-1]
    const long m = static_cast<long>(ctrl.size()) - 1;
    if (ctrl_index < 0) {
      add_coeff(wp, 0, 2.0 * c);
      add_coeff(wp, 1, -c);
      return;
    }
    if (ctrl_index > m) {
      add_coeff(wp, m, 2.0 * c);
      add_coeff(wp, m - 1, -c);
      return;
    }
    const long kp = ctrl_kp[ctrl_index];
    if (kp >= 0) out.dwp_dkp[wp * n_k + static_cast<std::size_t>(kp)] += c;
  };

  auto eval = [&](std::size_t wp, std::size_t span, double t) {
    double b[4];
    catmull_rom_basis(t, b);
    Vec3 p{0.0, 0.0, 0.0};
    for (int q = 0; q < 4; ++q) {
      const long ci = static_cast<long>(span) + q - 1;
      const long m = static_cast<long>(ctrl.size()) - 1;
      Vec3 c;
      if (ci < 0)
        c = 2.0 * ctrl[0] - ctrl[1];
      else if (ci > m)
        c = 2.0 * ctrl[m] - ctrl[m - 1];
      else
        c = ctrl[ci];
      p = p + b[q] * c;
      add_coeff(wp, ci, b[q]);
    }
    out.waypoints[wp] = p;
  };

  if (spans == 0) {
    // all keypoints coincide with the origin
    out.waypoints[0] = origin;
  } else {
    out.waypoints[0] = ctrl[0];
    std::size_t wp = 1;
    for (std::size_t span = 0; span < spans; ++span) {
      for (int s = 1; s <= samples_per_segment; ++s, ++wp)
        eval(wp, span, static_cast<double>(s) / samples_per_segment);
    }
  }

  out.seg_lengths.resize(out.waypoints.size() - 1);
  for (std::size_t i = 0; i + 1 < out.waypoints.size(); ++i)
    out.seg_lengths[i] = norm(out.waypoints[i + 1] - out.waypoints[i]);
  return out;
}

void compute_normals(Trajectory& t) {
  const std::size_t n = t.waypoints.size();
  if (n < 2) throw std::invalid_argument("normals need at least 2 waypoints");
  t.normals.resize(n);
  Vec2 prev{0.0, 1.0};  // fallback until the first usable tangent
  for (std::size_t i = 0; i < n; ++i) {
    Vec2 tan;
    if (i == 0)
      tan = {t.waypoints[1].x - t.waypoints[0].x, t.waypoints[1].y - t.waypoints[0].y};
    else if (i + 1 == n)
      tan = {t.waypoints[n - 1].x - t.waypoints[n - 2].x,
             t.waypoints[n - 1].y - t.waypoints[n - 2].y};
    else
      tan = {t.waypoints[i + 1].x - t.waypoints[i - 1].x,
             t.waypoints[i + 1].y - t.waypoints[i - 1].y};
    const double len = norm(tan);
    if (len < 1e-12) {
      t.normals[i] = prev;
      continue;
    }
    const Vec2 nrm{-tan.y / len, tan.x / len};  // left perpendicular
    t.normals[i] = nrm;
    prev = nrm;
  }
}

std::pair<std::vector<Vec3>, std::vector<Vec3>> offset_points(const Trajectory& t, double w_R) {
  if (t.normals.size() != t.waypoints.size())
    throw std::invalid_argument("offset_points requires computed normals");
  std::vector<Vec3> left(t.waypoints.size()), right(t.waypoints.size());
  for (std::size_t i = 0; i < t.waypoints.size(); ++i) {
    const Vec3& p = t.waypoints[i];
    const Vec2& n = t.normals[i];
    left[i] = {p.x + w_R * n.x, p.y + w_R * n.y, p.z};
    right[i] = {p.x - w_R * n.x, p.y - w_R * n.y, p.z};
  }
  return {std::move(left), std::move(right)};
}

std::string trajectory_to_text(const Trajectory& t) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < t.waypoints.size(); ++i) {
    const Vec3& p = t.waypoints[i];
    const Vec2 n = i < t.normals.size() ? t.normals[i] : Vec2{0.0, 0.0};
    out << p.x << " " << p.y << " " << p.z << " " << n.x << " " << n.y << "\n";
  }
  return out.str();
}

Trajectory trajectory_from_text(const std::string& text) {
  Trajectory t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    Vec3 p;
    Vec2 n;
    if (!(row >> p.x >> p.y >> p.z >> n.x >> n.y))
      throw std::runtime_error("bad trajectory row at line " + std::to_string(line_no));
    t.waypoints.push_back(p);
    t.normals.push_back(n);
  }
  t.seg_lengths.resize(t.waypoints.empty() ? 0 : t.waypoints.size() - 1);
  for (std::size_t i = 0; i + 1 < t.waypoints.size(); ++i)
    t.seg_lengths[i] = norm(t.waypoints[i + 1] - t.waypoints[i]);
  return t;
}

}  // namespace impplan
