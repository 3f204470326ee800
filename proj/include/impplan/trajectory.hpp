#pragma once

#include <string>
#include <vector>

#include "impplan/geometry.hpp"

namespace impplan {

struct KeyPointSet {
  std::vector<Vec3> points;  // n_k >= 1, finite coordinates
};

// Dense path expanded from sparse keypoints. waypoints[0] is the robot
// origin; normals are unit left-perpendiculars of the xy tangent.
// dwp_dkp[i*n_k + j] is the (scalar) dependence of waypoint i on keypoint j:
// every waypoint is a fixed linear combination of the control points, the
// same coefficient applying to x, y and z.
struct Trajectory {
  std::vector<Vec3> waypoints;
  std::vector<Vec2> normals;          // filled by compute_normals
  std::vector<double> seg_lengths;    // size waypoints-1
  std::vector<double> dwp_dkp;        // waypoints x n_k, row-major
  std::size_t n_keypoints = 0;
};

// Uniform Catmull-Rom spline through {origin} U keypoints, endpoints handled
// by phantom-point reflection; consecutive duplicate control points are
// dropped (their keypoints get zero Jacobian columns). Waypoint count is
// 1 + effective_spans * samples_per_segment.
Trajectory spline_interpolate(const KeyPointSet& k, int samples_per_segment,
                              const Vec3& origin = {0.0, 0.0, 0.0});

// Central-difference tangents (one-sided at the ends); zero tangents reuse
// the previous normal. Throws on single-waypoint trajectories.
void compute_normals(Trajectory& t);

// left[i] = p_i + w_R * n_i, right[i] = p_i - w_R * n_i (xy only, z copied).
std::pair<std::vector<Vec3>, std::vector<Vec3>> offset_points(const Trajectory& t, double w_R);

// Plain text rows "x y z nx ny" for plotting.
std::string trajectory_to_text(const Trajectory& t);
Trajectory trajectory_from_text(const std::string& text);

}  // namespace impplan
