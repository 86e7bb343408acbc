#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace poseconsist {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Rotation (axis-angle, radians) and translation (meters) as predicted by a
// pose estimator. Translation is not coupled to rotation through the SE(3)
// V-matrix: exp_map copies it verbatim.
struct Twist {
  Vec3 axis_angle = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  static Twist from_array(const std::array<double, 6>& v);
  std::array<double, 6> to_array() const;

  // Components 0..2 are axis_angle, 3..5 translation.
  double& operator[](int i) { return i < 3 ? axis_angle[i] : translation[i - 3]; }
  double operator[](int i) const { return i < 3 ? axis_angle[i] : translation[i - 3]; }
};

struct RigidPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidPose identity() { return {}; }
  static RigidPose from_matrix(const Mat4& m);
  Mat4 matrix() const;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

// ‖mᵀm − I‖∞ < tol and |det(m) − 1| < tol.
bool is_rotation(const Mat3& m, double tol = 1e-9);

Mat3 hat(const Vec3& w);
Vec3 vee(const Mat3& m);

Mat3 rotation_exp(const Vec3& axis_angle);
// Returns the canonical representative, ‖result‖ ≤ π.
Vec3 rotation_log(const Mat3& r);

RigidPose exp_map(const Twist& xi);
Twist log_map(const RigidPose& p);

// a·b: applies b first.
RigidPose compose(const RigidPose& a, const RigidPose& b);
// True SE(3) inverse (Rᵀ, −Rᵀt).
RigidPose inverse(const RigidPose& p);

struct PoseDistanceTerms {
  double rotation = 0.0;
  double translation = 0.0;
  double total() const { return rotation + translation; }
};

// |1 − (tr(R_a R_bᵀ) − 1)/2| + ‖t_a − t_b‖₁, trace clamped to [−1, 3].
PoseDistanceTerms pose_distance_terms(const RigidPose& a, const RigidPose& b);
double pose_distance(const RigidPose& a, const RigidPose& b);

// KITTI odometry text format: one pose per line, row-major [R | t].
std::vector<RigidPose> read_pose_file(const std::string& path);
void write_pose_file(const std::string& path, const std::vector<RigidPose>& poses);
RigidPose parse_pose_line(const std::string& line);
std::string format_pose_line(const RigidPose& p);

}  // namespace poseconsist
