#include "poseconsist/lie.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "poseconsist/errors.h"
#include "poseconsist/format.h"

namespace poseconsist {
namespace {

constexpr double kSmallAngle = 1e-8;
// Below this distance from π the antisymmetric part is too small to carry
// the axis reliably.
constexpr double kNearPi = 1e-3;

}  // namespace

Twist Twist::from_array(const std::array<double, 6>& v) {
  Twist xi;
  xi.axis_angle = Vec3(v[0], v[1], v[2]);
  xi.translation = Vec3(v[3], v[4], v[5]);
  return xi;
}

std::array<double, 6> Twist::to_array() const {
  return {axis_angle.x(), axis_angle.y(), axis_angle.z(),
          translation.x(), translation.y(), translation.z()};
}

RigidPose RigidPose::from_matrix(const Mat4& m) {
  RigidPose p;
  p.rotation = m.topLeftCorner<3, 3>();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

Mat4 RigidPose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

bool is_rotation(const Mat3& m, double tol) {
  const Mat3 e = m.transpose() * m - Mat3::Identity();
  return e.cwiseAbs().maxCoeff() < tol && std::abs(m.determinant() - 1.0) < tol;
}

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Mat3 rotation_exp(const Vec3& axis_angle) {
  const double theta2 = axis_angle.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a, b;
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 w = hat(axis_angle);
  return Mat3::Identity() + a * w + b * (w * w);
}

Vec3 rotation_log(const Mat3& r) {
  const Vec3 anti = vee(r - r.transpose());  // 2 sinθ · axis
  const double sin_theta = 0.5 * anti.norm();
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < kSmallAngle) {
    // θ/(2 sinθ) → 1/2 + θ²/12
    return (0.5 + theta * theta / 12.0) * anti;
  }
  if (std::numbers::pi - theta > kNearPi) {
    return (theta / (2.0 * sin_theta)) * anti;
  }

  // (R + Rᵀ)/2 = cosθ·I + (1 − cosθ)·aaᵀ
  const Mat3 outer =
      (0.5 * (r + r.transpose()) - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
  int k = 0;
  outer.diagonal().maxCoeff(&k);
  Vec3 axis = outer.col(k) / std::sqrt(std::max(outer(k, k), 0.0));
  axis.normalize();
  if (anti.norm() > 0.0) {
    if (axis.dot(anti) < 0.0) axis = -axis;
  } else {
    int j = 0;
    axis.cwiseAbs().maxCoeff(&j);
    if (axis[j] < 0.0) axis = -axis;
  }
  return theta * axis;
}

RigidPose exp_map(const Twist& xi) {
  RigidPose p;
  p.rotation = rotation_exp(xi.axis_angle);
  p.translation = xi.translation;
  return p;
}

Twist log_map(const RigidPose& p) {
  Twist xi;
  xi.axis_angle = rotation_log(p.rotation);
  xi.translation = p.translation;
  return xi;
}

RigidPose compose(const RigidPose& a, const RigidPose& b) {
  RigidPose c;
  c.rotation = a.rotation * b.rotation;
  c.translation = a.rotation * b.translation + a.translation;
  return c;
}

RigidPose inverse(const RigidPose& p) {
  RigidPose q;
  q.rotation = p.rotation.transpose();
  q.translation = -(q.rotation * p.translation);
  return q;
}

PoseDistanceTerms pose_distance_terms(const RigidPose& a, const RigidPose& b) {
  // tr(R_a R_bᵀ) = Σ_ij a_ij b_ij, symmetric in (a, b) bit for bit.
  double trace = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) trace += a.rotation(i, j) * b.rotation(i, j);
  }
  trace = std::clamp(trace, -1.0, 3.0);
  PoseDistanceTerms d;
  d.rotation = std::abs(1.0 - 0.5 * (trace - 1.0));
  d.translation = (a.translation - b.translation).cwiseAbs().sum();
  return d;
}

double pose_distance(const RigidPose& a, const RigidPose& b) {
  return pose_distance_terms(a, b).total();
}

RigidPose parse_pose_line(const std::string& line) {
  std::istringstream in(line);
  Mat4 m = Mat4::Identity();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (!(in >> m(i, j))) {
        throw DataError("pose line must hold 12 numbers: '" + line + "'");
      }
    }
  }
  std::string extra;
  if (in >> extra) throw DataError("pose line has more than 12 numbers: '" + line + "'");
  return RigidPose::from_matrix(m);
}

std::string format_pose_line(const RigidPose& p) {
  const Mat4 m = p.matrix();
  std::string out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (!out.empty()) out += ' ';
      out += format_double(m(i, j));
    }
  }
  return out;
}

std::vector<RigidPose> read_pose_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pose file " + path);
  std::vector<RigidPose> poses;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      poses.push_back(parse_pose_line(line));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(poses.size() + 1) + ": " + e.what());
    }
  }
  return poses;
}

void write_pose_file(const std::string& path, const std::vector<RigidPose>& poses) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write pose file " + path);
  for (const auto& p : poses) out << format_pose_line(p) << '\n';
}

}  // namespace poseconsist
