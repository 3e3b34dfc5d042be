#pragma once

// Restricted Lorentz group SO+(1,3) acting on R^{1,3} with eta = diag(-1,1,1,1),
// coordinates (t, x1, x2, x3).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

#include "lcone/error.hpp"

namespace lcone {

struct FourVector {
  Eigen::Vector4d p = Eigen::Vector4d::Zero();

  FourVector() = default;
  FourVector(double p0, double p1, double p2, double p3) : p(p0, p1, p2, p3) {}
  explicit FourVector(const Eigen::Vector4d& v) : p(v) {}

  double operator[](int i) const { return p[i]; }
  double& operator[](int i) { return p[i]; }
  Eigen::Vector3d spatial() const { return p.tail<3>(); }

  /// eta(p, p) = -(p^0)^2 + |p_spatial|^2.
  double minkowski_norm2() const { return -p[0] * p[0] + p.tail<3>().squaredNorm(); }
  bool timelike() const { return minkowski_norm2() < 0.0; }
  bool future_timelike() const { return timelike() && p[0] > 0.0; }
  /// sqrt(-eta(p, p)) for timelike p.
  double proper_length() const { return std::sqrt(-minkowski_norm2()); }
};

inline double minkowski_inner(const FourVector& a, const FourVector& b) {
  return -a[0] * b[0] + a.spatial().dot(b.spatial());
}

inline const Eigen::Matrix4d& eta() {
  static const Eigen::Matrix4d m = Eigen::Vector4d(-1.0, 1.0, 1.0, 1.0).asDiagonal();
  return m;
}

class LorentzMatrix {
 public:
  LorentzMatrix() : m_(Eigen::Matrix4d::Identity()) {}

  /// Validating constructor: M^T eta M = eta, det M = 1, M^0_0 >= 1.
  static LorentzMatrix from_matrix(const Eigen::Matrix4d& m, double tol = 1e-10) {
    const double defect = (m.transpose() * eta() * m - eta()).cwiseAbs().maxCoeff();
    if (!std::isfinite(defect) || defect > tol * std::max(1.0, m.cwiseAbs2().maxCoeff()))
      throw Error(ErrorKind::NotRestrictedLorentz, "M^T eta M differs from eta by " + std::to_string(defect));
    if (std::abs(m.determinant() - 1.0) > tol * std::max(1.0, m.cwiseAbs().maxCoeff()))
      throw Error(ErrorKind::NotRestrictedLorentz, "determinant is not +1");
    if (m(0, 0) < 1.0 - tol) throw Error(ErrorKind::NotRestrictedLorentz, "not orthochronous");
    return LorentzMatrix(m, Unchecked{});
  }

  const Eigen::Matrix4d& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// eta M^T eta.
  LorentzMatrix inverse() const { return LorentzMatrix(eta() * m_.transpose() * eta(), Unchecked{}); }

  FourVector operator*(const FourVector& v) const { return FourVector(m_ * v.p); }
  LorentzMatrix operator*(const LorentzMatrix& o) const { return LorentzMatrix(m_ * o.m_, Unchecked{}); }

  static LorentzMatrix spatial_rotation(const Eigen::Matrix3d& r) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.bottomRightCorner<3, 3>() = r;
    return LorentzMatrix(m, Unchecked{});
  }

  /// True when this is a spatial rotation (top-left 1, orthonormal block).
  bool is_rotation(double tol = 1e-9) const {
    if (std::abs(m_(0, 0) - 1.0) > tol) return false;
    for (int i = 1; i < 4; ++i)
      if (std::abs(m_(0, i)) > tol || std::abs(m_(i, 0)) > tol) return false;
    const Eigen::Matrix3d r = m_.bottomRightCorner<3, 3>();
    return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
  }

  Eigen::Matrix3d rotation_block() const { return m_.bottomRightCorner<3, 3>(); }

 private:
  struct Unchecked {};
  LorentzMatrix(const Eigen::Matrix4d& m, Unchecked) : m_(m) {}

  Eigen::Matrix4d m_;
};

/// Boost along x3 with Lambda(d_t) = (b, 0, 0, a), b = sqrt(1 + a^2).
inline LorentzMatrix special_boost(double a) {
  const double b = std::sqrt(1.0 + a * a);
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = b;
  m(3, 3) = b;
  m(0, 3) = a;
  m(3, 0) = a;
  return LorentzMatrix::from_matrix(m);
}

/// Rotation about a (not necessarily unit) axis by `angle` (right-handed).
inline Eigen::Matrix3d axis_angle_rotation(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) {
    if (angle != 0.0) throw Error(ErrorKind::InvalidInput, "rotation axis is zero");
    return Eigen::Matrix3d::Identity();
  }
  return Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
}

/// Rotation taking e3 to a/|a| about the axis e3 x a (no twist about a).
/// a parallel to -e3 uses the half turn about e1.
inline Eigen::Matrix3d rotation_to(const Eigen::Vector3d& a) {
  const double n = a.norm();
  if (n == 0.0) return Eigen::Matrix3d::Identity();
  const Eigen::Vector3d d = a / n;
  const Eigen::Vector3d e3(0.0, 0.0, 1.0);
  const Eigen::Vector3d k = e3.cross(d);
  const double s = k.norm();
  const double c = d.z();
  if (s < 1e-15) {
    if (c > 0.0) return Eigen::Matrix3d::Identity();
    return Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
  }
  return Eigen::AngleAxisd(std::atan2(s, c), k / s).toRotationMatrix();
}

/// Lambda_a = D_a Lambda_|a| D_a^{-1}; Lambda_a(d_t) = (sqrt(1+|a|^2), a).
inline LorentzMatrix boost_toward(const Eigen::Vector3d& a) {
  const double n = a.norm();
  if (n == 0.0) return LorentzMatrix();
  const auto d = LorentzMatrix::spatial_rotation(rotation_to(a));
  return d * special_boost(n) * d.inverse();
}

struct BoostRotation {
  Eigen::Vector3d a;
  LorentzMatrix rotation;
};

/// Lambda = Lambda_a D with a read off Lambda(d_t) and D = Lambda_a^{-1} Lambda.
inline BoostRotation decompose(const LorentzMatrix& lambda) {
  const auto checked = LorentzMatrix::from_matrix(lambda.matrix(), 1e-9);
  Eigen::Vector3d a(checked(1, 0), checked(2, 0), checked(3, 0));
  const auto d = boost_toward(a).inverse() * checked;
  if (!d.is_rotation(1e-8)) throw Error(ErrorKind::NotRestrictedLorentz, "residual factor is not a rotation");
  return {a, d};
}

}  // namespace lcone
