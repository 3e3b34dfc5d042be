#pragma once

// Action of SO+(1,3) on lightcone cross sections, the associated 4-vector Z,
// STCMC sections built from a timelike vector, balancing, and kappa-bounds.
//
// For Lambda = Lambda_a D the image section has conformal factor
//   omega_Lambda(x') = omega(Phi(x')) / (sqrt(1+|a|^2) - a . x'),
//   Phi = D^{-1} o R_a o Phi_|a| o R_a^{-1},
// where R_a is the zero-twist rotation e3 -> a/|a| and Phi_a is the
// axis-aligned map cos(theta) = (b cos(theta') - a) / (b - a cos(theta')).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lcone/cross_section.hpp"
#include "lcone/lorentz.hpp"

namespace lcone {

/// Pullback map Phi_Lambda on S^2 for a restricted Lorentz transformation.
class MoebiusMap {
 public:
  explicit MoebiusMap(const LorentzMatrix& lambda) {
    const auto parts = decompose(lambda);
    a_vec_ = parts.a;
    a_ = parts.a.norm();
    b_ = std::sqrt(1.0 + a_ * a_);
    axis_ = rotation_to(parts.a);
    rotation_inv_ = parts.rotation.rotation_block().transpose();
  }

  double boost() const { return a_; }

  /// Phi(x') for a unit vector x'.
  Vec3 operator()(const Vec3& xp) const {
    const Eigen::Vector3d y = axis_.transpose() * Eigen::Vector3d(xp[0], xp[1], xp[2]);
    const double cp = std::clamp(y.z(), -1.0, 1.0);
    const double c = std::clamp((b_ * cp - a_) / (b_ - a_ * cp), -1.0, 1.0);
    const double s = std::sqrt((1.0 - c) * (1.0 + c));
    const double h = std::hypot(y.x(), y.y());
    Eigen::Vector3d x(0.0, 0.0, c);
    if (h > 0.0) {
      x.x() = s * y.x() / h;
      x.y() = s * y.y() / h;
    }
    const Eigen::Vector3d out = rotation_inv_ * (axis_ * x);
    return {out.x(), out.y(), out.z()};
  }

  /// The conformal denominator sqrt(1+|a|^2) - a . x'.
  double denominator(const Vec3& xp) const {
    return b_ - (a_vec_.x() * xp[0] + a_vec_.y() * xp[1] + a_vec_.z() * xp[2]);
  }

 private:
  Eigen::Vector3d a_vec_;
  double a_ = 0.0;
  double b_ = 1.0;
  Eigen::Matrix3d axis_;
  Eigen::Matrix3d rotation_inv_;
};

struct MappedSection {
  CrossSection section;
  double tail_energy = 0.0;  // fraction of L^2 energy above 0.9 L after re-analysis
};

/// Image of a section under Lambda, re-analyzed at the same bandlimit.
/// Sampling uses the base Gauss grid: the error is set by truncation at L,
/// and the oversampled grid costs 4x the point evaluations for no gain.
inline MappedSection apply_to_section_with_residual(const LorentzMatrix& lambda, const CrossSection& sigma) {
  const MoebiusMap phi(lambda);
  const GridSpec& target = sigma.grid();
  const auto th = target.theta_nodes();
  const auto ph = target.phi_nodes();
  std::vector<std::pair<double, double>> points;
  std::vector<double> denom;
  points.reserve(target.size());
  denom.reserve(target.size());
  for (int i = 0; i < target.n_theta(); ++i)
    for (int j = 0; j < target.n_phi(); ++j) {
      const Vec3 xp = point_on_sphere(th[i], ph[j]);
      points.push_back(angles_of(phi(xp)));
      denom.push_back(phi.denominator(xp));
    }
  auto values = evaluate_at(sigma.omega(), points);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] /= denom[k];
  auto coeffs = analyze(ScalarField(target, std::move(values)), sigma.bandlimit());
  const double tail = tail_energy(coeffs);
  try {
    return {CrossSection(std::move(coeffs)), tail};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateSection) throw;
    throw Error(ErrorKind::MappedSectionInvalid, "image section lost positivity: " + std::string(e.what()));
  }
}

inline CrossSection apply_to_section(const LorentzMatrix& lambda, const CrossSection& sigma) {
  return apply_to_section_with_residual(lambda, sigma).section;
}

namespace detail {

struct Moments {
  double m0 = 0.0;                 // int omega^3
  std::array<double, 3> mi{};      // int f_i omega^3
};

inline Moments cubic_moments(const CrossSection& sigma) {
  const auto& w = sigma.geometry().omega;
  const auto x = first_harmonics(w.grid);
  auto w3 = pointwise([](double v) { return v * v * v; }, w);
  Moments out;
  out.m0 = integrate(w3);
  for (int i = 0; i < 3; ++i) out.mi[i] = integrate(pointwise([](double a, double b) { return a * b; }, w3, x[i]));
  return out;
}

}  // namespace detail

/// Z = (int omega^3, int f_i omega^3) / |Sigma|.
inline FourVector z_vector(const CrossSection& sigma) {
  const auto mom = detail::cubic_moments(sigma);
  const double area = sigma.area();
  FourVector z(mom.m0 / area, mom.mi[0] / area, mom.mi[1] / area, mom.mi[2] / area);
  if (!z.future_timelike()) throw Error(ErrorKind::InternalError, "associated 4-vector is not future timelike");
  return z;
}

/// max_i |int f_i omega^3| / int omega^3.
inline double first_moment_residual(const CrossSection& sigma) {
  const auto mom = detail::cubic_moments(sigma);
  double worst = 0.0;
  for (double v : mom.mi) worst = std::max(worst, std::abs(v));
  return worst / mom.m0;
}

/// omega_z(x) = -eta(z,z) / (z^0 - z . x) at a point.
inline double stcmc_value(const FourVector& z, const Vec3& x) {
  return -z.minkowski_norm2() / (z[0] - (z[1] * x[0] + z[2] * x[1] + z[3] * x[2]));
}

inline void check_reference_vector(const FourVector& z) {
  if (!std::isfinite(z.p.sum()) || !z.future_timelike())
    throw Error(ErrorKind::InvalidReferenceVector, "reference vector must be timelike and future pointing");
}

/// Values of omega_z on a grid (closed form).
inline ScalarField stcmc_values(const FourVector& z, const GridSpec& grid) {
  check_reference_vector(z);
  return sample(grid, [&](double t, double p) { return stcmc_value(z, point_on_sphere(t, p)); });
}

/// The STCMC section with associated 4-vector z.
inline CrossSection stcmc_from_z(const FourVector& z, int bandlimit) {
  check_reference_vector(z);
  return CrossSection::from_function(bandlimit, [&](double t, double p) { return stcmc_value(z, point_on_sphere(t, p)); });
}

struct BalanceResult {
  CrossSection section;
  LorentzMatrix lambda;  // accumulated transformation
  int iterations = 0;
  double residual = 0.0;  // first_moment_residual of the result
};

/// Boosts by Lambda_a^{-1}, a = Z_spatial / r_Z, until the first moments of
/// omega^3 vanish; repeats (at most 5 times) only to absorb re-analysis error.
inline BalanceResult balance(const CrossSection& sigma, double tol = 1e-8, int max_iterations = 5) {
  BalanceResult out{sigma, LorentzMatrix(), 0, first_moment_residual(sigma)};
  while (out.residual > tol) {
    if (out.iterations == max_iterations)
      throw Error(ErrorKind::BalanceFailed, "first-moment residual " + std::to_string(out.residual) + " after " +
                                                std::to_string(max_iterations) + " iterations");
    const auto z = z_vector(out.section);
    const Eigen::Vector3d a = z.spatial() / z.proper_length();
    const auto step = boost_toward(a).inverse();
    out.section = apply_to_section(step, out.section);
    out.lambda = step * out.lambda;
    ++out.iterations;
    out.residual = first_moment_residual(out.section);
  }
  return out;
}

/// Smallest kappa with omega_Z / (1+kappa) <= omega <= (1+kappa) omega_Z.
inline double kappa_bound(const CrossSection& sigma) {
  const auto z = z_vector(sigma);
  const auto wz = stcmc_values(z, sigma.grid());
  const auto& w = sigma.omega_values();
  double worst = 1.0;
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    const double r = w.values[k] / wz.values[k];
    worst = std::max({worst, r, 1.0 / r});
  }
  return worst - 1.0;
}

}  // namespace lcone
