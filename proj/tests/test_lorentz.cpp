#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "lcone/families.hpp"

using namespace lcone;

namespace {

LorentzMatrix random_lorentz(std::mt19937_64& rng, double boost) {
  const auto axis = random_vector(rng, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  return boost_toward(random_vector(rng, boost)) * LorentzMatrix::spatial_rotation(axis_angle_rotation(axis, angle(rng)));
}

// Image conformal factor straight from the matrix: Lambda^{-1}(1, x') = c (1, y)
// puts the preimage generator at y and omega_Lambda(x') = omega(y) / c.
double direct_image_value(const LorentzMatrix& lambda, const SpectralField& omega, const Vec3& xp) {
  const Eigen::Vector4d q = lambda.inverse().matrix() * Eigen::Vector4d(1.0, xp[0], xp[1], xp[2]);
  const Vec3 y{q(1) / q(0), q(2) / q(0), q(3) / q(0)};
  const auto [t, p] = angles_of(y);
  return evaluate_at(omega, t, p) / q(0);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InternalError;
}

}  // namespace

TEST(Lorentz, ValidationRejectsNonRestricted) {
  Eigen::Matrix4d time_reversal = Eigen::Vector4d(-1, 1, 1, 1).asDiagonal();
  Eigen::Matrix4d parity = Eigen::Vector4d(1, -1, 1, 1).asDiagonal();
  Eigen::Matrix4d shear = Eigen::Matrix4d::Identity();
  shear(1, 2) = 0.1;
  for (const auto& m : {time_reversal, parity, shear})
    EXPECT_EQ(kind_of([&] { LorentzMatrix::from_matrix(m); }), ErrorKind::NotRestrictedLorentz);
  EXPECT_NO_THROW(LorentzMatrix::from_matrix(special_boost(0.7).matrix()));
}

TEST(Lorentz, BoostTowardMovesRestFrame) {
  const Eigen::Vector3d a(0.3, -0.4, 1.2);
  const auto z = boost_toward(a) * FourVector(1, 0, 0, 0);
  EXPECT_NEAR(z[0], std::sqrt(1.0 + a.squaredNorm()), 1e-14);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(z[i + 1], a[i], 1e-14);
}

TEST(Lorentz, InverseAndMetric) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const auto l = random_lorentz(rng, 2.0);
    EXPECT_LT(((l * l.inverse()).matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((l.matrix().transpose() * eta() * l.matrix() - eta()).cwiseAbs().maxCoeff(), 1e-12);
    const FourVector v(2.0, 0.3, -0.5, 1.1);
    EXPECT_NEAR(minkowski_inner(l * v, l * v), minkowski_inner(v, v), 1e-12);
  }
}

TEST(Lorentz, DecomposeRecomposes) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const auto l = random_lorentz(rng, 0.1 + 0.3 * k);
    const auto parts = decompose(l);
    EXPECT_TRUE(parts.rotation.is_rotation());
    EXPECT_LT(((boost_toward(parts.a) * parts.rotation).matrix() - l.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Lorentz, ZeroTwistRotation) {
  for (const Eigen::Vector3d& a : {Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(0, 0, -2), Eigen::Vector3d(0, 0, 5), Eigen::Vector3d(1, 0, 0)}) {
    const Eigen::Matrix3d r = rotation_to(a);
    EXPECT_LT((r * Eigen::Vector3d(0, 0, 1) - a.normalized()).norm(), 1e-14);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-14);
  }
}

TEST(MoebiusMap, MatchesProjectiveAction) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 5; ++k) {
    const auto l = random_lorentz(rng, 0.8);
    const MoebiusMap phi(l);
    for (int j = 0; j < 20; ++j) {
      const auto xv = random_vector(rng, 1.0);
      const Vec3 xp{xv.x(), xv.y(), xv.z()};
      const Eigen::Vector4d q = l.inverse().matrix() * Eigen::Vector4d(1.0, xp[0], xp[1], xp[2]);
      const Vec3 y = phi(xp);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(y[i], q(i + 1) / q(0), 1e-12);
      EXPECT_NEAR(phi.denominator(xp), q(0), 1e-12);
    }
  }
}

TEST(ApplyToSection, MatchesDirectMatrixOracle) {
  std::mt19937_64 rng(6);
  const auto s = random_section(derive_seed(6, 0));
  // the image is re-truncated at L, so agreement is limited by the pulled-back tail
  for (double boost : {0.2, 0.6, 1.0}) {
    const auto l = random_lorentz(rng, boost);
    const auto image = apply_to_section_with_residual(l, s);
    EXPECT_LT(image.tail_energy, 1e-6);
    double worst = 0.0;
    for (int j = 0; j < 50; ++j) {
      const auto xv = random_vector(rng, 1.0);
      const Vec3 xp{xv.x(), xv.y(), xv.z()};
      const auto [t, p] = angles_of(xp);
      const double expected = direct_image_value(l, s.omega(), xp);
      worst = std::max(worst, std::abs(evaluate_at(image.section.omega(), t, p) / expected - 1.0));
    }
    EXPECT_LT(worst, 1e-7) << "boost " << boost;
    RecordProperty("max_rel_error_boost_" + std::to_string(int(10 * boost)), std::to_string(worst));
  }
}

TEST(ApplyToSection, Composition) {
  std::mt19937_64 rng(7);
  const auto s = random_section(derive_seed(7, 0));
  const auto l1 = random_lorentz(rng, 0.4);
  const auto l2 = random_lorentz(rng, 0.5);
  const auto two_steps = apply_to_section(l2, apply_to_section(l1, s));
  const auto one_step = apply_to_section(l2 * l1, s);
  EXPECT_LT(w22_distance(two_steps.omega(), one_step.omega()), 1e-8);
}

TEST(ApplyToSection, IdentityAndRotationsAreExactCopies) {
  const auto s = random_section(derive_seed(8, 0));
  EXPECT_LT(w22_distance(apply_to_section(LorentzMatrix(), s).omega(), s.omega()), 1e-10);
  const auto r = LorentzMatrix::spatial_rotation(axis_angle_rotation(Eigen::Vector3d(0, 0, 1), 0.7));
  const auto back = apply_to_section(r.inverse(), apply_to_section(r, s));
  EXPECT_LT(w22_distance(back.omega(), s.omega()), 1e-9);
}

TEST(ZVector, RoundAndBoostedRound) {
  const auto z = z_vector(round_section(24, 2.0));
  EXPECT_NEAR(z[0], 2.0, 1e-13);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(z[i], 0.0, 1e-13);
  const auto zb = z_vector(boosted_round(48, 1.0, Eigen::Vector3d(0, 0, 0.6)));
  EXPECT_NEAR(zb[0], 1.1661904, 1e-7);
  EXPECT_NEAR(zb[3], 0.6, 1e-12);
  EXPECT_NEAR(zb.proper_length(), 1.0, 1e-12);
}

TEST(ZVector, Equivariance) {
  std::mt19937_64 rng(9);
  for (std::uint64_t k = 0; k < 3; ++k) {
    const auto s = random_section(derive_seed(9, k));
    for (double boost : {0.2, 0.6, 1.0}) {
      const auto l = random_lorentz(rng, boost);
      const auto image = apply_to_section(l, s);
      EXPECT_LT((z_vector(image).p - (l * z_vector(s)).p).cwiseAbs().maxCoeff(), 1e-7);
      EXPECT_NEAR(image.area() / s.area(), 1.0, 1e-8);
    }
  }
}

TEST(StcmcFromZ, ClosedFormAndRoundTrip) {
  const FourVector z(1.5, 0.2, -0.4, 0.3);
  const auto s = stcmc_from_z(z, 48);
  const auto zz = z_vector(s);
  EXPECT_LT((zz.p - z.p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(s.area_radius(), z.proper_length(), 1e-12);
  EXPECT_LT(kappa_bound(s), 1e-12);
  EXPECT_EQ(kind_of([] { stcmc_from_z(FourVector(0.5, 1.0, 0.0, 0.0), 16); }), ErrorKind::InvalidReferenceVector);
  EXPECT_EQ(kind_of([] { stcmc_from_z(FourVector(-1.0, 0.0, 0.0, 0.0), 16); }), ErrorKind::InvalidReferenceVector);
}

TEST(Balance, BoostedRoundReturnsToRound) {
  const double rho = 1.7;
  const auto b = balance(boosted_round(48, rho, Eigen::Vector3d(0.4, 0.1, -0.5)));
  EXPECT_LE(b.iterations, 2);
  EXPECT_LE(b.residual, 1e-8);
  const auto& w = b.section.omega_values();
  EXPECT_NEAR(w.min(), rho, 1e-7);
  EXPECT_NEAR(w.max(), rho, 1e-7);
}

TEST(Balance, RandomSections) {
  for (std::uint64_t k = 0; k < 3; ++k) {
    const auto s = apply_to_section(boost_toward(Eigen::Vector3d(0.3, 0.2, 0.1 * k)), random_section(derive_seed(10, k)));
    const auto b = balance(s);
    EXPECT_LE(b.iterations, 2);
    EXPECT_LE(first_moment_residual(b.section), 1e-8);
    // the accumulated transformation maps the input onto the result
    EXPECT_LT(w22_distance(apply_to_section(b.lambda, s).omega(), b.section.omega()), 1e-8);
  }
}

TEST(Kappa, PinchHolds) {
  const auto s = random_section(derive_seed(11, 0));
  const double kappa = kappa_bound(s);
  EXPECT_GT(kappa, 0.0);
  const auto wz = stcmc_values(z_vector(s), s.grid());
  for (std::size_t k = 0; k < wz.values.size(); ++k) {
    const double w = s.omega_values().values[k];
    EXPECT_LE(w, (1.0 + kappa) * wz.values[k] * (1 + 1e-14));
    EXPECT_GE(w * (1 + 1e-14), wz.values[k] / (1.0 + kappa));
  }
}
