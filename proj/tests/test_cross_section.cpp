#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "lcone/families.hpp"

using namespace lcone;

namespace {

// Axially symmetric u(theta) = ln omega with closed-form derivatives.
struct AxialU {
  double a = 0.2, b = 0.1;
  double u(double t) const { return a * std::cos(t) + b * std::cos(t) * std::cos(t); }
  double omega(double t) const { return std::exp(u(t)); }
};

double fd1(const std::function<double(double)>& f, double t, double h = 1e-4) { return (f(t + h) - f(t - h)) / (2 * h); }
double fd2(const std::function<double(double)>& f, double t, double h = 1e-4) { return (f(t + h) - 2 * f(t) + f(t - h)) / (h * h); }

}  // namespace

TEST(CrossSection, RoundSphere) {
  for (double rho : {0.5, 1.0, 2.0}) {
    const auto s = round_section(24, rho);
    EXPECT_NEAR(s.area(), kFourPi * rho * rho, 1e-12 * kFourPi * rho * rho);
    EXPECT_NEAR(s.area_radius(), rho, 1e-13);
    EXPECT_NEAR(s.min_h2(), 4.0 / (rho * rho), 1e-9 / (rho * rho));
    EXPECT_NEAR(s.max_h2(), 4.0 / (rho * rho), 1e-9 / (rho * rho));
    EXPECT_LT(s.tracefree_norm(), 1e-9);
  }
}

TEST(CrossSection, BoostedRoundHasConstantH2) {
  // v = (b - a.x)/rho gives v^2 - |grad v|^2 + v Lap v = (b^2 - |a|^2)/rho^2 = 1/rho^2
  const double rho = 1.5;
  const auto s = boosted_round(48, rho, Eigen::Vector3d(0.2, -0.3, 0.4));
  EXPECT_NEAR(s.min_h2(), 4.0 / (rho * rho), 1e-8);
  EXPECT_NEAR(s.max_h2(), 4.0 / (rho * rho), 1e-8);
  EXPECT_NEAR(s.area(), kFourPi * rho * rho, 1e-10);
  EXPECT_LT(s.area() * s.tracefree_norm2(), 1e-12);
}

TEST(CrossSection, H2AgainstFiniteDifferences) {
  // H^2 = 4 e^{-2u} (1 - Lap u), Lap u = u'' + cot(theta) u' for axial u
  const AxialU ax;
  const auto s = CrossSection::from_function(32, [&](double t, double) { return ax.omega(t); });
  const auto& g = s.geometry();
  const auto th = s.work_grid().theta_nodes();
  const auto fu = [&](double t) { return ax.u(t); };
  for (int i = 3; i < s.work_grid().n_theta(); i += 7) {
    const double t = th[i];
    const double lap = fd2(fu, t) + std::cos(t) / std::sin(t) * fd1(fu, t);
    const double expected = 4.0 * std::exp(-2.0 * ax.u(t)) * (1.0 - lap);
    EXPECT_NEAR(g.h2(i, 5), expected, 1e-6);
  }
}

TEST(CrossSection, TracefreeDensityAgainstFiniteDifferences) {
  // |A_tf|^2_gamma = 8 v^2 (v'' - cot(theta) v')^2 for axial v = 1/omega
  const AxialU ax;
  const auto s = CrossSection::from_function(32, [&](double t, double) { return ax.omega(t); });
  const auto& g = s.geometry();
  const auto th = s.work_grid().theta_nodes();
  const auto fv = [&](double t) { return 1.0 / ax.omega(t); };
  for (int i = 3; i < s.work_grid().n_theta(); i += 7) {
    const double t = th[i];
    const double d = fd2(fv, t) - std::cos(t) / std::sin(t) * fd1(fv, t);
    EXPECT_NEAR(g.a_tf_density(i, 3), 8.0 * fv(t) * fv(t) * d * d, 1e-6);
  }
}

TEST(CrossSection, GaussBonnetOnRandomSections) {
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto s = random_section(derive_seed(11, k));
    EXPECT_NEAR(s.int_h2() / (16.0 * kPi), 1.0, 1e-10);
  }
}

TEST(CrossSection, IndependentRoutesAgree) {
  const auto s = random_section(derive_seed(12, 0));
  const auto& h2 = s.spacetime_mean_curvature();
  const auto uform = s.spacetime_mean_curvature_u_form();
  const auto chi = s.second_ff_contraction();
  const auto [theta_bar, theta] = s.null_expansions();
  const double scale = h2.max_abs();
  for (std::size_t k = 0; k < h2.values.size(); ++k) {
    EXPECT_NEAR(uform.values[k], h2.values[k], 1e-8 * scale);
    EXPECT_NEAR(2.0 * chi.values[k], h2.values[k], 1e-8 * scale);
    EXPECT_NEAR(theta_bar.values[k] * theta.values[k], h2.values[k], 1e-12 * scale);
  }
}

TEST(CrossSection, CodazziResidual) {
  for (std::uint64_t k = 0; k < 3; ++k) EXPECT_LT(random_section(derive_seed(13, k)).codazzi_residual(), 1e-6);
  EXPECT_LT(perturbed_section(48, 0.1, 3, 2).codazzi_residual(), 1e-6);
  EXPECT_LT(boosted_round(48, 1.0, Eigen::Vector3d(0.0, 0.5, 0.0)).codazzi_residual(), 1e-6);
}

TEST(CrossSection, ScalingLaws) {
  const auto s = random_section(derive_seed(14, 0));
  const double c = 2.5;
  const auto t = s.scaled(c);
  EXPECT_NEAR(t.area(), c * c * s.area(), 1e-12 * t.area());
  EXPECT_NEAR(t.max_h2(), s.max_h2() / (c * c), 1e-12 * s.max_h2());
  EXPECT_NEAR(t.area() * t.tracefree_norm2(), s.area() * s.tracefree_norm2(), 1e-10 * s.area() * s.tracefree_norm2());
}

TEST(CrossSection, CachedValuesMatchSynthesis) {
  const auto s = random_section(derive_seed(15, 0));
  const auto w = synthesize(s.omega(), s.grid());
  for (std::size_t k = 0; k < w.values.size(); ++k) {
    EXPECT_NEAR(s.omega_values().values[k], w.values[k], 1e-12);
    EXPECT_NEAR(s.v_values().values[k] * w.values[k], 1.0, 1e-12);
    EXPECT_NEAR(std::exp(s.u_values().values[k]), w.values[k], 1e-12);
  }
}

TEST(CrossSection, ConnectionOneFormIsMinusDLogOmega) {
  const AxialU ax;
  const auto s = CrossSection::from_function(32, [&](double t, double) { return ax.omega(t); });
  const auto zeta = s.connection_one_form();
  const auto th = s.work_grid().theta_nodes();
  const auto fu = [&](double t) { return ax.u(t); };
  for (int i = 2; i < s.work_grid().n_theta(); i += 9) {
    const std::size_t k = std::size_t(i) * s.work_grid().n_phi();
    EXPECT_NEAR(zeta.theta[k], -fd1(fu, th[i]), 1e-7);
    EXPECT_NEAR(zeta.phi[k], 0.0, 1e-12);
  }
}

TEST(CrossSection, RejectsNonPositiveOmega) {
  SpectralField c(8);
  c(1, 0) = 1.0;  // odd: changes sign
  EXPECT_THROW({ CrossSection s(c); }, Error);
  try {
    CrossSection s(c);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSection);
  }
}

TEST(CrossSection, W22Norm) {
  for (int l : {0, 1, 3, 7}) EXPECT_NEAR(w22_norm(harmonic(8, l, l > 0 ? -1 : 0)), 1.0 + l * (l + 1.0), 1e-14);
  try {
    w22_distance(SpectralField(8), SpectralField(9));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BandlimitMismatch);
  }
}

TEST(CrossSection, GaussCurvatureIsQuarterH2) {
  const auto s = random_section(derive_seed(16, 0));
  const auto k = s.gauss_curvature();
  const auto& h2 = s.geometry().h2;
  for (std::size_t i = 0; i < k.values.size(); i += 97) EXPECT_DOUBLE_EQ(k.values[i], 0.25 * h2.values[i]);
  // Gauss-Bonnet in the K form
  EXPECT_NEAR(s.integrate_on_surface(k), kFourPi, 1e-10);
}
