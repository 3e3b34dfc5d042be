#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "lcone/compactness.hpp"
#include "lcone/estimates.hpp"

using namespace lcone;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InternalError;
}

CrossSection stcmc() { return boosted_round(48, 1.3, Eigen::Vector3d(0.3, -0.2, 0.5)); }

}  // namespace

TEST(TracefreeGap, StcmcIsEquality) {
  const auto g = tracefree_gap(stcmc());
  EXPECT_TRUE(g.report.is_stcmc);
  EXPECT_TRUE(g.report.passed);
  EXPECT_EQ(g.report.ratio, 0.0);
  EXPECT_LT(std::abs(g.report.lhs), 1e-7 * k128Pi2);
  EXPECT_LT(g.report.rhs, 1e-7 * k128Pi2);
}

TEST(TracefreeGap, SmallPerturbationRatio) {
  // to second order in s: |Sigma| int |A_tf|^2 = 32 pi s^2 mu (mu - 2) and
  // |Sigma| int (H^2 - mean)^2 / 2 = 32 pi s^2 (mu - 2)^2, so ratio -> (mu - 1)/mu
  double previous = 0.0;
  for (int l : {2, 4, 8, 12}) {
    const double mu = l * (l + 1.0);
    const auto g = tracefree_gap(perturbed_section(48, 1e-3, l, 0));
    EXPECT_NEAR(g.report.ratio, (mu - 1.0) / mu, 2e-3) << "l = " << l;
    EXPECT_GT(g.report.ratio, previous);
    EXPECT_LE(g.report.ratio, 1.0);
    previous = g.report.ratio;
  }
  const auto g = tracefree_gap(perturbed_section(48, 0.05, 2, 0));
  EXPECT_LE(g.report.ratio, 0.99);
}

TEST(TracefreeGap, ChainAndMeanCrossChecks) {
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto g = tracefree_gap(random_section(derive_seed(21, k)));
    EXPECT_TRUE(g.chain_consistent) << g.chain_error;
    EXPECT_LT(g.mean_h2_error, 1e-8);
    EXPECT_TRUE(g.report.passed);
    EXPECT_FALSE(g.report.hypothesis_violated);
    EXPECT_LT(g.report.ratio, 1.0);
  }
}

TEST(TracefreeGap, ScaleInvariant) {
  const auto s = random_section(derive_seed(22, 0));
  const auto a = tracefree_gap(s).report;
  const auto b = tracefree_gap(s.scaled(3.0)).report;
  EXPECT_NEAR(a.lhs, b.lhs, 1e-10 * a.lhs);
  EXPECT_NEAR(a.rhs, b.rhs, 1e-10 * a.rhs);
}

TEST(AlmostSchur, IdentityAndFlags) {
  const auto s = random_section(derive_seed(23, 0));
  const auto r = almost_schur(s);
  EXPECT_LT(r.identity_error, 1e-9);
  EXPECT_TRUE(r.report.passed);
  const auto st = almost_schur(stcmc());
  EXPECT_TRUE(st.report.is_stcmc);
  EXPECT_EQ(st.report.ratio, 0.0);
  const auto bad = almost_schur(perturbed_section(48, 0.1, 4, 0));
  EXPECT_TRUE(bad.report.hypothesis_violated);
  EXPECT_LT(bad.report.min_h2, 0.0);
}

TEST(Hoelder, ConstantIsEquality) {
  const auto grid = make_grid(16);
  const auto r = hoelder_lemma(ScalarField(grid, 2.5), ScalarField(grid, 1.0));
  EXPECT_TRUE(r.equality);
  EXPECT_TRUE(r.report.passed);
}

TEST(Hoelder, ClosedFormMoments) {
  // f = 1 + cos(theta) on dOmega^2: int f = 4 pi, int f^2 = 16 pi/3, int f^3 = 8 pi
  const auto grid = make_grid(16);
  const auto f = sample(grid, [](double t, double) { return 1.0 + std::cos(t); });
  const auto r = hoelder_lemma(f, ScalarField(grid, 1.0));
  EXPECT_NEAR(r.report.lhs, 64.0 * kPi * kPi / 3.0, 1e-11);
  EXPECT_NEAR(r.report.rhs, 32.0 * kPi * kPi, 1e-11);
  EXPECT_FALSE(r.equality);
  EXPECT_TRUE(r.report.passed);
}

TEST(Hoelder, SectionUsageAndErrors) {
  const auto s = random_section(derive_seed(24, 0));
  const auto w2 = pointwise([](double w) { return w * w; }, s.geometry().omega);
  const auto r = hoelder_lemma(s.geometry().h2, w2);
  EXPECT_TRUE(r.report.passed);
  EXPECT_FALSE(r.equality);
  const auto grid = make_grid(8);
  const auto neg = sample(grid, [](double t, double) { return std::cos(t); });
  EXPECT_EQ(kind_of([&] { hoelder_lemma(neg, ScalarField(grid, 1.0)); }), ErrorKind::InvalidInput);
}

TEST(Poisson, TrivialAndEigenfunction) {
  const auto round = round_section(16, 1.0);
  const auto zero = poisson_solve(round, ScalarField(round.work_grid(), 0.0));
  EXPECT_LT(w22_norm(zero.f), 1e-15);
  const auto y20 = synthesize(harmonic(16, 2, 0), round.work_grid());
  const auto sol = poisson_solve(round, y20);
  auto expected = harmonic(32, 2, 0) * (-1.0 / 6.0);
  EXPECT_LT(w22_distance(sol.f, expected), 1e-13);
}

TEST(Poisson, RandomSectionResidual) {
  const auto s = random_section(derive_seed(25, 0));
  const double mean = s.int_h2() / s.area();
  const auto rhs = pointwise([mean](double h) { return h - mean; }, s.geometry().h2);
  const auto sol = poisson_solve(s, rhs);
  EXPECT_LT(sol.residual, 1e-7);
  EXPECT_NEAR(sol.f(0, 0), 0.0, 1e-15);
}

TEST(Poisson, NonzeroMeanRejected) {
  const auto s = random_section(derive_seed(26, 0));
  EXPECT_EQ(kind_of([&] { poisson_solve(s, s.geometry().h2); }), ErrorKind::InvalidRhs);
}

TEST(ConformalHessian, FiniteDifferenceChristoffel) {
  // gamma = e^{2 phi}(dtheta^2 + sin^2 dphi^2): Hess_ij = d_i d_j f - Gamma^k_ij d_k f
  SpectralField phi_c(8), f_c(8);
  phi_c(2, 1) = 0.3;
  phi_c(3, -2) = 0.2;
  phi_c(1, 0) = -0.1;
  f_c(2, 0) = 1.0;
  f_c(3, 1) = 0.5;
  f_c(4, -3) = 0.25;
  const auto grid = make_grid(8);
  const auto hess = conformal_hessian(f_c, gradient(phi_c, grid));
  auto F = [&](double t, double p) { return evaluate_at(f_c, t, p); };
  auto P = [&](double t, double p) { return evaluate_at(phi_c, t, p); };
  const double h = 1e-4;
  const auto th = grid.theta_nodes();
  const auto ph = grid.phi_nodes();
  for (int i = 1; i < grid.n_theta(); i += 3)
    for (int j = 0; j < grid.n_phi(); j += 5) {
      const double t = th[i], p = ph[j];
      const double ft = (F(t + h, p) - F(t - h, p)) / (2 * h);
      const double fp = (F(t, p + h) - F(t, p - h)) / (2 * h);
      const double ftt = (F(t + h, p) - 2 * F(t, p) + F(t - h, p)) / (h * h);
      const double fpp = (F(t, p + h) - 2 * F(t, p) + F(t, p - h)) / (h * h);
      const double ftp = (F(t + h, p + h) - F(t + h, p - h) - F(t - h, p + h) + F(t - h, p - h)) / (4 * h * h);
      const double pt = (P(t + h, p) - P(t - h, p)) / (2 * h);
      const double pp = (P(t, p + h) - P(t, p - h)) / (2 * h);
      const double s = std::sin(t), c = std::cos(t);
      // Christoffel symbols of e^{2 phi} diag(1, s^2)
      const double G_t_tt = pt, G_p_tt = -pp / (s * s);
      const double G_t_tp = pp, G_p_tp = pt + c / s;
      const double G_t_pp = -s * s * pt - s * c, G_p_pp = pp;
      const double Htt = ftt - G_t_tt * ft - G_p_tt * fp;
      const double Htp = ftp - G_t_tp * ft - G_p_tp * fp;
      const double Hpp = fpp - G_t_pp * ft - G_p_pp * fp;
      const std::size_t k = std::size_t(i) * grid.n_phi() + j;
      EXPECT_NEAR(hess.tt[k], Htt, 1e-5);
      EXPECT_NEAR(hess.tp[k], Htp / s, 1e-5);
      EXPECT_NEAR(hess.pp[k], Hpp / (s * s), 1e-5);
    }
}

TEST(BochnerChain, StcmcIsZero) {
  const auto b = bochner_chain(stcmc());
  EXPECT_LT(b.variance, 1e-14);
  EXPECT_LT(std::abs(b.pairing), 1e-14);
  EXPECT_LT(b.hess_tf_norm2, 1e-14);
}

TEST(BochnerChain, Links) {
  const auto p = bochner_chain(perturbed_section(48, 0.05, 2, 0));
  EXPECT_LT(p.equality_error, 1e-7);
  EXPECT_LT(p.bochner_error, 1e-6);
  for (std::uint64_t k = 0; k < 3; ++k) {
    const auto b = bochner_chain(random_section(derive_seed(27, k)));
    EXPECT_LT(b.equality_error, 1e-6);
    EXPECT_LT(b.bochner_error, 1e-6);
    EXPECT_LE(b.pairing, b.cauchy_schwarz * (1 + 1e-12));
    EXPECT_GT(b.cauchy_schwarz - b.pairing, 0.0);
  }
}

TEST(Optimality, ScanShapeAndZeroAtOrigin) {
  const auto scan = optimality_scan(2.0, 3, 1, 1e-2, 7);
  ASSERT_EQ(scan.s_values.size(), 7u);
  for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(scan.s_values[k], -scan.s_values[6 - k], 1e-18);
  EXPECT_LT(std::abs(scan.f_values[3]), 1e-9);
}

TEST(Optimality, MatchesSecondOrderExpansion) {
  for (double c : {1.0, 1.5, 2.0, 3.0})
    for (int l = 1; l <= 8; ++l) {
      const auto scan = optimality_scan(c, l, 0, 1e-2, 5);
      EXPECT_LT(scan.relative_error_expansion, 1e-2) << "C = " << c << ", l = " << l;
    }
  // l = 1 perturbations are exact STCMC sections
  EXPECT_LT(std::abs(optimality_scan(1.0, 1, 1, 1e-2, 5).second_derivative_fd), 1e-3);
}

TEST(Optimality, PublishedFormOffsetIs128Pi) {
  for (int l : {2, 5, 8}) {
    const auto scan = optimality_scan(2.0, l, 0, 1e-2, 5);
    EXPECT_NEAR(scan.second_derivative_formula - scan.second_derivative_fd, 128.0 * kPi, 0.5e-2 * std::abs(scan.second_derivative_expansion) + 1.0);
  }
  EXPECT_NEAR(optimality_formula(2.0, 1), 64.0 * kPi * 2.0, 1e-9);
  EXPECT_NEAR(optimality_formula(2.0, 2), 64.0 * kPi * 18.0, 1e-9);
}

TEST(Optimality, BelowTwoFails) {
  const auto scan = optimality_scan(1.5, 6, 0, 1e-2, 5);
  EXPECT_LT(scan.second_derivative_fd, 0.0);
  EXPECT_LT(scan.second_derivative_formula, 0.0);
  EXPECT_LT(scan.f_values[0], 0.0);
}

TEST(Optimality, Errors) {
  EXPECT_EQ(kind_of([] { optimality_scan(2.0, 2, 0, 4.0, 5); }), ErrorKind::SRangeTooLarge);
  EXPECT_EQ(kind_of([] { optimality_scan(2.0, 2, 0, 1e-2, 4); }), ErrorKind::InvalidInput);
}

TEST(DlmRatio, StcmcIsZero) {
  const auto d = dlm_ratio(stcmc());
  EXPECT_EQ(d.ratio, 0.0);
  EXPECT_LT(d.w22_distance, 1e-9);
}

TEST(DlmRatio, BoundedOverShrinkingFamily) {
  const FourVector z(1.2, 0.3, 0.0, -0.5);
  const auto base = stcmc_from_z(z, 48);
  std::vector<double> ratios, rescaled;
  for (double eps : {1e-1, 3e-2, 1e-2, 3e-3}) {
    const auto s = exp_modulated(base, eps, harmonic(48, 2, 0));
    const auto d = dlm_ratio(s);
    ratios.push_back(d.ratio);
    const auto boosted = dlm_ratio(apply_to_section(boost_toward(Eigen::Vector3d(0.5, 0.0, 0.0)), s));
    EXPECT_LT(boosted.ratio_rescaled / d.ratio_rescaled, 3.0);
    EXPECT_GT(boosted.ratio_rescaled / d.ratio_rescaled, 1.0 / 3.0);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_LE(*hi / *lo, 2.0);
}

TEST(K2Distance, RoundIsZero) {
  const auto d = k2_distance(round_section(24, 1.0));
  EXPECT_LT(d.k_distance, 1e-9);
  EXPECT_LT(d.w22_to_one, 1e-12);
}

TEST(K2Distance, Preconditions) {
  const auto s = boosted_round(48, 1.0, Eigen::Vector3d(0.0, 0.4, 0.0));
  EXPECT_EQ(kind_of([&] { k2_distance(s); }), ErrorKind::PreconditionViolated);
  EXPECT_EQ(kind_of([] { k2_distance(round_section(24, 2.0)); }), ErrorKind::PreconditionViolated);
  const auto b = k2_distance(balanced_unit_representative(s));
  EXPECT_LT(b.k_distance, 1e-8);
  EXPECT_LT(b.w22_to_one, 1e-8);
}

TEST(K2Distance, BoundedRatio) {
  std::vector<double> ratios;
  for (double eps : {1e-2, 1e-3}) {
    const auto s = exp_modulated(round_section(48, 1.0), eps, harmonic(48, 3, 1));
    const auto d = k2_distance(balanced_unit_representative(s));
    ratios.push_back(d.ratio);
  }
  EXPECT_LT(std::max(ratios[0], ratios[1]) / std::min(ratios[0], ratios[1]), 2.0);
}

TEST(K2Distance, KDefectInvariantUnderBoost) {
  const auto s = random_section(derive_seed(28, 0));
  const auto image = apply_to_section(boost_toward(Eigen::Vector3d(0.4, -0.3, 0.2)), s);
  EXPECT_NEAR(k_defect_on_surface(image) / k_defect_on_surface(s), 1.0, 1e-6);
}

TEST(RadiusComparison, RzAtLeastR) {
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto rc = radius_comparison(random_section(derive_seed(29, k)));
    EXPECT_GT(rc.gap, 1e-8 * rc.r);
  }
  const auto rc = radius_comparison(stcmc());
  EXPECT_LT(std::abs(rc.gap), 1e-8 * rc.r);
}

TEST(GeometryReport, FieldsMatchLibraryCalls) {
  const auto s = random_section(derive_seed(30, 0));
  const auto r = geometry_report(s);
  EXPECT_DOUBLE_EQ(r.area, s.area());
  EXPECT_NEAR(r.area_radius, std::sqrt(r.area / kFourPi), 1e-15);
  EXPECT_DOUBLE_EQ(r.norm_a_tracefree, s.tracefree_norm());
  EXPECT_DOUBLE_EQ(r.gap_lhs, tracefree_gap(s).report.lhs);
  EXPECT_DOUBLE_EQ(r.kappa, kappa_bound(s));
  EXPECT_GT(r.w22_to_reference, 0.0);
}

TEST(Compactness, ConvergentSequence) {
  const auto c = convergent_sequence(6, 3);
  ASSERT_EQ(c.terms.size(), 6u);
  for (std::size_t k = 1; k < 6; ++k) {
    EXPECT_LT(c.terms[k].w22_to_limit, c.terms[k - 1].w22_to_limit);
    EXPECT_LT(c.terms[k].z_error, c.terms[k - 1].z_error);
  }
  EXPECT_LT(c.terms.back().w22_to_limit, c.terms.front().w22_to_limit / 10.0);
}

TEST(Compactness, DivergentFamily) {
  const auto d = divergent_family(6);
  for (std::size_t k = 0; k < d.terms.size(); ++k) {
    EXPECT_LT(d.terms[k].tracefree_norm, 1e-8);
    EXPECT_LT(d.terms[k].kappa, 1e-8);
    EXPECT_NEAR(d.terms[k].area_radius, 1.0, 1e-10);
    if (k > 0) {
      EXPECT_GE(d.terms[k].c0_step, 0.1);
    }
  }
}
