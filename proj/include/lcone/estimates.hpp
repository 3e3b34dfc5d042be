#pragma once

// Evaluators for the trace-free estimate, its almost-Schur form, the Hoelder
// lemma, the Poisson/Bochner chain, the optimality family F_C, and the
// De Lellis-Mueller type ratios.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "lcone/families.hpp"
#include "lcone/lorentz_action.hpp"

namespace lcone {

constexpr double k128Pi2 = 128.0 * kPi * kPi;

/// Two sides of an inequality lhs <= rhs.
struct InequalityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs, 0 when both vanish
  double min_h2 = 0.0;
  bool is_stcmc = false;
  bool hypothesis_violated = false;  // min H^2 < -1e-10: reported, not counted
  bool passed = false;
};

namespace detail {

// Both sides below this (dimensionless, relative to 128 pi^2) count as zero.
constexpr double kZeroFloor = 1e-10 * k128Pi2;

inline InequalityReport make_report(double lhs, double rhs, double min_h2, bool stcmc) {
  InequalityReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.min_h2 = min_h2;
  r.is_stcmc = stcmc;
  const bool both_zero = std::abs(lhs) <= kZeroFloor && std::abs(rhs) <= kZeroFloor;
  r.ratio = both_zero ? 0.0 : lhs / rhs;
  r.hypothesis_violated = min_h2 < -1e-10;
  r.passed = both_zero || lhs <= rhs * (1.0 + 1e-8);
  return r;
}

inline double mean_h2(const CrossSection& s) { return s.int_h2() / s.area(); }

}  // namespace detail

/// |Sigma| ||A_tf||^2 <= 1e-12 marks a section as STCMC.
inline bool is_stcmc(const CrossSection& s) { return s.area() * s.tracefree_norm2() <= 1e-12; }

struct GapReport {
  InequalityReport report;
  double lhs_decomposition = 0.0;  // |Sigma| int (|A_tf|^2 + (H^2 - mean)^2 / 2)
  double lhs_rewrite = 0.0;        // |Sigma| int |A|^2 - 128 pi^2
  double chain_error = 0.0;        // |decomposition - rewrite|
  bool chain_consistent = false;   // chain_error <= 1e-8 |lhs| + 1e-12 * 128 pi^2
  double mean_h2_error = 0.0;      // |mean H^2 / 2 - 2 / r^2| * r^2
};

/// |Sigma| int |A - (mean H^2 / 2) gamma|^2 <= 2 |Sigma| int |A_tf|^2.
inline GapReport tracefree_gap(const CrossSection& s) {
  const auto& g = s.geometry();
  const double area = s.area();
  const double mean = detail::mean_h2(s);
  auto decomposition = pointwise([mean](double a, double h) { return a + 0.5 * (h - mean) * (h - mean); }, g.a_tf_density, g.h2);
  auto full = pointwise([](double a, double h) { return a + 0.5 * h * h; }, g.a_tf_density, g.h2);
  GapReport out;
  out.lhs_decomposition = area * s.integrate_on_surface(decomposition);
  out.lhs_rewrite = area * s.integrate_on_surface(full) - k128Pi2;
  out.chain_error = std::abs(out.lhs_decomposition - out.lhs_rewrite);
  out.chain_consistent = out.chain_error <= 1e-8 * std::abs(out.lhs_decomposition) + 1e-12 * k128Pi2;
  const double r = s.area_radius();
  out.mean_h2_error = std::abs(0.5 * mean - 2.0 / (r * r)) * r * r;
  const double rhs = 2.0 * area * s.tracefree_norm2();
  out.report = detail::make_report(out.lhs_decomposition, rhs, s.min_h2(), is_stcmc(s));
  return out;
}

struct SchurReport {
  InequalityReport report;
  double identity_error = 0.0;  // |gap lhs (rewrite) - (|Sigma| ||A_tf||^2 + lhs/2)|, relative to 128 pi^2
};

/// |Sigma| ||H^2 - mean H^2||^2 <= 2 |Sigma| ||A_tf||^2 on L^2(Sigma).
inline SchurReport almost_schur(const CrossSection& s) {
  const auto& g = s.geometry();
  const double area = s.area();
  const double mean = detail::mean_h2(s);
  const double lhs = area * s.integrate_on_surface(pointwise([mean](double h) { return (h - mean) * (h - mean); }, g.h2));
  const double a2 = area * s.tracefree_norm2();
  SchurReport out;
  out.report = detail::make_report(lhs, 2.0 * a2, s.min_h2(), is_stcmc(s));
  const auto gap = tracefree_gap(s);
  out.identity_error = std::abs(gap.lhs_rewrite - (a2 + 0.5 * lhs)) / k128Pi2;
  return out;
}

struct HoelderReport {
  InequalityReport report;
  bool equality = false;  // rhs - lhs <= 1e-9 rhs
};

/// int f dmu * int f^2 dmu <= mu(X) int f^3 dmu with dmu = weight dOmega^2, f >= 0.
inline HoelderReport hoelder_lemma(const ScalarField& f, const ScalarField& weight) {
  const double scale = f.max_abs();
  for (double v : f.values)
    if (v < -1e-12 * scale) throw Error(ErrorKind::InvalidInput, "f must be nonnegative");
  for (double v : weight.values)
    if (v < 0.0) throw Error(ErrorKind::InvalidInput, "measure weight must be nonnegative");
  auto moment = [&](int p) {
    return integrate(pointwise([p](double x, double w) { return std::pow(std::max(x, 0.0), p) * w; }, f, weight));
  };
  const double m0 = moment(0);
  const double m1 = moment(1);
  if (!(m1 > 0.0)) throw Error(ErrorKind::InvalidInput, "int f dmu must be positive");
  HoelderReport out;
  const double lhs = m1 * moment(2);
  const double rhs = m0 * moment(3);
  out.report.lhs = lhs;
  out.report.rhs = rhs;
  out.report.ratio = lhs / rhs;
  out.report.min_h2 = 0.0;
  out.report.passed = lhs <= rhs * (1.0 + 1e-12);
  out.equality = rhs - lhs <= 1e-9 * rhs;
  return out;
}

struct PoissonSolution {
  SpectralField f;  // zero round mean, degree 2L
  ScalarField values;
  double residual = 0.0;  // max |Lap_gamma f - rhs| on the grid
};

/// Zero-mean solution of Lap_gamma f = rhs, i.e. Lap_{S^2} f = omega^2 rhs.
/// rhs lives on the section's work grid.
inline PoissonSolution poisson_solve(const CrossSection& s, const ScalarField& rhs) {
  if (!(rhs.grid == s.work_grid())) throw Error(ErrorKind::ShapeMismatch, "rhs must live on the section's work grid");
  const double mean = s.integrate_on_surface(rhs);
  const double scale = s.integrate_on_surface(pointwise([](double x) { return std::abs(x); }, rhs));
  // the absolute floor admits rounding-level right-hand sides (STCMC inputs)
  if (std::abs(mean) > 1e-9 * scale + 1e-12) {
    char msg[64];
    std::snprintf(msg, sizeof msg, "rhs has nonzero mean %.3e", mean);
    throw Error(ErrorKind::InvalidRhs, msg);
  }
  const auto& w = s.geometry().omega;
  const int D = s.work_grid().max_degree();
  auto src = analyze(pointwise([](double r, double om) { return r * om * om; }, rhs, w), D);
  SpectralField f(D);
  for (int l = 1; l <= D; ++l)
    for (int m = -l; m <= l; ++m) f(l, m) = -src(l, m) / (l * (l + 1.0));
  PoissonSolution out{f, synthesize(f, s.work_grid()), 0.0};
  auto lap = synthesize(laplacian(f), s.work_grid());
  for (std::size_t k = 0; k < lap.values.size(); ++k)
    out.residual = std::max(out.residual, std::abs(lap.values[k] / (w.values[k] * w.values[k]) - rhs.values[k]));
  return out;
}

/// Round-frame components of Hess_gamma f for gamma = e^{2 phi} dOmega^2:
///   Hess_gamma f = Hess f - (dphi (x) df + df (x) dphi - <grad phi, grad f> dOmega^2).
inline SymTensorField conformal_hessian(const SpectralField& f, const TangentField& grad_phi) {
  const GridSpec& grid = grad_phi.grid;
  auto hess = hessian(f, grid);
  auto grad_f = gradient(f, grid);
  for (std::size_t k = 0; k < hess.tt.size(); ++k) {
    const double pt = grad_phi.theta[k];
    const double pp = grad_phi.phi[k];
    const double ft = grad_f.theta[k];
    const double fp = grad_f.phi[k];
    const double dot = pt * ft + pp * fp;
    hess.tt[k] -= 2.0 * pt * ft - dot;
    hess.tp[k] -= pt * fp + pp * ft;
    hess.pp[k] -= 2.0 * pp * fp - dot;
  }
  return hess;
}

struct BochnerChain {
  double variance = 0.0;       // int (H^2 - mean)^2 dmu
  double pairing = 0.0;        // 2 int <A_tf, TF(Hess_gamma f)> dmu
  double cauchy_schwarz = 0.0; // 2 ||A_tf|| ||TF(Hess_gamma f)||
  double hess_tf_norm2 = 0.0;  // ||TF(Hess_gamma f)||^2
  double bochner = 0.0;        // int ((Lap_gamma f)^2 / 2 - H^2 |grad f|^2_gamma / 4) dmu
  double equality_error = 0.0; // |variance - pairing| / max(variance, floor)
  double bochner_error = 0.0;  // |hess_tf_norm2 - bochner| / max(hess_tf_norm2, floor)
  double poisson_residual = 0.0;
};

inline BochnerChain bochner_chain(const CrossSection& s) {
  const auto& g = s.geometry();
  const double mean = detail::mean_h2(s);
  auto rhs = pointwise([mean](double h) { return h - mean; }, g.h2);
  auto sol = poisson_solve(s, rhs);
  const GridSpec& grid = s.work_grid();
  auto grad_phi = s.connection_one_form();  // -d ln omega
  for (std::size_t k = 0; k < grad_phi.theta.size(); ++k) {
    grad_phi.theta[k] = -grad_phi.theta[k];
    grad_phi.phi[k] = -grad_phi.phi[k];
  }
  auto hess_tf = conformal_hessian(sol.f, grad_phi).tracefree();
  auto a_tf = s.tracefree_A().components;
  auto grad_f = gradient(sol.f, grid).norm2();
  auto lap_f = synthesize(laplacian(sol.f), grid);
  BochnerChain out;
  out.poisson_residual = sol.residual;
  out.variance = s.integrate_on_surface(pointwise([](double x) { return x * x; }, rhs));
  // (0,2) tensors: <T,S>_gamma = omega^{-4} <T,S>_round
  auto w4 = pointwise([](double w) { return 1.0 / (w * w * w * w); }, g.omega);
  auto pair = pointwise([](double p, double q) { return p * q; }, inner(a_tf, hess_tf), w4);
  out.pairing = 2.0 * s.integrate_on_surface(pair);
  out.hess_tf_norm2 = s.integrate_on_surface(pointwise([](double p, double q) { return p * q; }, hess_tf.norm2(), w4));
  out.cauchy_schwarz = 2.0 * s.tracefree_norm() * std::sqrt(out.hess_tf_norm2);
  ScalarField bochner(grid);
  for (std::size_t k = 0; k < bochner.values.size(); ++k) {
    const double w2 = g.omega.values[k] * g.omega.values[k];
    const double lap_gamma = lap_f.values[k] / w2;
    bochner.values[k] = 0.5 * lap_gamma * lap_gamma - 0.25 * g.h2.values[k] * grad_f.values[k] / w2;
  }
  out.bochner = s.integrate_on_surface(bochner);
  const double floor = 1e-12 * mean * mean * s.area();
  out.equality_error = std::abs(out.variance - out.pairing) / std::max(out.variance, floor);
  out.bochner_error = std::abs(out.hess_tf_norm2 - out.bochner) / std::max(out.hess_tf_norm2, floor);
  return out;
}

struct OptimalityScan {
  double c = 2.0;
  int degree = 1;
  int order = 0;
  std::vector<double> s_values;
  std::vector<double> f_values;
  double second_derivative_fd = 0.0;
  double second_derivative_formula = 0.0;
  double relative_error = 0.0;
  double second_derivative_expansion = 0.0;
  double relative_error_expansion = 0.0;
};

/// Published closed form 64 pi ((C-2) mu^2 + (8-2C) mu - 6), mu = l(l+1),
/// for L^2-normalized f.
inline double optimality_formula(double c, int l) {
  const double mu = l * (l + 1.0);
  return 64.0 * kPi * ((c - 2.0) * mu * mu + (8.0 - 2.0 * c) * mu - 6.0);
}

/// Second-order expansion of F_C in s:
///   |Sigma| = 4 pi + 3 s^2, |Sigma| int (H^2)^2 = 256 pi^2 + 64 pi s^2 (mu - 2)^2,
///   |Sigma| int |A_tf|^2 = 32 pi s^2 mu (mu - 2),
/// so F_C''(0) = 64 pi ((C-2) mu^2 + (8-2C) mu - 8). It differs from the
/// published form only through d^2/ds^2 int (1+sf)^{-2} = 6 int f^2 (not 4),
/// and vanishes at l = 1 where omega_s is an exact STCMC section.
inline double optimality_expansion(double c, int l) {
  const double mu = l * (l + 1.0);
  return 64.0 * kPi * ((c - 2.0) * mu * mu + (8.0 - 2.0 * c) * mu - 8.0);
}

/// Integrals entering F_C for omega_s = 1/(1 + s Y_l^m):
/// (|Sigma| int |A_tf|^2, |Sigma| int (H^2)^2).
inline std::pair<double, double> optimality_integrals(int bandlimit, double s, int l, int m) {
  const auto sec = perturbed_section(bandlimit, s, l, m);
  const auto& g = sec.geometry();
  const double area = sec.area();
  return {area * sec.tracefree_norm2(), area * sec.integrate_on_surface(pointwise([](double h) { return h * h; }, g.h2))};
}

/// Samples F_C(s) = C |Sigma| int |A_tf|^2 + 256 pi^2 - |Sigma| int (H^2)^2 at n
/// symmetric points in [-s_max, s_max] (n odd, >= 5) and compares the
/// five-point second difference at 0 with the closed form.
inline OptimalityScan optimality_scan(double c, int l, int m, double s_max, int n, int bandlimit = 32) {
  if (n < 5 || n % 2 == 0) throw Error(ErrorKind::InvalidInput, "n must be odd and >= 5");
  if (l < 1 || std::abs(m) > l) throw Error(ErrorKind::InvalidInput, "need l >= 1 and |m| <= l");
  OptimalityScan out;
  out.c = c;
  out.degree = l;
  out.order = m;
  const int half = n / 2;
  const double h = s_max / half;
  for (int k = -half; k <= half; ++k) {
    const double s = k * h;
    const auto [a2, h4] = optimality_integrals(bandlimit, s, l, m);
    out.s_values.push_back(s);
    out.f_values.push_back(c * a2 + 2.0 * k128Pi2 - h4);
  }
  const auto& f = out.f_values;
  out.second_derivative_fd =
      (-f[half + 2] + 16.0 * f[half + 1] - 30.0 * f[half] + 16.0 * f[half - 1] - f[half - 2]) / (12.0 * h * h);
  out.second_derivative_formula = optimality_formula(c, l);
  out.relative_error = std::abs(out.second_derivative_fd - out.second_derivative_formula) / std::abs(out.second_derivative_formula);
  out.second_derivative_expansion = optimality_expansion(c, l);
  // l = 1 has zero expansion value; compare against the l = 2 scale 64 pi instead
  out.relative_error_expansion = std::abs(out.second_derivative_fd - out.second_derivative_expansion) /
                                 std::max(std::abs(out.second_derivative_expansion), 64.0 * kPi);
  return out;
}

struct DlmRatio {
  double w22_distance = 0.0;  // ||omega - omega_Z||_{W^{2,2}}
  double rhs = 0.0;           // |Sigma| ||A_tf||_{L^2(Sigma)}
  double ratio = 0.0;
  double w22_rescaled2 = 0.0; // ||omega/r - omega_Z/r_Z||^2_{W^{2,2}}
  double rhs_rescaled = 0.0;  // |Sigma| ||A_tf||^2
  double ratio_rescaled = 0.0;
  double kappa = 0.0;
  FourVector z;
  bool hypothesis_violated = false;
};

inline DlmRatio dlm_ratio(const CrossSection& s) {
  DlmRatio out;
  out.z = z_vector(s);
  const auto wz = stcmc_from_z(out.z, s.bandlimit());
  out.w22_distance = w22_distance(s.omega(), wz.omega());
  const double a2 = s.tracefree_norm2();
  out.rhs = s.area() * std::sqrt(a2);
  out.ratio = (out.w22_distance == 0.0 && out.rhs == 0.0) || is_stcmc(s) ? 0.0 : out.w22_distance / out.rhs;
  const double r = s.area_radius();
  const double rz = out.z.proper_length();
  const double d = w22_norm(s.omega() * (1.0 / r) - wz.omega() * (1.0 / rz));
  out.w22_rescaled2 = d * d;
  out.rhs_rescaled = s.area() * a2;
  out.ratio_rescaled = is_stcmc(s) ? 0.0 : out.w22_rescaled2 / out.rhs_rescaled;
  out.kappa = kappa_bound(s);
  out.hypothesis_violated = s.min_h2() < -1e-10;
  return out;
}

/// Balances and rescales to area 4 pi.
inline CrossSection balanced_unit_representative(const CrossSection& s) {
  const auto b = balance(s);
  return b.section.scaled(1.0 / b.section.area_radius());
}

struct K2Distance {
  double k_distance = 0.0;    // ||K - 1||_{L^2(S^2, dOmega^2)}
  double w22_to_one = 0.0;    // ||omega - 1||_{W^{2,2}}
  double ratio = 0.0;         // w22_to_one / k_distance (0 when both vanish)
};

inline K2Distance k2_distance(const CrossSection& s) {
  const double residual = first_moment_residual(s);
  if (residual > 1e-6) throw Error(ErrorKind::PreconditionViolated, "section is not balanced (residual " + std::to_string(residual) + ")");
  if (std::abs(s.area() / kFourPi - 1.0) > 1e-9) throw Error(ErrorKind::PreconditionViolated, "section area is not 4 pi");
  K2Distance out;
  auto k = s.gauss_curvature();
  out.k_distance = std::sqrt(integrate(pointwise([](double x) { return (x - 1.0) * (x - 1.0); }, k)));
  auto diff = s.omega();
  diff(0, 0) -= std::sqrt(kFourPi);
  out.w22_to_one = w22_norm(diff);
  out.ratio = out.k_distance <= 1e-12 ? 0.0 : out.w22_to_one / out.k_distance;
  return out;
}

/// ||K_Lambda - 1||_{L^2(Sigma)}, the quantity preserved by Lorentz maps.
inline double k_defect_on_surface(const CrossSection& s) {
  auto k = s.gauss_curvature();
  return std::sqrt(s.integrate_on_surface(pointwise([](double x) { return (x - 1.0) * (x - 1.0); }, k)));
}

struct RadiusComparison {
  double r = 0.0;
  double r_z = 0.0;
  double gap = 0.0;  // r_Z - r, >= 0 with equality exactly on STCMC
};

inline RadiusComparison radius_comparison(const CrossSection& s) {
  RadiusComparison out;
  out.r = s.area_radius();
  out.r_z = z_vector(s).proper_length();
  out.gap = out.r_z - out.r;
  return out;
}

/// Flat analysis record of one section.
struct GeometryReport {
  double area = 0.0;
  double area_radius = 0.0;
  double min_h2 = 0.0;
  double max_h2 = 0.0;
  double int_h2 = 0.0;
  double norm_a_tracefree = 0.0;
  double gap_lhs = 0.0;
  double gap_rhs = 0.0;
  FourVector z_vector;
  double kappa = 0.0;
  double codazzi_residual = 0.0;
  double w22_to_reference = 0.0;
};

inline GeometryReport geometry_report(const CrossSection& s) {
  GeometryReport r;
  r.area = s.area();
  r.area_radius = s.area_radius();
  r.min_h2 = s.min_h2();
  r.max_h2 = s.max_h2();
  r.int_h2 = s.int_h2();
  r.norm_a_tracefree = s.tracefree_norm();
  const auto gap = tracefree_gap(s);
  r.gap_lhs = gap.report.lhs;
  r.gap_rhs = gap.report.rhs;
  r.z_vector = z_vector(s);
  r.kappa = kappa_bound(s);
  r.codazzi_residual = s.codazzi_residual();
  r.w22_to_reference = w22_distance(s.omega(), stcmc_from_z(r.z_vector, s.bandlimit()).omega());
  return r;
}

}  // namespace lcone
