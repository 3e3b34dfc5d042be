#pragma once

// Spacelike cross sections of the future lightcone in 3+1 Minkowski space,
// written as graphs {r = omega} over the round sphere, gamma = omega^2 dOmega^2.
//
// Everything is reduced to round-sphere calculus on v = 1/omega:
//   H^2     = 4 (v^2 - |grad v|^2 + v Lap v)
//   A_tf    = 4 omega TF(Hess v)            (round-frame components)
//   |A_tf|^2_gamma = 16 v^2 |TF(Hess v)|^2
//   theta_bar = 2/omega, theta = omega H^2 / 2, zeta = -d omega / omega.
// Nonlinear quantities live on the oversampled grid; v is projected to
// degree 2L there.

#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "lcone/spectral.hpp"

namespace lcone {

/// Pointwise geometry of a section on its work (oversampled) grid.
struct SectionGeometry {
  ScalarField omega;
  ScalarField v;
  SpectralField v_coeffs;  // degree 2L projection of 1/omega
  TangentField grad_v;
  ScalarField lap_v;
  SymTensorField hess_v_tf;  // TF(Hess v), round frame
  ScalarField h2;
  ScalarField a_tf_density;  // |A_tf|^2_gamma
  double area = 0.0;
};

struct TracefreeA {
  SymTensorField hess_v_tf;  // TF(Hess_{S^2} v)
  SymTensorField components; // A_tf = 4 omega TF(Hess v), round frame
  ScalarField density;       // |A_tf|^2_gamma
};

inline void check_conformal_factor(double lo, double hi) {
  if (!(lo > 0.0) || lo < 1e-8 * hi || !std::isfinite(hi))
    throw Error(ErrorKind::DegenerateSection,
                "conformal factor not strictly positive (min " + std::to_string(lo) + ", max " + std::to_string(hi) + ")");
}

/// H^2 and omega on the oversampled grid straight from the coefficients of
/// omega, without the rest of the section geometry.
inline std::pair<ScalarField, ScalarField> omega_and_h2(const SpectralField& omega) {
  const auto work = make_grid_oversampled(omega.bandlimit());
  auto w = synthesize(omega, work);
  check_conformal_factor(w.min(), w.max());
  auto vc = analyze(pointwise([](double x) { return 1.0 / x; }, w), work.max_degree());
  auto parts = synthesize_partials(vc, work, kValue | kTheta | kPhi);
  auto lap = synthesize(laplacian(vc), work);
  ScalarField h2(work);
  const auto s = work.sin_theta();
  const int np = work.n_phi();
  for (int i = 0; i < work.n_theta(); ++i)
    for (int j = 0; j < np; ++j) {
      const std::size_t k = std::size_t(i) * np + j;
      const double v = parts.f[k];
      const double gp = parts.p[k] / s[i];
      h2.values[k] = 4.0 * (v * v - parts.t[k] * parts.t[k] - gp * gp + v * lap.values[k]);
    }
  return {std::move(w), std::move(h2)};
}

class CrossSection {
 public:
  CrossSection() = default;

  explicit CrossSection(SpectralField omega) : omega_(std::move(omega)) {
    const int L = omega_.bandlimit();
    grid_ = make_grid(L);
    work_ = make_grid_oversampled(L);
    omega_values_ = synthesize(omega_, grid_);
    auto fine = synthesize(omega_, work_);
    check_conformal_factor(std::min(omega_values_.min(), fine.min()), std::max(omega_values_.max(), fine.max()));
    v_values_ = pointwise([](double w) { return 1.0 / w; }, omega_values_);
    u_values_ = pointwise([](double w) { return std::log(w); }, omega_values_);
    lazy_ = std::make_shared<Lazy>();
    lazy_->work_omega = std::move(fine);
  }

  /// Samples a closed-form conformal factor on the oversampled grid and
  /// projects it to degree L.
  template <typename F>
  static CrossSection from_function(int bandlimit, F&& f) {
    auto g = make_grid_oversampled(bandlimit);
    return CrossSection(analyze(sample(g, std::forward<F>(f)), bandlimit));
  }

  int bandlimit() const { return omega_.bandlimit(); }
  const SpectralField& omega() const { return omega_; }
  const GridSpec& grid() const { return grid_; }
  const GridSpec& work_grid() const { return work_; }
  const ScalarField& omega_values() const { return omega_values_; }
  const ScalarField& v_values() const { return v_values_; }
  const ScalarField& u_values() const { return u_values_; }

  CrossSection scaled(double c) const { return CrossSection(omega_ * c); }

  const SectionGeometry& geometry() const {
    std::call_once(lazy_->once, [this] { lazy_->geometry = build_geometry(); });
    return *lazy_->geometry;
  }

  /// |Sigma| = int omega^2 dOmega^2.
  double area() const { return geometry().area; }
  double area_radius() const { return std::sqrt(area() / kFourPi); }

  const ScalarField& spacetime_mean_curvature() const { return geometry().h2; }

  /// H^2 = 4 e^{-2u} (1 - Lap u), u = ln omega; second route for validation.
  ScalarField spacetime_mean_curvature_u_form() const {
    const auto& g = geometry();
    auto u = analyze(pointwise([](double w) { return std::log(w); }, g.omega), work_.max_degree());
    auto lap_u = synthesize(laplacian(u), work_);
    return pointwise([](double w, double lu) { return 4.0 * (1.0 - lu) / (w * w); }, g.omega, lap_u);
  }

  ScalarField gauss_curvature() const {
    return pointwise([](double h) { return 0.25 * h; }, geometry().h2);
  }

  /// (theta_bar, theta) with theta_bar = 2/omega, theta = omega H^2 / 2.
  std::pair<ScalarField, ScalarField> null_expansions() const {
    const auto& g = geometry();
    return {pointwise([](double w) { return 2.0 / w; }, g.omega),
            pointwise([](double w, double h) { return 0.5 * w * h; }, g.omega, g.h2)};
  }

  /// zeta = -d omega / omega in the round frame.
  TangentField connection_one_form() const {
    auto grad = gradient(omega_, work_);
    const auto& w = geometry().omega.values;
    for (std::size_t k = 0; k < w.size(); ++k) {
      grad.theta[k] = -grad.theta[k] / w[k];
      grad.phi[k] = -grad.phi[k] / w[k];
    }
    return grad;
  }

  TracefreeA tracefree_A() const {
    const auto& g = geometry();
    TracefreeA out{g.hess_v_tf, g.hess_v_tf.scaled(pointwise([](double w) { return 4.0 * w; }, g.omega)),
                   g.a_tf_density};
    return out;
  }

  /// <chi, underline chi>_gamma = (1/omega) tr_gamma chi, with tr_gamma chi
  /// evaluated from omega directly:
  ///   tr chi = 2/omega + 2 omega^{-3} |grad omega|^2 - 2 omega^{-2} Lap omega.
  ScalarField second_ff_contraction() const {
    auto parts = synthesize_partials(omega_, work_, kValue | kTheta | kPhi);
    auto lap = synthesize(laplacian(omega_), work_);
    ScalarField out(work_);
    const auto s = work_.sin_theta();
    const int np = work_.n_phi();
    for (int i = 0; i < work_.n_theta(); ++i)
      for (int j = 0; j < np; ++j) {
        const std::size_t k = std::size_t(i) * np + j;
        const double w = parts.f[k];
        const double gp = parts.p[k] / s[i];
        const double grad2 = parts.t[k] * parts.t[k] + gp * gp;
        const double tr = 2.0 / w + 2.0 * grad2 / (w * w * w) - 2.0 * lap.values[k] / (w * w);
        out.values[k] = tr / w;
      }
    return out;
  }

  /// int_Sigma density dmu_gamma = int density omega^2 dOmega^2.
  double integrate_on_surface(const ScalarField& density) const {
    const ScalarField* w = nullptr;
    ScalarField local;
    if (density.grid == work_) {
      w = &geometry().omega;
    } else if (density.grid == grid_) {
      w = &omega_values_;
    } else {
      local = synthesize(omega_, density.grid);
      w = &local;
    }
    return integrate(pointwise([](double d, double om) { return d * om * om; }, density, *w));
  }

  double min_h2() const { return geometry().h2.min(); }
  double max_h2() const { return geometry().h2.max(); }
  double int_h2() const { return integrate_on_surface(geometry().h2); }

  /// ||A_tf||^2_{L^2(Sigma)} = 16 int |TF(Hess v)|^2 dOmega^2.
  double tracefree_norm2() const { return integrate_on_surface(geometry().a_tf_density); }
  double tracefree_norm() const { return std::sqrt(tracefree_norm2()); }

  /// max over the work grid of |div_gamma A_tf - dH^2/2|_gamma.
  ///
  /// In two dimensions the divergence of a trace-free symmetric tensor is
  /// conformally covariant: div_gamma T = omega^{-2} div_{S^2} T.
  double codazzi_residual() const {
    const auto& g = geometry();
    const int D = work_.max_degree();
    auto tf = tracefree_A().components;
    auto div = divergence(tf, D);
    auto dh2 = gradient(analyze(g.h2, D), work_);
    double worst = 0.0;
    for (std::size_t k = 0; k < g.h2.values.size(); ++k) {
      const double w = g.omega.values[k];
      const double rt = div.theta[k] / (w * w) - 0.5 * dh2.theta[k];
      const double rp = div.phi[k] / (w * w) - 0.5 * dh2.phi[k];
      worst = std::max(worst, std::sqrt(rt * rt + rp * rp) / w);
    }
    return worst;
  }

 private:
  struct Lazy {
    std::once_flag once;
    ScalarField work_omega;
    std::optional<SectionGeometry> geometry;
  };

  SectionGeometry build_geometry() const {
    SectionGeometry g;
    const int D = work_.max_degree();
    g.omega = lazy_->work_omega;
    g.area = integrate(pointwise([](double w) { return w * w; }, g.omega));
    g.v_coeffs = analyze(pointwise([](double w) { return 1.0 / w; }, g.omega), D);
    auto parts = synthesize_partials(g.v_coeffs, work_, kAllPartials);
    auto hess = hessian_from_partials(parts, work_);
    g.lap_v = hess.trace();
    g.hess_v_tf = hess.tracefree();
    g.v = ScalarField(work_, std::move(parts.f));
    g.grad_v = TangentField(work_);
    const auto s = work_.sin_theta();
    const int np = work_.n_phi();
    for (int i = 0; i < work_.n_theta(); ++i)
      for (int j = 0; j < np; ++j) {
        const std::size_t k = std::size_t(i) * np + j;
        g.grad_v.theta[k] = parts.t[k];
        g.grad_v.phi[k] = parts.p[k] / s[i];
      }
    auto grad2 = g.grad_v.norm2();
    g.h2 = ScalarField(work_);
    for (std::size_t k = 0; k < g.h2.values.size(); ++k) {
      const double v = g.v.values[k];
      g.h2.values[k] = 4.0 * (v * v - grad2.values[k] + v * g.lap_v.values[k]);
    }
    auto tf2 = g.hess_v_tf.norm2();
    g.a_tf_density = ScalarField(work_);
    for (std::size_t k = 0; k < tf2.values.size(); ++k) {
      const double v = g.v.values[k];
      g.a_tf_density.values[k] = 16.0 * v * v * tf2.values[k];
    }
    return g;
  }

  SpectralField omega_;
  GridSpec grid_;
  GridSpec work_;
  ScalarField omega_values_;
  ScalarField v_values_;
  ScalarField u_values_;
  std::shared_ptr<Lazy> lazy_;
};

/// Spectral Sobolev norm ||u||_{W^{2,2}}^2 = sum (1 + l(l+1))^2 c_lm^2.
inline double w22_norm(const SpectralField& u) {
  double s = 0.0;
  for (int l = 0; l <= u.bandlimit(); ++l) {
    const double f = 1.0 + l * (l + 1.0);
    for (int m = -l; m <= l; ++m) s += f * f * u(l, m) * u(l, m);
  }
  return std::sqrt(s);
}

inline double w22_distance(const SpectralField& a, const SpectralField& b) {
  if (a.bandlimit() != b.bandlimit()) throw Error(ErrorKind::BandlimitMismatch, "w22_distance needs equal bandlimits");
  return w22_norm(a - b);
}

}  // namespace lcone
