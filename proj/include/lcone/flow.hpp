#pragma once

// Null mean curvature flow d omega / dt = -theta/2 = -omega H^2 / 4 (2d Ricci
// flow in the round conformal class), classical RK4 on the coefficients of omega.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lcone/cross_section.hpp"

namespace lcone {

/// Q = |Sigma| int (H^4/2 - 2 |A_tf|^2) dmu; Q <= 128 pi^2 with equality on STCMC.
inline double monotone_quantity(const CrossSection& s) {
  const auto& g = s.geometry();
  auto integrand = pointwise([](double h, double a) { return 0.5 * h * h - 2.0 * a; }, g.h2, g.a_tf_density);
  return s.area() * s.integrate_on_surface(integrand);
}

/// G = max (|grad H^2|^2_gamma / H^2 + 3 |A_tf|^2_gamma), |grad f|^2_gamma = omega^{-2} |grad f|^2.
inline double gradient_monitor(const CrossSection& s) {
  const auto& g = s.geometry();
  if (!(g.h2.min() > 0.0)) throw Error(ErrorKind::MonitorUndefined, "gradient monitor needs H^2 > 0");
  auto grad = gradient(analyze(g.h2, s.work_grid().max_degree()), s.work_grid()).norm2();
  double worst = 0.0;
  for (std::size_t k = 0; k < grad.values.size(); ++k) {
    const double w = g.omega.values[k];
    worst = std::max(worst, grad.values[k] / (w * w * g.h2.values[k]) + 3.0 * g.a_tf_density.values[k]);
  }
  return worst;
}

/// -omega H^2 / 4 = -omega K on the work grid.
inline ScalarField velocity(const CrossSection& s) {
  const auto& g = s.geometry();
  return pointwise([](double w, double h) { return -0.25 * w * h; }, g.omega, g.h2);
}

struct FlowConfig {
  double dt_initial = 1e-2;
  double t_max = 1.0;
  bool normalized = false;
  double cfl_safety = 0.5;
  double stop_tracefree_tol = 0.0;  // normalized runs stop once ||A_tf||_{L^2} drops below this
  int max_steps = 200000;
};

struct FlowDiagnostics {
  double area = 0.0;
  double area_radius = 0.0;
  double q = 0.0;
  double min_h2 = 0.0;
  double max_k = 0.0;
  double gradient_monitor = std::numeric_limits<double>::quiet_NaN();  // NaN when H^2 > 0 fails
  double norm_a_tracefree = 0.0;
};

inline FlowDiagnostics diagnose(const CrossSection& s) {
  FlowDiagnostics d;
  d.area = s.area();
  d.area_radius = s.area_radius();
  d.q = monotone_quantity(s);
  d.min_h2 = s.min_h2();
  d.max_k = 0.25 * s.max_h2();
  if (d.min_h2 > 0.0) d.gradient_monitor = gradient_monitor(s);
  d.norm_a_tracefree = s.tracefree_norm();
  return d;
}

struct FlowState {
  double t = 0.0;
  CrossSection section;
  FlowDiagnostics diagnostics;
};

inline FlowState make_state(double t, CrossSection s) {
  auto d = diagnose(s);
  return {t, std::move(s), d};
}

/// Largest stable step for the current section: min of the curvature rule
/// 1/(8 max|K|) and the explicit-diffusion rule 2.5 min(omega^2) / (L(L+1)),
/// times cfl_safety.
inline double stable_dt(const CrossSection& s, double cfl_safety) {
  const auto& g = s.geometry();
  const double max_k = 0.25 * std::max(std::abs(g.h2.max()), std::abs(g.h2.min()));
  const double wmin = g.omega.min();
  const int L = s.bandlimit();
  double dt = 2.5 * wmin * wmin / (L * (L + 1.0));
  if (max_k > 0.0) dt = std::min(dt, 1.0 / (8.0 * max_k));
  return cfl_safety * dt;
}

namespace detail {

inline SpectralField velocity_coeffs(const SpectralField& omega) {
  const auto [w, h2] = omega_and_h2(omega);
  return analyze(pointwise([](double om, double h) { return -0.25 * om * h; }, w, h2), omega.bandlimit());
}

// One RK4 step; throws DegenerateSection if any stage loses positivity.
inline SpectralField rk4(const SpectralField& w, double dt) {
  const auto k1 = velocity_coeffs(w);
  const auto k2 = velocity_coeffs(w + (0.5 * dt) * k1);
  const auto k3 = velocity_coeffs(w + (0.5 * dt) * k2);
  const auto k4 = velocity_coeffs(w + dt * k3);
  return w + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// RK4 with up to 10 halvings of dt on loss of positivity; dt is updated to
// the step actually taken.
inline CrossSection advance(const CrossSection& s, double t, double& dt) {
  for (int halving = 0; halving <= 10; ++halving, dt *= 0.5) {
    try {
      return CrossSection(rk4(s.omega(), dt));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSection) throw;
    }
  }
  throw Error(ErrorKind::FlowSingular, "positivity lost at t = " + std::to_string(t) + " after 10 step halvings");
}

}  // namespace detail

/// Advances by dt (halved up to 10 times if positivity fails). The returned
/// state's t records the step actually taken.
inline FlowState step(const FlowState& state, double dt) {
  auto next = detail::advance(state.section, state.t, dt);
  return make_state(state.t + dt, std::move(next));
}

enum class FlowStatus { Completed, Converged, Singular, StepLimit };

inline const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Completed: return "completed";
    case FlowStatus::Converged: return "converged";
    case FlowStatus::Singular: return "flow-singular";
    case FlowStatus::StepLimit: return "step-limit-exceeded";
  }
  return "unknown";
}

struct FlowRun {
  std::vector<FlowState> states;  // initial state first, then one per accepted step
  FlowStatus status = FlowStatus::Completed;
  std::string message;
};

/// Integrates until t_max, a singularity (min omega below 1e-3 of its initial
/// value, or step halving exhausted), convergence (normalized runs), or the
/// step limit. Normalized runs rescale omega after every step to keep the
/// initial area radius.
inline FlowRun run(const CrossSection& initial, const FlowConfig& config) {
  if (!(config.dt_initial > 0.0) || !(config.cfl_safety > 0.0) || config.cfl_safety > 1.0)
    throw Error(ErrorKind::InvalidInput, "flow needs dt_initial > 0 and cfl_safety in (0, 1]");
  FlowRun out;
  out.states.push_back(make_state(0.0, initial));
  const double r_target = out.states.front().diagnostics.area_radius;
  const double w_floor = 1e-3 * initial.geometry().omega.min();
  auto converged = [&](const FlowState& s) {
    return config.normalized && config.stop_tracefree_tol > 0.0 && s.diagnostics.norm_a_tracefree < config.stop_tracefree_tol;
  };
  if (converged(out.states.back())) {
    out.status = FlowStatus::Converged;
    return out;
  }
  constexpr double kTimeEps = 1e-12;
  while (out.states.back().t < config.t_max - kTimeEps) {
    if (int(out.states.size()) > config.max_steps) {
      out.status = FlowStatus::StepLimit;
      out.message = "max_steps reached at t = " + std::to_string(out.states.back().t);
      return out;
    }
    const auto& cur = out.states.back();
    double dt = std::min({config.dt_initial, stable_dt(cur.section, config.cfl_safety), config.t_max - cur.t});
    CrossSection section;
    try {
      section = detail::advance(cur.section, cur.t, dt);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FlowSingular) throw;
      out.status = FlowStatus::Singular;
      out.message = e.what();
      return out;
    }
    if (config.normalized) section = section.scaled(r_target / section.area_radius());
    FlowState next = make_state(cur.t + dt, std::move(section));
    if (!config.normalized && next.section.geometry().omega.min() < w_floor) {
      out.status = FlowStatus::Singular;
      out.message = "min omega fell below 1e-3 of its initial value at t = " + std::to_string(next.t);
      out.states.push_back(std::move(next));
      return out;
    }
    out.states.push_back(std::move(next));
    if (converged(out.states.back())) {
      out.status = FlowStatus::Converged;
      return out;
    }
  }
  return out;
}

}  // namespace lcone
