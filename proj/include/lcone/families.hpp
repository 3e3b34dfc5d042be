#pragma once

// Seeded generators for the section families used by tests, suites and the CLI.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "lcone/lorentz_action.hpp"

namespace lcone {

/// Per-task seed split: the k-th stream of a master seed (splitmix64 step).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline CrossSection round_section(int bandlimit, double rho) {
  if (!(rho > 0.0)) throw Error(ErrorKind::GenerationFailed, "radius must be positive");
  SpectralField c(bandlimit);
  c(0, 0) = rho * std::sqrt(kFourPi);
  return CrossSection(std::move(c));
}

/// rho / (sqrt(1+|a|^2) - a . x): the image of the round sphere of radius rho
/// under boost_toward(a); its 4-vector is rho (sqrt(1+|a|^2), a).
inline CrossSection boosted_round(int bandlimit, double rho, const Eigen::Vector3d& a) {
  if (!(rho > 0.0) || !a.allFinite()) throw Error(ErrorKind::GenerationFailed, "invalid boosted-round parameters");
  const double b = std::sqrt(1.0 + a.squaredNorm());
  return stcmc_from_z(FourVector(rho * b, rho * a.x(), rho * a.y(), rho * a.z()), bandlimit);
}

/// omega_s = 1 / (1 + s Y_l^m) with the L^2-normalized real harmonic.
inline CrossSection perturbed_section(int bandlimit, double s, int l, int m) {
  if (l < 0 || l > bandlimit || std::abs(m) > l) throw Error(ErrorKind::GenerationFailed, "harmonic index out of range");
  auto grid = make_grid_oversampled(bandlimit);
  auto y = synthesize(harmonic(bandlimit, l, m), grid);
  auto w = pointwise([s](double v) { return 1.0 / (1.0 + s * v); }, y);
  for (double v : y.values)
    if (!(1.0 + s * v > 0.0)) throw Error(ErrorKind::SRangeTooLarge, "1 + s Y_l^m must stay positive");
  return CrossSection(analyze(w, bandlimit));
}

/// omega = omega_base * exp(eps * g), g a spectral field at the same bandlimit.
inline CrossSection exp_modulated(const CrossSection& base, double eps, const SpectralField& g) {
  const auto& grid = base.work_grid();
  auto gv = synthesize(g.resized(base.bandlimit()), grid);
  auto w = pointwise([eps](double om, double x) { return om * std::exp(eps * x); }, base.geometry().omega, gv);
  return CrossSection(analyze(w, base.bandlimit()));
}

struct RandomSectionParams {
  int bandlimit = 48;
  int generation_degree = 12;
  double amplitude = 0.3;  // c in omega = exp(c u)
  int max_attempts = 100;
  bool require_nonnegative_h2 = true;
};

/// omega = exp(c u), u with independent N(0,1) e^{-l^2/25} coefficients for
/// 1 <= l <= L_gen, scaled so that max |Lap u| = 1 on the oversampled grid.
/// Draws are rejected until min H^2 >= 0 (when required).
inline CrossSection random_section(std::uint64_t seed, const RandomSectionParams& p = {}) {
  if (p.generation_degree < 1 || p.generation_degree > p.bandlimit)
    throw Error(ErrorKind::GenerationFailed, "generation degree must be in [1, bandlimit]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto grid = make_grid_oversampled(p.bandlimit);
  for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
    SpectralField u(p.bandlimit);
    for (int l = 1; l <= p.generation_degree; ++l)
      for (int m = -l; m <= l; ++m) u(l, m) = gauss(rng) * std::exp(-double(l) * l / 25.0);
    const double scale = synthesize(laplacian(u), grid).max_abs();
    if (scale == 0.0) continue;
    auto uv = synthesize(u, grid);
    const double c = p.amplitude / scale;
    CrossSection s(analyze(pointwise([c](double x) { return std::exp(c * x); }, uv), p.bandlimit));
    if (!p.require_nonnegative_h2 || s.min_h2() >= 0.0) return s;
  }
  throw Error(ErrorKind::GenerationFailed, "no section with H^2 >= 0 after " + std::to_string(p.max_attempts) + " draws");
}

/// Uniformly distributed direction times `magnitude`, drawn from `rng`.
template <typename Rng>
Eigen::Vector3d random_vector(Rng& rng, double magnitude) {
  std::normal_distribution<double> gauss;
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
  } while (v.norm() < 1e-12);
  return magnitude * v / v.norm();
}

}  // namespace lcone
