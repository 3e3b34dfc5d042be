#pragma once

// Compactness scenario: a seeded sequence converging to an STCMC limit under
// the delta-timelike condition, and the STCMC family that leaves every compact
// subset of the hyperboloid.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lcone/estimates.hpp"

namespace lcone {

struct CompactnessTerm {
  int index = 0;
  double parameter = 0.0;       // eps_k (convergent) or k (divergent)
  double w22_to_limit = 0.0;    // ||omega_k / r_k - omega_limit||_{W^{2,2}} (convergent)
  double z_error = 0.0;         // max |Z_k / r_{Z_k} - z_limit| (convergent)
  double tracefree_norm = 0.0;  // ||A_tf||_{L^2(Sigma)}
  double kappa = 0.0;
  double c0_step = 0.0;         // max |omega_k - omega_{k-1}| on the grid (divergent, k > first)
  double area_radius = 0.0;
};

struct CompactnessSeries {
  std::string mode;
  std::uint64_t seed = 0;
  int bandlimit = 0;
  FourVector limit_z;
  std::vector<CompactnessTerm> terms;
};

/// omega_k = r_k omega_z exp(eps_k u), eps_k = 0.2 * 2^{-k}, with a seeded unit
/// timelike z (|z_spatial| <= 0.5), seeded r_k in [0.5, 2] and a seeded smooth u.
inline CompactnessSeries convergent_sequence(int n, std::uint64_t seed, int bandlimit = 48) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "n must be positive");
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::uniform_real_distribution<double> unit;
  const Eigen::Vector3d a = random_vector(rng, 0.5 * unit(rng));
  const FourVector z(std::sqrt(1.0 + a.squaredNorm()), a.x(), a.y(), a.z());
  const auto limit = stcmc_from_z(z, bandlimit);

  std::normal_distribution<double> gauss;
  SpectralField u(bandlimit);
  for (int l = 1; l <= std::min(12, bandlimit); ++l)
    for (int m = -l; m <= l; ++m) u(l, m) = gauss(rng) * std::exp(-double(l) * l / 25.0);
  u *= 1.0 / synthesize(laplacian(u), make_grid_oversampled(bandlimit)).max_abs();

  CompactnessSeries out{"convergent", seed, bandlimit, z, {}};
  for (int k = 0; k < n; ++k) {
    const double eps = 0.2 * std::ldexp(1.0, -k);
    const double r = 0.5 + 1.5 * unit(rng);
    const auto sec = exp_modulated(limit, eps, u).scaled(r);
    CompactnessTerm t;
    t.index = k;
    t.parameter = eps;
    t.area_radius = sec.area_radius();
    t.w22_to_limit = w22_distance(sec.omega() * (1.0 / t.area_radius), limit.omega());
    const auto zk = z_vector(sec);
    t.z_error = (zk.p / zk.proper_length() - z.p).cwiseAbs().maxCoeff();
    t.tracefree_norm = sec.tracefree_norm();
    t.kappa = kappa_bound(sec);
    out.terms.push_back(t);
  }
  return out;
}

/// omega_k = 1 / (sqrt(1+k^2) - k cos(theta)) for k = step, 2 step, ..., n step.
inline CompactnessSeries divergent_family(int n, double step = 0.2, int bandlimit = 48) {
  if (n < 1 || !(step > 0.0)) throw Error(ErrorKind::InvalidInput, "need n >= 1 and step > 0");
  CompactnessSeries out{"divergent", 0, bandlimit, FourVector(1.0, 0.0, 0.0, 0.0), {}};
  std::vector<double> previous;
  for (int j = 1; j <= n; ++j) {
    const double k = j * step;
    const double b = std::sqrt(1.0 + k * k);
    const auto sec = CrossSection::from_function(bandlimit, [b, k](double t, double) { return 1.0 / (b - k * std::cos(t)); });
    CompactnessTerm t;
    t.index = j;
    t.parameter = k;
    t.area_radius = sec.area_radius();
    t.tracefree_norm = sec.tracefree_norm();
    t.kappa = kappa_bound(sec);
    const auto& w = sec.omega_values().values;
    for (std::size_t i = 0; i < previous.size(); ++i) t.c0_step = std::max(t.c0_step, std::abs(w[i] - previous[i]));
    previous = w;
    out.terms.push_back(t);
  }
  return out;
}

}  // namespace lcone
