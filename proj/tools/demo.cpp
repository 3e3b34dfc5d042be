// Walk-through of the library: build a section, inspect its geometry, move it
// by a Lorentz transformation, balance it and run a short normalized flow.

#include <cstdio>

#include "lcone/lcone.hpp"

int main() {
  using namespace lcone;

  const auto sigma = random_section(derive_seed(42, 0));
  const auto report = geometry_report(sigma);
  std::printf("random section, L = %d\n", sigma.bandlimit());
  std::printf("  area %.6f  int H^2 / 16 pi - 1 = %.2e\n", report.area, report.int_h2 / (16.0 * kPi) - 1.0);
  std::printf("  ||A_tf|| = %.6f  kappa = %.4f  codazzi = %.2e\n", report.norm_a_tracefree, report.kappa, report.codazzi_residual);

  const auto gap = tracefree_gap(sigma);
  std::printf("  trace-free gap: %.6f <= %.6f (ratio %.4f)\n", gap.report.lhs, gap.report.rhs, gap.report.ratio);

  const auto lambda = boost_toward(Eigen::Vector3d(0.0, 0.3, 0.4));
  const auto image = apply_to_section(lambda, sigma);
  const auto z0 = lambda * z_vector(sigma);
  const auto z1 = z_vector(image);
  std::printf("boosted: |Z(image) - Lambda Z| = %.2e, area ratio - 1 = %.2e\n", (z1.p - z0.p).cwiseAbs().maxCoeff(),
              image.area() / sigma.area() - 1.0);

  const auto balanced = balance(image);
  std::printf("balanced in %d iteration(s), first-moment residual %.2e\n", balanced.iterations, balanced.residual);

  FlowConfig cfg;
  cfg.normalized = true;
  cfg.t_max = 0.5;
  const auto run = lcone::run(CrossSection(sigma.omega().resized(16)), cfg);
  const auto& first = run.states.front().diagnostics;
  const auto& last = run.states.back().diagnostics;
  std::printf("normalized flow at L = 16, %zu steps to t = %.2f (%s)\n", run.states.size() - 1, run.states.back().t,
              to_string(run.status));
  std::printf("  Q / 128 pi^2: %.8f -> %.8f   ||A_tf||: %.3e -> %.3e\n", first.q / k128Pi2, last.q / k128Pi2,
              first.norm_a_tracefree, last.norm_a_tracefree);
}
