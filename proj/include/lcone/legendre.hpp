#pragma once

// Fully normalized associated Legendre functions (no Condon-Shortley phase)
// and Gauss-Legendre quadrature nodes.
//
//   Pbar_l^m(theta) = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m(cos theta)
//
// Storage for all 0 <= m <= l <= D is triangular: index l(l+1)/2 + m.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace lcone::legendre {

constexpr int tri_size(int max_degree) { return (max_degree + 1) * (max_degree + 2) / 2; }
constexpr int tri_index(int l, int m) { return l * (l + 1) / 2 + m; }

/// Precomputed coefficients of the three-term recurrence up to a degree.
class Recurrence {
 public:
  explicit Recurrence(int max_degree) : max_degree_(max_degree), a_(tri_size(max_degree)), b_(tri_size(max_degree)) {
    diag_.resize(max_degree + 1);
    sub_.resize(max_degree + 1);
    for (int m = 0; m <= max_degree; ++m) {
      diag_[m] = m > 0 ? std::sqrt((2.0 * m + 1.0) / (2.0 * m)) : 1.0;
      sub_[m] = std::sqrt(2.0 * m + 3.0);
      for (int l = m + 2; l <= max_degree; ++l) {
        const double l2 = double(l) * l;
        const double m2 = double(m) * m;
        const double lm1 = double(l - 1) * (l - 1);
        a_[tri_index(l, m)] = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
        b_[tri_index(l, m)] = std::sqrt((lm1 - m2) / (4.0 * lm1 - 1.0));
      }
    }
  }

  int max_degree() const { return max_degree_; }
  double a(int k) const { return a_[k]; }
  double b(int k) const { return b_[k]; }
  double diag(int m) const { return diag_[m]; }
  double sub(int m) const { return sub_[m]; }

  /// Pbar_l^m(theta) for all 0 <= m <= l <= max_degree.
  void values(double theta, std::span<double> out) const {
    const double x = std::cos(theta);
    const double s = std::sin(theta);
    double pmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
    for (int m = 0; m <= max_degree_; ++m) {
      if (m > 0) pmm *= diag_[m] * s;
      const int base = tri_index(m, m);
      out[base] = pmm;
      if (m + 1 <= max_degree_) out[tri_index(m + 1, m)] = sub_[m] * x * pmm;
      for (int l = m + 2; l <= max_degree_; ++l) {
        const int k = tri_index(l, m);
        out[k] = a_[k] * (x * out[tri_index(l - 1, m)] - b_[k] * out[tri_index(l - 2, m)]);
      }
    }
  }

 private:
  int max_degree_;
  std::vector<double> a_, b_, diag_, sub_;
};

/// Pbar_l^m at one colatitude via the standard stable three-term recurrence.
inline void normalized_values(double theta, int max_degree, std::span<double> out) {
  Recurrence(max_degree).values(theta, out);
}

/// Applies d/dtheta to a triangular table using the ladder relation
///   d/dtheta Pbar_l^m = (sqrt((l+m)(l-m+1)) Pbar_l^{m-1} - sqrt((l-m)(l+m+1)) Pbar_l^{m+1}) / 2,
///   d/dtheta Pbar_l^0 = -sqrt(l(l+1)) Pbar_l^1,
/// which is regular at the poles.
inline void theta_derivative(int max_degree, std::span<const double> in, std::span<double> out) {
  for (int l = 0; l <= max_degree; ++l) {
    const double dl = l;
    for (int m = 0; m <= l; ++m) {
      const double up = (m + 1 <= l) ? in[tri_index(l, m + 1)] : 0.0;
      if (m == 0) {
        out[tri_index(l, 0)] = -std::sqrt(dl * (dl + 1.0)) * up;
      } else {
        const double alpha = std::sqrt((dl + m) * (dl - m + 1.0));
        const double beta = std::sqrt((dl - m) * (dl + m + 1.0));
        out[tri_index(l, m)] = 0.5 * (alpha * in[tri_index(l, m - 1)] - beta * up);
      }
    }
  }
}

struct GaussLegendre {
  std::vector<double> x;  // decreasing, so colatitudes increase
  std::vector<double> w;  // sum to 2
};

/// Gauss-Legendre rule on [-1, 1] with n nodes (Newton on P_n). The southern
/// half mirrors the northern one exactly, so ring i and n-1-i share tables up
/// to the parity (-1)^{l+m}.
inline GaussLegendre gauss_legendre(int n) {
  GaussLegendre rule{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    if (2 * i + 1 == n) z = 0.0;  // the middle node of an odd rule
    // one more evaluation at the converged node for the weight
    double p0 = 1.0;
    double p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    rule.x[i] = z;
    rule.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.x[n - 1 - i] = -z;
    rule.w[n - 1 - i] = rule.w[i];
  }
  return rule;
}

}  // namespace lcone::legendre
