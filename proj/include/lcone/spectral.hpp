#pragma once

// Function calculus on the round unit sphere (S^2, dOmega^2).
//
// Grids are Gauss-Legendre in colatitude times equispaced longitude; the
// poles are never grid points. Fields are either grid values (ScalarField)
// or coefficients in a real orthonormal spherical-harmonic basis
// (SpectralField):
//
//   Y_l^0      = Pbar_l^0(theta)
//   Y_l^m      = sqrt(2) Pbar_l^m(theta) cos(m phi),   m > 0
//   Y_l^{-m}   = sqrt(2) Pbar_l^m(theta) sin(m phi),   m > 0
//
// with no Condon-Shortley phase. Cartesian coordinates follow
//   x1 = sin(theta) sin(phi), x2 = sin(theta) cos(phi), x3 = cos(theta),
// so Y_1^{-1} ~ x1, Y_1^1 ~ x2, Y_1^0 ~ x3.
//
// Vector and tensor fields are stored by their components in the orthonormal
// frame e_theta = d_theta, e_phi = (1/sin theta) d_phi.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcone/error.hpp"
#include "lcone/legendre.hpp"

namespace lcone {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;

namespace detail {

// Precomputed, immutable per-grid data: nodes, weights, Legendre tables and
// FFT plans. Shared between all GridSpec copies.
class GridTables {
 public:
  GridTables(int n_theta, int n_phi, int max_degree)
      : n_theta_(n_theta), n_phi_(n_phi), max_degree_(max_degree) {
    const auto rule = legendre::gauss_legendre(n_theta);
    theta_.resize(n_theta);
    weights_ = rule.w;
    sin_.resize(n_theta);
    cos_.resize(n_theta);
    for (int i = 0; i < n_theta; ++i) {
      theta_[i] = std::acos(rule.x[i]);
      cos_[i] = rule.x[i];
      sin_[i] = std::sqrt((1.0 - rule.x[i]) * (1.0 + rule.x[i]));
    }
    phi_.resize(n_phi);
    for (int j = 0; j < n_phi; ++j) phi_[j] = 2.0 * kPi * j / n_phi;

    const int tri = legendre::tri_size(max_degree);
    p_.resize(std::size_t(n_theta) * tri);
    dp_.resize(p_.size());
    d2p_.resize(p_.size());
    const legendre::Recurrence rec(max_degree);
    for (int i = 0; i < n_theta; ++i) {
      std::span<double> p(p_.data() + std::size_t(i) * tri, tri);
      std::span<double> dp(dp_.data() + std::size_t(i) * tri, tri);
      std::span<double> d2p(d2p_.data() + std::size_t(i) * tri, tri);
      rec.values(theta_[i], p);
      legendre::theta_derivative(max_degree, p, dp);
      legendre::theta_derivative(max_degree, dp, d2p);
    }

    std::vector<double> real(n_phi);
    std::vector<std::complex<double>> spec(n_phi / 2 + 1);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    r2c_ = fftw_plan_dft_r2c_1d(n_phi, real.data(), cplx, flags);
    c2r_ = fftw_plan_dft_c2r_1d(n_phi, cplx, real.data(), flags);
  }

  ~GridTables() {
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }

  GridTables(const GridTables&) = delete;
  GridTables& operator=(const GridTables&) = delete;

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int max_degree() const { return max_degree_; }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& sin_theta() const { return sin_; }
  const std::vector<double>& cos_theta() const { return cos_; }

  const double* p_row(int ring) const { return p_.data() + std::size_t(ring) * legendre::tri_size(max_degree_); }
  const double* dp_row(int ring) const { return dp_.data() + std::size_t(ring) * legendre::tri_size(max_degree_); }
  const double* d2p_row(int ring) const { return d2p_.data() + std::size_t(ring) * legendre::tri_size(max_degree_); }

  // fftw_execute_dft_* is safe to call concurrently on one plan.
  void forward(const double* in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(r2c_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // Destroys `in`.
  void backward(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  int n_theta_;
  int n_phi_;
  int max_degree_;
  std::vector<double> theta_, phi_, weights_, sin_, cos_;
  std::vector<double> p_, dp_, d2p_;
  fftw_plan r2c_{};
  fftw_plan c2r_{};
};

inline std::shared_ptr<const GridTables> cached_tables(int n_theta, int n_phi, int max_degree) {
  static std::mutex mutex;
  static std::map<std::array<int, 3>, std::shared_ptr<const GridTables>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  const std::array<int, 3> key{n_theta, n_phi, max_degree};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto tables = std::make_shared<const GridTables>(n_theta, n_phi, max_degree);
  cache.emplace(key, tables);
  return tables;
}

}  // namespace detail

/// Quadrature grid on S^2. Cheap to copy; tables are shared.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int bandlimit, std::shared_ptr<const detail::GridTables> tables)
      : bandlimit_(bandlimit), tables_(std::move(tables)) {}

  int bandlimit() const { return bandlimit_; }
  int n_theta() const { return tables_->n_theta(); }
  int n_phi() const { return tables_->n_phi(); }
  std::size_t size() const { return std::size_t(n_theta()) * n_phi(); }
  /// Highest degree this grid analyzes exactly.
  int max_degree() const { return tables_->max_degree(); }
  bool oversampled() const { return max_degree() > bandlimit_; }

  std::span<const double> theta_nodes() const { return tables_->theta(); }
  std::span<const double> phi_nodes() const { return tables_->phi(); }
  std::span<const double> glq_weights() const { return tables_->weights(); }
  std::span<const double> sin_theta() const { return tables_->sin_theta(); }
  std::span<const double> cos_theta() const { return tables_->cos_theta(); }
  double phi_step() const { return 2.0 * kPi / n_phi(); }

  const detail::GridTables& tables() const { return *tables_; }

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.bandlimit_ == b.bandlimit_ && a.tables_ == b.tables_;
  }

 private:
  int bandlimit_ = 0;
  std::shared_ptr<const detail::GridTables> tables_;
};

/// n_theta = L+1, n_phi = 2L+2; analyzes degree <= L exactly.
inline GridSpec make_grid(int bandlimit) {
  if (bandlimit < 4) throw Error(ErrorKind::InvalidBandlimit, "bandlimit must be >= 4, got " + std::to_string(bandlimit));
  return GridSpec(bandlimit, detail::cached_tables(bandlimit + 1, 2 * bandlimit + 2, bandlimit));
}

/// n_theta = 2L+1, n_phi = 4L+2; products of two degree-L fields are exact
/// and fields up to degree 2L can be analyzed.
inline GridSpec make_grid_oversampled(int bandlimit) {
  if (bandlimit < 4) throw Error(ErrorKind::InvalidBandlimit, "bandlimit must be >= 4, got " + std::to_string(bandlimit));
  return GridSpec(bandlimit, detail::cached_tables(2 * bandlimit + 1, 4 * bandlimit + 2, 2 * bandlimit));
}

/// Real spherical-harmonic coefficients up to a bandlimit, stored as
/// index l*l + l + m (l ascending, m ascending within l).
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(int bandlimit) : bandlimit_(bandlimit), coeffs_(std::size_t(bandlimit + 1) * (bandlimit + 1), 0.0) {
    if (bandlimit < 0) throw Error(ErrorKind::InvalidBandlimit, "negative bandlimit");
  }

  static constexpr std::size_t index(int l, int m) { return std::size_t(l) * l + l + m; }

  int bandlimit() const { return bandlimit_; }
  double operator()(int l, int m) const { return coeffs_[index(l, m)]; }
  double& operator()(int l, int m) { return coeffs_[index(l, m)]; }
  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  /// Coefficient with l beyond the bandlimit reading as zero.
  double get(int l, int m) const { return l <= bandlimit_ ? coeffs_[index(l, m)] : 0.0; }

  /// Copy at a different bandlimit (truncating or zero-padding).
  SpectralField resized(int bandlimit) const {
    SpectralField out(bandlimit);
    const int lmax = std::min(bandlimit, bandlimit_);
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m) out(l, m) = (*this)(l, m);
    return out;
  }

  SpectralField& operator+=(const SpectralField& o) {
    check_same(o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_same(o);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
  }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

 private:
  void check_same(const SpectralField& o) const {
    if (o.bandlimit_ != bandlimit_) throw Error(ErrorKind::BandlimitMismatch, "spectral fields differ in bandlimit");
  }

  int bandlimit_ = 0;
  std::vector<double> coeffs_;
};

/// Grid values, ring-major: values[i * n_phi + j] at (theta_i, phi_j).
struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(GridSpec g, double fill = 0.0) : grid(std::move(g)), values(grid.size(), fill) {}
  ScalarField(GridSpec g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) throw Error(ErrorKind::ShapeMismatch, "values do not match grid shape");
  }

  double& operator()(int i, int j) { return values[std::size_t(i) * grid.n_phi() + j]; }
  double operator()(int i, int j) const { return values[std::size_t(i) * grid.n_phi() + j]; }

  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
  double max_abs() const {
    double out = 0.0;
    for (double v : values) out = std::max(out, std::abs(v));
    return out;
  }
};

/// Grid function of position: f(theta, phi).
inline ScalarField sample(const GridSpec& grid, const std::function<double(double, double)>& f) {
  ScalarField out(grid);
  const auto theta = grid.theta_nodes();
  const auto phi = grid.phi_nodes();
  for (int i = 0; i < grid.n_theta(); ++i)
    for (int j = 0; j < grid.n_phi(); ++j) out(i, j) = f(theta[i], phi[j]);
  return out;
}

/// Pointwise combination of fields on the same grid.
template <typename Op, typename... Rest>
ScalarField pointwise(Op op, const ScalarField& first, const Rest&... rest) {
  ((rest.grid == first.grid ? void() : throw Error(ErrorKind::ShapeMismatch, "fields live on different grids")), ...);
  ScalarField out(first.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = op(first.values[k], rest.values[k]...);
  return out;
}

struct TangentField {
  GridSpec grid;
  std::vector<double> theta;  // e_theta component
  std::vector<double> phi;    // e_phi component

  TangentField() = default;
  explicit TangentField(GridSpec g) : grid(std::move(g)), theta(grid.size(), 0.0), phi(grid.size(), 0.0) {}

  /// Pointwise round-metric norm squared.
  ScalarField norm2() const {
    ScalarField out(grid);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = theta[k] * theta[k] + phi[k] * phi[k];
    return out;
  }
};

struct SymTensorField {
  GridSpec grid;
  std::vector<double> tt, tp, pp;

  SymTensorField() = default;
  explicit SymTensorField(GridSpec g) : grid(std::move(g)), tt(grid.size(), 0.0), tp(grid.size(), 0.0), pp(grid.size(), 0.0) {}

  ScalarField trace() const {
    ScalarField out(grid);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = tt[k] + pp[k];
    return out;
  }

  SymTensorField tracefree() const {
    SymTensorField out(*this);
    for (std::size_t k = 0; k < tt.size(); ++k) {
      const double half = 0.5 * (tt[k] + pp[k]);
      out.tt[k] -= half;
      out.pp[k] -= half;
    }
    return out;
  }

  /// Pointwise round-metric norm squared T_ij T_ij.
  ScalarField norm2() const {
    ScalarField out(grid);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = tt[k] * tt[k] + 2.0 * tp[k] * tp[k] + pp[k] * pp[k];
    return out;
  }

  SymTensorField scaled(const ScalarField& s) const {
    SymTensorField out(*this);
    for (std::size_t k = 0; k < tt.size(); ++k) {
      out.tt[k] *= s.values[k];
      out.tp[k] *= s.values[k];
      out.pp[k] *= s.values[k];
    }
    return out;
  }
};

/// Pointwise round-metric inner product of two symmetric tensors.
inline ScalarField inner(const SymTensorField& a, const SymTensorField& b) {
  ScalarField out(a.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] = a.tt[k] * b.tt[k] + 2.0 * a.tp[k] * b.tp[k] + a.pp[k] * b.pp[k];
  return out;
}

inline ScalarField inner(const TangentField& a, const TangentField& b) {
  ScalarField out(a.grid);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.theta[k] * b.theta[k] + a.phi[k] * b.phi[k];
  return out;
}

// --- Cartesian helpers -----------------------------------------------------

using Vec3 = std::array<double, 3>;

inline Vec3 point_on_sphere(double theta, double phi) {
  const double s = std::sin(theta);
  return {s * std::sin(phi), s * std::cos(phi), std::cos(theta)};
}

/// (theta, phi) of a nonzero 3-vector, phi in [0, 2 pi).
inline std::pair<double, double> angles_of(const Vec3& x) {
  const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  const double c = std::clamp(x[2] / r, -1.0, 1.0);
  double phi = std::atan2(x[0], x[1]);
  if (phi < 0.0) phi += 2.0 * kPi;
  return {std::acos(c), phi};
}

// --- transforms ------------------------------------------------------------

namespace detail {

// Per-ring longitude sums: f(phi) = sum_m a[m] cos(m phi) + b[m] sin(m phi).
inline void ring_synthesize(const GridTables& t, std::span<const double> a, std::span<const double> b, double* out,
                            std::vector<std::complex<double>>& work) {
  const int n = t.n_phi();
  work.assign(n / 2 + 1, {0.0, 0.0});
  const int mmax = std::min<int>(int(a.size()) - 1, n / 2 - 1);
  work[0] = {a[0], 0.0};
  for (int m = 1; m <= mmax; ++m) work[m] = {0.5 * a[m], -0.5 * b[m]};
  t.backward(work.data(), out);
}

// Coefficients regrouped into the triangular layout of the Legendre tables:
// cos part c(l, m) and sin part c(l, -m) at tri_index(l, m).
struct TriangularCoeffs {
  int bandlimit = 0;
  std::vector<double> cos_part, sin_part;

  explicit TriangularCoeffs(const SpectralField& c)
      : bandlimit(c.bandlimit()), cos_part(legendre::tri_size(bandlimit)), sin_part(legendre::tri_size(bandlimit)) {
    for (int l = 0; l <= bandlimit; ++l)
      for (int m = 0; m <= l; ++m) {
        cos_part[legendre::tri_index(l, m)] = c(l, m);
        sin_part[legendre::tri_index(l, m)] = m > 0 ? c(l, -m) : 0.0;
      }
  }
};

// Legendre sums for a northern ring and its mirror image:
//   north[m] = sum_l c T_l^m,  south[m] = sum_l (-1)^{l+m} sign c T_l^m,
// for both the cos part (a) and the sin part (b), with the sqrt(2) of the real
// basis folded in. `sign` is +1 for even tables (values, second derivatives)
// and -1 for the first theta-derivative.
struct RingSums {
  std::vector<double> a_north, b_north, a_south, b_south;
};

inline void ring_legendre(const TriangularCoeffs& c, const double* row, double sign, RingSums& out) {
  const int L = c.bandlimit;
  // even[m] collects even l, odd[m] odd l; l outer keeps every access contiguous
  std::vector<double> ae(L + 1, 0.0), ao(L + 1, 0.0), be(L + 1, 0.0), bo(L + 1, 0.0);
  for (int l = 0; l <= L; ++l) {
    const int k = legendre::tri_index(l, 0);
    const double* p = row + k;
    const double* ca = c.cos_part.data() + k;
    const double* cb = c.sin_part.data() + k;
    double* a = l % 2 == 0 ? ae.data() : ao.data();
    double* b = l % 2 == 0 ? be.data() : bo.data();
    for (int m = 0; m <= l; ++m) {
      a[m] += ca[m] * p[m];
      b[m] += cb[m] * p[m];
    }
  }
  out.a_north.resize(L + 1);
  out.b_north.resize(L + 1);
  out.a_south.resize(L + 1);
  out.b_south.resize(L + 1);
  for (int m = 0; m <= L; ++m) {
    const double norm = m == 0 ? 1.0 : std::numbers::sqrt2;
    const double flip = (m % 2 == 0 ? 1.0 : -1.0) * sign;
    out.a_north[m] = norm * (ae[m] + ao[m]);
    out.b_north[m] = norm * (be[m] + bo[m]);
    out.a_south[m] = flip * norm * (ae[m] - ao[m]);
    out.b_south[m] = flip * norm * (be[m] - bo[m]);
  }
}

}  // namespace detail

/// Coordinate partial derivatives on the grid. `phi` is d/dphi (not divided by sin).
struct Partials {
  std::vector<double> f, t, tt, p, pp, tp;
};

enum PartialMask : unsigned {
  kValue = 1u,
  kTheta = 2u,
  kThetaTheta = 4u,
  kPhi = 8u,
  kPhiPhi = 16u,
  kThetaPhi = 32u,
  kAllPartials = 63u,
};

inline void check_synthesis_grid(const SpectralField& c, const GridSpec& grid) {
  if (c.bandlimit() > grid.max_degree())
    throw Error(ErrorKind::GridTooCoarse, "field bandlimit " + std::to_string(c.bandlimit()) + " exceeds grid capacity " +
                                              std::to_string(grid.max_degree()));
}

/// Exact synthesis of the field and requested coordinate partials on the grid.
/// theta-derivatives come from the Legendre ladder tables, phi-derivatives
/// from multiplying the longitude coefficients by m.
inline Partials synthesize_partials(const SpectralField& c, const GridSpec& grid, unsigned mask) {
  check_synthesis_grid(c, grid);
  const auto& t = grid.tables();
  const int nt = grid.n_theta();
  const int np = grid.n_phi();
  const int L = c.bandlimit();
  Partials out;
  auto alloc = [&](std::vector<double>& v, unsigned bit) {
    if (mask & bit) v.assign(grid.size(), 0.0);
  };
  alloc(out.f, kValue);
  alloc(out.t, kTheta);
  alloc(out.tt, kThetaTheta);
  alloc(out.p, kPhi);
  alloc(out.pp, kPhiPhi);
  alloc(out.tp, kThetaPhi);

  std::vector<double> am(L + 1), bm(L + 1);
  std::vector<std::complex<double>> work;
  const detail::TriangularCoeffs tc(c);
  const bool need0 = mask & (kValue | kPhi | kPhiPhi);
  const bool need1 = mask & (kTheta | kThetaPhi);
  const bool need2 = mask & kThetaTheta;
  detail::RingSums s0, s1, s2;
  auto emit = [&](int ring, const std::vector<double>& a0, const std::vector<double>& b0, const std::vector<double>& a1,
                  const std::vector<double>& b1, const std::vector<double>& a2, const std::vector<double>& b2) {
    const std::size_t off = std::size_t(ring) * np;
    if (mask & kValue) detail::ring_synthesize(t, a0, b0, out.f.data() + off, work);
    if (mask & kTheta) detail::ring_synthesize(t, a1, b1, out.t.data() + off, work);
    if (mask & kThetaTheta) detail::ring_synthesize(t, a2, b2, out.tt.data() + off, work);
    if (mask & kPhi) {
      for (int m = 0; m <= L; ++m) {
        am[m] = m * b0[m];
        bm[m] = -m * a0[m];
      }
      detail::ring_synthesize(t, am, bm, out.p.data() + off, work);
    }
    if (mask & kPhiPhi) {
      for (int m = 0; m <= L; ++m) {
        am[m] = -double(m) * m * a0[m];
        bm[m] = -double(m) * m * b0[m];
      }
      detail::ring_synthesize(t, am, bm, out.pp.data() + off, work);
    }
    if (mask & kThetaPhi) {
      for (int m = 0; m <= L; ++m) {
        am[m] = m * b1[m];
        bm[m] = -m * a1[m];
      }
      detail::ring_synthesize(t, am, bm, out.tp.data() + off, work);
    }
  };
  // ring nt-1-i is the mirror of ring i
  for (int i = 0; i < (nt + 1) / 2; ++i) {
    if (need0) detail::ring_legendre(tc, t.p_row(i), 1.0, s0);
    if (need1) detail::ring_legendre(tc, t.dp_row(i), -1.0, s1);
    if (need2) detail::ring_legendre(tc, t.d2p_row(i), 1.0, s2);
    emit(i, s0.a_north, s0.b_north, s1.a_north, s1.b_north, s2.a_north, s2.b_north);
    if (nt - 1 - i != i) emit(nt - 1 - i, s0.a_south, s0.b_south, s1.a_south, s1.b_south, s2.a_south, s2.b_south);
  }
  return out;
}

inline ScalarField synthesize(const SpectralField& c, const GridSpec& grid) {
  auto parts = synthesize_partials(c, grid, kValue);
  return ScalarField(grid, std::move(parts.f));
}

/// Quadrature projection onto degrees <= `degree` (at most grid.max_degree()).
inline SpectralField analyze(const ScalarField& f, int degree) {
  const GridSpec& grid = f.grid;
  if (f.values.size() != grid.size()) throw Error(ErrorKind::ShapeMismatch, "values do not match grid shape");
  if (degree > grid.max_degree() || degree < 0)
    throw Error(ErrorKind::GridTooCoarse, "cannot analyze degree " + std::to_string(degree) + " on this grid");
  const auto& t = grid.tables();
  const int np = grid.n_phi();
  SpectralField c(degree);
  auto coeffs = c.coeffs();
  std::vector<std::complex<double>> spec(np / 2 + 1);
  std::vector<double> acc_cos(legendre::tri_size(degree)), acc_sin(legendre::tri_size(degree));
  const auto w = grid.glq_weights();
  std::vector<std::complex<double>> spec_south(np / 2 + 1);
  // per-ring sums for even l (index 0) and odd l (index 1)
  std::array<std::vector<double>, 2> gc{std::vector<double>(degree + 1), std::vector<double>(degree + 1)};
  std::array<std::vector<double>, 2> gs = gc;
  const int nt = grid.n_theta();
  for (int i = 0; i < (nt + 1) / 2; ++i) {
    const int j = nt - 1 - i;  // mirror ring, weight w[j] = w[i]
    t.forward(f.values.data() + std::size_t(i) * np, spec.data());
    if (j != i) t.forward(f.values.data() + std::size_t(j) * np, spec_south.data());
    const double q = w[i] * grid.phi_step();
    for (int m = 0; m <= degree; ++m) {
      const double norm = m == 0 ? q : q * std::numbers::sqrt2;
      const double cn = norm * spec[m].real();
      const double sn = m == 0 ? 0.0 : -norm * spec[m].imag();
      const double cs = j != i ? norm * spec_south[m].real() : 0.0;
      const double ss = j != i && m > 0 ? -norm * spec_south[m].imag() : 0.0;
      // ring j contributes with (-1)^{l+m}
      const int even = m % 2;  // slot used by l with l + m even
      gc[even][m] = cn + cs;
      gc[1 - even][m] = cn - cs;
      gs[even][m] = sn + ss;
      gs[1 - even][m] = sn - ss;
    }
    const double* row = t.p_row(i);
    for (int l = 0; l <= degree; ++l) {
      const int k = legendre::tri_index(l, 0);
      const double* p = row + k;
      const double* fc = gc[l % 2].data();
      const double* fs = gs[l % 2].data();
      double* ca = acc_cos.data() + k;
      double* cb = acc_sin.data() + k;
      for (int m = 0; m <= l; ++m) {
        ca[m] += p[m] * fc[m];
        cb[m] += p[m] * fs[m];
      }
    }
  }
  for (int l = 0; l <= degree; ++l)
    for (int m = 0; m <= l; ++m) {
      coeffs[SpectralField::index(l, m)] = acc_cos[legendre::tri_index(l, m)];
      if (m > 0) coeffs[SpectralField::index(l, -m)] = acc_sin[legendre::tri_index(l, m)];
    }
  return c;
}

/// Projection onto degrees <= the grid's nominal bandlimit.
inline SpectralField analyze(const ScalarField& f) { return analyze(f, f.grid.bandlimit()); }

/// Pointwise synthesis at arbitrary (theta, phi); theta = 0 or pi is fine.
/// Points are processed in blocks so the Legendre recurrence runs across
/// several points at once.
inline std::vector<double> evaluate_at(const SpectralField& c, std::span<const std::pair<double, double>> points) {
  constexpr int B = 8;
  const int L = c.bandlimit();
  const legendre::Recurrence rec(L);
  const detail::TriangularCoeffs tc(c);
  const auto& ca = tc.cos_part;
  const auto& cb = tc.sin_part;
  std::vector<double> out(points.size());
  for (std::size_t start = 0; start < points.size(); start += B) {
    const int n = int(std::min<std::size_t>(B, points.size() - start));
    double x[B], s[B], pmm[B], c1[B], s1[B], cm[B], sm[B], sum[B];
    for (int q = 0; q < B; ++q) {
      const auto [theta, phi] = points[start + std::min(q, n - 1)];
      x[q] = std::cos(theta);
      s[q] = std::sin(theta);
      pmm[q] = 1.0 / std::sqrt(4.0 * kPi);
      c1[q] = std::cos(phi);
      s1[q] = std::sin(phi);
      cm[q] = 1.0;
      sm[q] = 0.0;
      sum[q] = 0.0;
    }
    for (int m = 0; m <= L; ++m) {
      if (m > 0)
        for (int q = 0; q < B; ++q) pmm[q] *= rec.diag(m) * s[q];
      double p2[B] = {}, p1[B], sa[B], sb[B];
      int k = legendre::tri_index(m, m);
      for (int q = 0; q < B; ++q) {
        p1[q] = pmm[q];
        sa[q] = ca[k] * p1[q];
        sb[q] = cb[k] * p1[q];
      }
      if (m + 1 <= L) {
        k = legendre::tri_index(m + 1, m);
        for (int q = 0; q < B; ++q) {
          p2[q] = p1[q];
          p1[q] = rec.sub(m) * x[q] * p2[q];
          sa[q] += ca[k] * p1[q];
          sb[q] += cb[k] * p1[q];
        }
      }
      for (int l = m + 2; l <= L; ++l) {
        k = legendre::tri_index(l, m);
        const double a = rec.a(k);
        const double b = rec.b(k);
        for (int q = 0; q < B; ++q) {
          const double p = a * (x[q] * p1[q] - b * p2[q]);
          p2[q] = p1[q];
          p1[q] = p;
          sa[q] += ca[k] * p;
          sb[q] += cb[k] * p;
        }
      }
      if (m == 0) {
        for (int q = 0; q < B; ++q) sum[q] += sa[q];
        continue;
      }
      for (int q = 0; q < B; ++q) {
        const double cn = cm[q] * c1[q] - sm[q] * s1[q];
        sm[q] = sm[q] * c1[q] + cm[q] * s1[q];
        cm[q] = cn;
        sum[q] += std::numbers::sqrt2 * (sa[q] * cm[q] + sb[q] * sm[q]);
      }
    }
    for (int q = 0; q < n; ++q) out[start + q] = sum[q];
  }
  return out;
}

inline double evaluate_at(const SpectralField& c, double theta, double phi) {
  const std::pair<double, double> pt{theta, phi};
  return evaluate_at(c, std::span<const std::pair<double, double>>(&pt, 1))[0];
}

/// Quadrature integral over S^2 with respect to dOmega^2.
inline double integrate(const ScalarField& f) {
  const auto w = f.grid.glq_weights();
  const int np = f.grid.n_phi();
  double total = 0.0;
  for (int i = 0; i < f.grid.n_theta(); ++i) {
    double ring = 0.0;
    for (int j = 0; j < np; ++j) ring += f.values[std::size_t(i) * np + j];
    total += w[i] * ring;
  }
  return total * f.grid.phi_step();
}

// --- differential operators -------------------------------------------------

inline SpectralField laplacian(const SpectralField& c) {
  SpectralField out(c);
  for (int l = 0; l <= c.bandlimit(); ++l)
    for (int m = -l; m <= l; ++m) out(l, m) *= -double(l) * (l + 1);
  return out;
}

inline TangentField gradient(const SpectralField& c, const GridSpec& grid) {
  auto parts = synthesize_partials(c, grid, kTheta | kPhi);
  TangentField out(grid);
  const auto s = grid.sin_theta();
  const int np = grid.n_phi();
  for (int i = 0; i < grid.n_theta(); ++i)
    for (int j = 0; j < np; ++j) {
      const std::size_t k = std::size_t(i) * np + j;
      out.theta[k] = parts.t[k];
      out.phi[k] = parts.p[k] / s[i];
    }
  return out;
}

/// Round-sphere Hessian in the orthonormal frame:
///   H_tt = f_tt,  H_tp = f_tp / s - (c / s^2) f_p,  H_pp = f_pp / s^2 + (c / s) f_t.
inline SymTensorField hessian_from_partials(const Partials& parts, const GridSpec& grid) {
  SymTensorField out(grid);
  const auto s = grid.sin_theta();
  const auto cs = grid.cos_theta();
  const int np = grid.n_phi();
  for (int i = 0; i < grid.n_theta(); ++i) {
    const double inv_s = 1.0 / s[i];
    const double cot = cs[i] * inv_s;
    for (int j = 0; j < np; ++j) {
      const std::size_t k = std::size_t(i) * np + j;
      out.tt[k] = parts.tt[k];
      out.tp[k] = inv_s * (parts.tp[k] - cot * parts.p[k]);
      out.pp[k] = inv_s * inv_s * parts.pp[k] + cot * parts.t[k];
    }
  }
  return out;
}

inline SymTensorField hessian(const SpectralField& c, const GridSpec& grid) {
  return hessian_from_partials(synthesize_partials(c, grid, kTheta | kThetaTheta | kPhi | kPhiPhi | kThetaPhi), grid);
}

inline TangentField gradient(const ScalarField& f) { return gradient(analyze(f), f.grid); }
inline ScalarField laplacian(const ScalarField& f) { return synthesize(laplacian(analyze(f)), f.grid); }
inline SymTensorField hessian(const ScalarField& f) { return hessian(analyze(f), f.grid); }

/// Covariant divergence of a symmetric tensor field, (div T)_j = nabla^i T_ij.
///
/// Frame components are not smooth at the poles, so the tensor is lifted to
/// its six Cartesian components T_ab (smooth scalars), each of which is
/// analyzed at `degree`; then (div T)_b = sum_a (grad T_ab)_a.
inline TangentField divergence(const SymTensorField& tensor, int degree) {
  const GridSpec& grid = tensor.grid;
  const auto s = grid.sin_theta();
  const auto cs = grid.cos_theta();
  const auto phi = grid.phi_nodes();
  const int np = grid.n_phi();
  const int nt = grid.n_theta();
  std::vector<double> sin_phi(np), cos_phi(np);
  for (int j = 0; j < np; ++j) {
    sin_phi[j] = std::sin(phi[j]);
    cos_phi[j] = std::cos(phi[j]);
  }
  auto frame = [&](int i, int j) {
    const double sp = sin_phi[j];
    const double cp = cos_phi[j];
    const Vec3 et{cs[i] * sp, cs[i] * cp, -s[i]};
    const Vec3 ep{cp, -sp, 0.0};
    return std::pair{et, ep};
  };
  std::array<ScalarField, 6> comps;
  for (auto& c : comps) c = ScalarField(grid);
  constexpr std::array<std::pair<int, int>, 6> ab{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) {
      const std::size_t k = std::size_t(i) * np + j;
      const auto [et, ep] = frame(i, j);
      for (int q = 0; q < 6; ++q) {
        const auto [a, b] = ab[q];
        comps[q].values[k] = tensor.tt[k] * et[a] * et[b] + tensor.tp[k] * (et[a] * ep[b] + ep[a] * et[b]) +
                             tensor.pp[k] * ep[a] * ep[b];
      }
    }
  // div_b = sum_a (grad T_ab) . e_a  (Cartesian)
  std::array<std::vector<double>, 3> div;
  for (auto& d : div) d.assign(grid.size(), 0.0);
  for (int q = 0; q < 6; ++q) {
    const auto g = gradient(analyze(comps[q], degree), grid);
    const auto [a, b] = ab[q];
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < np; ++j) {
        const std::size_t k = std::size_t(i) * np + j;
        const auto [et, ep] = frame(i, j);
        Vec3 grad{};
        for (int r = 0; r < 3; ++r) grad[r] = g.theta[k] * et[r] + g.phi[k] * ep[r];
        div[b][k] += grad[a];
        if (a != b) div[a][k] += grad[b];
      }
  }
  TangentField out(grid);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) {
      const std::size_t k = std::size_t(i) * np + j;
      const auto [et, ep] = frame(i, j);
      for (int r = 0; r < 3; ++r) {
        out.theta[k] += div[r][k] * et[r];
        out.phi[k] += div[r][k] * ep[r];
      }
    }
  return out;
}

// --- spectral utilities ----------------------------------------------------

/// Keeps only the listed degrees.
inline SpectralField project_degrees(const SpectralField& c, const std::set<int>& degrees) {
  SpectralField out(c.bandlimit());
  for (int l = 0; l <= c.bandlimit(); ++l) {
    if (!degrees.contains(l)) continue;
    for (int m = -l; m <= l; ++m) out(l, m) = c(l, m);
  }
  return out;
}

/// Sum of squared coefficients (L^2(S^2) norm squared).
inline double l2_norm2(const SpectralField& c) {
  double s = 0.0;
  for (double v : c.coeffs()) s += v * v;
  return s;
}

/// Fraction of the L^2 energy carried by degrees above fraction * bandlimit.
inline double tail_energy(const SpectralField& c, double fraction = 0.9) {
  const double total = l2_norm2(c);
  if (total == 0.0) return 0.0;
  double tail = 0.0;
  for (int l = 0; l <= c.bandlimit(); ++l) {
    if (l <= fraction * c.bandlimit()) continue;
    for (int m = -l; m <= l; ++m) tail += c(l, m) * c(l, m);
  }
  return tail / total;
}

/// The coordinate functions x1, x2, x3 restricted to the grid.
inline std::array<ScalarField, 3> first_harmonics(const GridSpec& grid) {
  return {sample(grid, [](double t, double p) { return std::sin(t) * std::sin(p); }),
          sample(grid, [](double t, double p) { return std::sin(t) * std::cos(p); }),
          sample(grid, [](double t, double) { return std::cos(t); })};
}

/// Unit-coefficient field Y_l^m at the given bandlimit.
inline SpectralField harmonic(int bandlimit, int l, int m) {
  SpectralField c(bandlimit);
  c(l, m) = 1.0;
  return c;
}

}  // namespace lcone
