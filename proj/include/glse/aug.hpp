#pragma once

// Real 2-D augmentation of complex scalars and the closed-form 2x2 matrix
// algebra used by the message-passing iteration. Everything here is constant
// size; no general linear solver is involved.

#include <algorithm>
#include <cmath>
#include <complex>

#include "glse/errors.hpp"

namespace glse {

using cplx = std::complex<double>;

/// Augmented form [Re c, Im c] of a complex scalar.
struct AugPair {
  double v1 = 0.0;
  double v2 = 0.0;

  constexpr AugPair() = default;
  constexpr AugPair(double a, double b) : v1(a), v2(b) {}
  explicit AugPair(cplx c) : v1(c.real()), v2(c.imag()) {}

  cplx to_complex() const { return {v1, v2}; }
  double norm() const { return std::hypot(v1, v2); }
  double norm2() const { return v1 * v1 + v2 * v2; }

  AugPair& operator+=(const AugPair& o) {
    v1 += o.v1;
    v2 += o.v2;
    return *this;
  }
  AugPair& operator-=(const AugPair& o) {
    v1 -= o.v1;
    v2 -= o.v2;
    return *this;
  }
  AugPair& operator*=(double s) {
    v1 *= s;
    v2 *= s;
    return *this;
  }
  friend AugPair operator+(AugPair a, const AugPair& b) { return a += b; }
  friend AugPair operator-(AugPair a, const AugPair& b) { return a -= b; }
  friend AugPair operator*(double s, AugPair a) { return a *= s; }
  friend AugPair operator*(AugPair a, double s) { return a *= s; }
  friend AugPair operator-(const AugPair& a) { return {-a.v1, -a.v2}; }
};

inline double dot(const AugPair& a, const AugPair& b) {
  return a.v1 * b.v1 + a.v2 * b.v2;
}

/// Row-major 2x2 real matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diag(double x, double y) { return {x, 0.0, 0.0, y}; }
  static constexpr Mat2 scalar(double s) { return {s, 0.0, 0.0, s}; }
  static constexpr Mat2 outer(const AugPair& x, const AugPair& y) {
    return {x.v1 * y.v1, x.v1 * y.v2, x.v2 * y.v1, x.v2 * y.v2};
  }

  double trace() const { return a + d; }
  double det() const { return a * d - b * c; }
  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 symmetrized() const {
    const double off = 0.5 * (b + c);
    return {a, off, off, d};
  }
  double max_abs() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  }
  bool finite() const {
    return std::isfinite(a) && std::isfinite(b) && std::isfinite(c) &&
           std::isfinite(d);
  }

  Mat2& operator+=(const Mat2& o) {
    a += o.a;
    b += o.b;
    c += o.c;
    d += o.d;
    return *this;
  }
  Mat2& operator-=(const Mat2& o) {
    a -= o.a;
    b -= o.b;
    c -= o.c;
    d -= o.d;
    return *this;
  }
  Mat2& operator*=(double s) {
    a *= s;
    b *= s;
    c *= s;
    d *= s;
    return *this;
  }
  friend Mat2 operator+(Mat2 x, const Mat2& y) { return x += y; }
  friend Mat2 operator-(Mat2 x, const Mat2& y) { return x -= y; }
  friend Mat2 operator*(double s, Mat2 x) { return x *= s; }
  friend Mat2 operator*(Mat2 x, double s) { return x *= s; }
  friend Mat2 operator-(const Mat2& x) { return {-x.a, -x.b, -x.c, -x.d}; }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend AugPair operator*(const Mat2& m, const AugPair& v) {
    return {m.a * v.v1 + m.b * v.v2, m.c * v.v1 + m.d * v.v2};
  }
};

/// Matrix of a complex channel entry h acting on augmented vectors:
/// [[Re h, -Im h], [Im h, Re h]].
using AugMat2 = Mat2;

inline AugMat2 augment_complex(cplx h) {
  return {h.real(), -h.imag(), h.imag(), h.real()};
}

/// Q^T v for Q = augment_complex(h), i.e. augmented conj(h) * v.
inline AugPair aug_mul_transpose(cplx h, const AugPair& v) {
  return {h.real() * v.v1 + h.imag() * v.v2, -h.imag() * v.v1 + h.real() * v.v2};
}

/// Q v for Q = augment_complex(h).
inline AugPair aug_mul(cplx h, const AugPair& v) {
  return {h.real() * v.v1 - h.imag() * v.v2, h.imag() * v.v1 + h.real() * v.v2};
}

/// Inverse of a general 2x2 matrix; throws when singular or non-finite.
inline Mat2 inverse(const Mat2& m) {
  const double det = m.det();
  const double scale = m.max_abs();
  if (!m.finite() || !std::isfinite(det) || scale == 0.0 ||
      std::abs(det) <= 1e-300 * scale * scale) {
    throw NonInvertible("2x2 matrix is singular or non-finite");
  }
  const double inv = 1.0 / det;
  return {m.d * inv, -m.b * inv, -m.c * inv, m.a * inv};
}

// Eigenvalue clamp applied to every covariance-like block of the iteration.
inline constexpr double kSpdFloor = 1e-12;
inline constexpr double kSpdCeil = 1e12;

/// Symmetric positive definite 2x2 matrix whose eigenvalues lie in
/// [kSpdFloor, kSpdCeil]. Construction symmetrizes and clamps.
class SpdMat2 {
 public:
  SpdMat2() : m_(Mat2::identity()) {}

  /// Symmetrizes `m` and clamps its eigenvalues. Sets `*clamped` when the
  /// spectrum had to be modified. Well-conditioned inputs pass through
  /// unchanged apart from symmetrization.
  static SpdMat2 regularized(const Mat2& m, bool* clamped = nullptr) {
    if (!m.finite()) throw NonInvertible("non-finite matrix entries");
    const Mat2 s = m.symmetrized();
    const double mid = 0.5 * (s.a + s.d);
    const double half = 0.5 * (s.a - s.d);
    const double rad = std::hypot(half, s.b);
    const double hi = mid + rad;
    const double lo = mid - rad;
    const bool ok = lo >= kSpdFloor && hi <= kSpdCeil;
    if (clamped) *clamped = !ok;
    if (ok) return SpdMat2(s);

    const double hi_c = std::clamp(hi, kSpdFloor, kSpdCeil);
    const double lo_c = std::clamp(lo, kSpdFloor, kSpdCeil);
    if (rad == 0.0) return SpdMat2(Mat2::scalar(hi_c));
    // Unit eigenvector of the larger eigenvalue.
    double e1 = half + rad;
    double e2 = s.b;
    if (std::abs(e1) < std::abs(half - rad)) {
      // Numerically better when half < 0.
      e1 = s.b;
      e2 = rad - half;
    }
    const double len = std::hypot(e1, e2);
    e1 /= len;
    e2 /= len;
    const AugPair v{e1, e2};
    const AugPair w{-e2, e1};
    return SpdMat2(hi_c * Mat2::outer(v, v) + lo_c * Mat2::outer(w, w));
  }

  static SpdMat2 scalar(double c) { return regularized(Mat2::scalar(c)); }

  const Mat2& mat() const { return m_; }
  operator const Mat2&() const { return m_; }  // NOLINT(google-explicit-constructor)

  /// Eigenvalues, larger first.
  std::pair<double, double> eigenvalues() const {
    const double mid = 0.5 * (m_.a + m_.d);
    const double rad = std::hypot(0.5 * (m_.a - m_.d), m_.b);
    return {mid + rad, mid - rad};
  }

 private:
  explicit SpdMat2(const Mat2& m) : m_(m) {}
  Mat2 m_;
};

inline SpdMat2 spd_inverse(const SpdMat2& r) {
  return SpdMat2::regularized(inverse(r.mat()));
}

/// tr(R^{-1}) = tr(R) / det(R) for 2x2 R.
inline double trace_inverse(const SpdMat2& r) {
  const double det = r.mat().det();
  if (!(det > 0.0)) throw NonInvertible("trace_inverse: non-positive determinant");
  return r.mat().trace() / det;
}

}  // namespace glse
