#pragma once

// Output and input thresholding functions of the GLSE-GAMP iteration for the
// quadratic output channel, the lambda|v|^2 + mu|v| penalty on the complex
// plane, and the same penalty on the peak-power disk.

#include <cmath>

#include "glse/aug.hpp"
#include "glse/config.hpp"

namespace glse {

struct OutputResult {
  AugPair y;
  SpdMat2 r_y;  // -grad_w g_out
};

struct InputResult {
  AugPair x;
  Mat2 g;  // grad_u g_in
};

/// 1/2 (z-w)^T R^{-1} (z-w) + |z - sqrt(rho) s|^2
inline double e_out(const AugPair& z, const AugPair& w, const AugPair& s,
                    const SpdMat2& r, double rho) {
  const Mat2 rinv = inverse(r.mat());
  const AugPair dz = z - w;
  const AugPair res = z - std::sqrt(rho) * s;
  return 0.5 * dot(dz, rinv * dz) + res.norm2();
}

/// y = G_w w + G_s sqrt(rho) s and r_y = -G_w, with A = (I + 2R)^{-1}.
inline OutputResult g_out_closed(const AugPair& w, const AugPair& s,
                                 const SpdMat2& r, double rho) {
  const Mat2& rm = r.mat();
  const Mat2 eye = Mat2::identity();
  const Mat2 rinv = inverse(rm);
  const Mat2 a = inverse(eye + 2.0 * rm);
  const Mat2 at = a.transpose();
  const Mat2 am = a - eye;
  const Mat2 amt = am.transpose();
  const Mat2 gw = -2.0 * (at * a) - amt * rinv * am;
  const Mat2 gs = -2.0 * (2.0 * (at * a * rm) - at + amt * rinv * a * rm);
  return {gw * w + gs * (std::sqrt(rho) * s), SpdMat2::regularized(-gw)};
}

/// 1/2 (u-x)^T R^{-1} (u-x) + lambda |x|^2 + mu |x|
inline double e_in(const AugPair& x, const AugPair& u, const SpdMat2& r,
                   const PrecoderConfig& cfg) {
  const Mat2 rinv = inverse(r.mat());
  const AugPair d = u - x;
  return 0.5 * dot(d, rinv * d) + cfg.lambda * x.norm2() + cfg.mu * x.norm();
}

/// Scales x onto the circle |x|^2 = p_max, rounding the factor down so that
/// the squared norm never exceeds p_max in floating point.
inline AugPair radial_clip(const AugPair& x, double p_max) {
  const double n = x.norm();
  if (n == 0.0) return x;
  double scale = std::sqrt(p_max) / n;
  AugPair y = scale * x;
  while (y.norm2() > p_max) {
    scale = std::nextafter(scale, 0.0);
    y = scale * x;
  }
  return y;
}

namespace detail {

inline double soft_threshold_level(const SpdMat2& r, double mu) {
  return 2.0 * mu / trace_inverse(r);
}

inline Mat2 shrink_matrix(const SpdMat2& r, double lambda) {
  const Mat2 m = Mat2::identity() + 2.0 * lambda * r.mat();
  if (lambda < 0.0) {
    // I + 2 lambda R must stay positive definite for E_in to be bounded.
    if (!(1.0 + 2.0 * lambda * r.eigenvalues().first > 0.0)) {
      throw NonInvertible("input thresholding unbounded: I + 2 lambda R is not positive definite");
    }
  }
  return inverse(m);
}

// G_u f(u) and G_u F(u) for |u| >= tau.
inline InputResult shrink_branch(const AugPair& u, const Mat2& gu, double tau) {
  const double n = u.norm();
  if (n == 0.0) {
    // tau == 0 here; continuous extension f = 0, F = I.
    return {AugPair{}, gu};
  }
  const double keep = 1.0 - tau / n;
  const AugPair f = keep * u;
  const Mat2 ff = (tau / (n * n * n)) * Mat2::outer(u, u) + Mat2::scalar(keep);
  return {gu * f, gu * ff};
}

// sqrt(p_max) u/|u| with gradient sqrt(p_max) u~ u~^T / |u|^3, u~ = (u2, -u1).
inline InputResult clip_branch(const AugPair& u, double p_max) {
  const double n = u.norm();
  const AugPair ut{u.v2, -u.v1};
  return {radial_clip(u, p_max), (std::sqrt(p_max) / (n * n * n)) * Mat2::outer(ut, ut)};
}

}  // namespace detail

/// Input thresholding for the antenna-selection penalty on the complex plane.
inline InputResult g_in_tas(const AugPair& u, const SpdMat2& r, const PrecoderConfig& cfg) {
  if (cfg.peak_limited()) throw InvalidConfig("g_in_tas requires unbounded support");
  const double tau = detail::soft_threshold_level(r, cfg.mu);
  if (u.norm() < tau) return {AugPair{}, Mat2{}};
  return detail::shrink_branch(u, detail::shrink_matrix(r, cfg.lambda), tau);
}

/// Input thresholding on the peak-power disk: zero, shrink, or clip to the
/// circle depending on |u| against tau and tau~.
inline InputResult g_in_papr(const AugPair& u, const SpdMat2& r, const PrecoderConfig& cfg) {
  if (!cfg.peak_limited()) throw InvalidConfig("g_in_papr requires peak-limited support");
  const double p_max = *cfg.p_max;
  const double tr_inv = trace_inverse(r);
  const double tau = 2.0 * cfg.mu / tr_inv;
  const double tau_clip = (1.0 + 4.0 * cfg.lambda / tr_inv) * std::sqrt(p_max) + tau;
  const double n = u.norm();
  if (n < tau) return {AugPair{}, Mat2{}};
  if (n >= tau_clip) return detail::clip_branch(u, p_max);

  InputResult mid = detail::shrink_branch(u, detail::shrink_matrix(r, cfg.lambda), tau);
  const double m2 = mid.x.norm2();
  if (m2 > p_max) {
    // Anisotropic R can push G_u f(u) past the circle below tau~; project
    // radially and chain the projection Jacobian.
    const double m = std::sqrt(m2);
    const AugPair xh = (1.0 / m) * mid.x;
    const Mat2 proj = (std::sqrt(p_max) / m) * (Mat2::identity() - Mat2::outer(xh, xh));
    mid.g = proj * mid.g;
    mid.x = radial_clip(mid.x, p_max);
  }
  return mid;
}

inline InputResult g_in(const AugPair& u, const SpdMat2& r, const PrecoderConfig& cfg) {
  return cfg.peak_limited() ? g_in_papr(u, r, cfg) : g_in_tas(u, r, cfg);
}

namespace detail {

struct SymEigen2 {
  double l[2];
  AugPair v[2];
};

inline SymEigen2 sym_eigen(const Mat2& s) {
  const double mid = 0.5 * (s.a + s.d);
  const double half = 0.5 * (s.a - s.d);
  const double rad = std::hypot(half, s.b);
  if (rad == 0.0) return {{mid, mid}, {{1.0, 0.0}, {0.0, 1.0}}};
  double e1 = half + rad, e2 = s.b;
  if (std::abs(e1) < std::abs(half - rad)) {
    e1 = s.b;
    e2 = rad - half;
  }
  const double len = std::hypot(e1, e2);
  const AugPair v{e1 / len, e2 / len};
  return {{mid + rad, mid - rad}, {v, {-v.v2, v.v1}}};
}

// Smallest root of the decreasing convex function sum_i c_i^2 / (a_i t + b)^2
// - target on t >= t0, by Newton from the left; the caller guarantees the
// function is non-negative at t0.
template <class F>
double newton_decreasing(F&& f, double t0, double t_hi) {
  double t = t0;
  for (int it = 0; it < 200; ++it) {
    double df = 0.0;
    const double v = f(t, &df);
    if (!(v > 0.0) || !(df < 0.0)) break;
    const double next = std::min(t - v / df, t_hi);
    if (!(next > t)) break;
    t = next;
  }
  return t;
}

}  // namespace detail

/// Exact minimizer of E_in for arbitrary SPD R, with the Jacobian from
/// implicit differentiation of the stationarity condition. Coincides with
/// g_in when R is a scalar matrix.
inline InputResult g_in_exact(const AugPair& u, const SpdMat2& r, const PrecoderConfig& cfg) {
  const Mat2 m = inverse(r.mat()).symmetrized();
  const AugPair mu_vec = m * u;
  const double lam2 = 2.0 * cfg.lambda;
  if (mu_vec.norm() <= cfg.mu) return {AugPair{}, Mat2{}};

  const detail::SymEigen2 e = detail::sym_eigen(m);
  const double d[2] = {e.l[0] + lam2, e.l[1] + lam2};
  if (!(d[1] > 0.0)) {
    throw NonInvertible("input thresholding unbounded: R^{-1} + 2 lambda I is not positive definite");
  }
  const double c[2] = {dot(e.v[0], mu_vec), dot(e.v[1], mu_vec)};
  auto x_of = [&](double kappa_extra) {
    // (M + (2 lambda + kappa_extra) I)^{-1} M u
    return (c[0] / (d[0] + kappa_extra)) * e.v[0] + (c[1] / (d[1] + kappa_extra)) * e.v[1];
  };

  // Interior stationarity: (M + 2 lambda I + mu/r I) x = M u with r = |x|,
  // i.e. sum_i c_i^2 / (d_i r + mu)^2 = 1.
  const double cn = std::hypot(c[0], c[1]);
  double r_int;
  if (cfg.mu == 0.0) {
    r_int = x_of(0.0).norm();
  } else {
    auto psi = [&](double rr, double* dpsi) {
      double v = -1.0, dv = 0.0;
      for (int i = 0; i < 2; ++i) {
        const double q = d[i] * rr + cfg.mu;
        v += c[i] * c[i] / (q * q);
        dv += -2.0 * c[i] * c[i] * d[i] / (q * q * q);
      }
      *dpsi = dv;
      return v;
    };
    r_int = detail::newton_decreasing(psi, (cn - cfg.mu) / d[0], (cn - cfg.mu) / d[1]);
  }

  if (!cfg.peak_limited() || r_int * r_int <= *cfg.p_max) {
    const double kappa = r_int > 0.0 ? cfg.mu / r_int : 0.0;
    InputResult out{x_of(kappa), Mat2{}};
    const double rn = out.x.norm();
    Mat2 hess = m + Mat2::scalar(lam2);
    if (cfg.mu > 0.0 && rn > 0.0) {
      const AugPair n = (1.0 / rn) * out.x;
      hess += (cfg.mu / rn) * (Mat2::identity() - Mat2::outer(n, n));
    }
    out.g = inverse(hess) * m;
    if (cfg.peak_limited() && out.x.norm2() > *cfg.p_max) out.x = radial_clip(out.x, *cfg.p_max);
    return out;
  }

  // Boundary: (M + nu I) x = M u with |x|^2 = p_max, nu >= 2 lambda + mu/sqrt(p_max).
  const double p_max = *cfg.p_max;
  const double nu0 = cfg.mu / std::sqrt(p_max);
  auto phi = [&](double nu, double* dphi) {
    double v = -p_max, dv = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double q = d[i] + nu;
      v += c[i] * c[i] / (q * q);
      dv += -2.0 * c[i] * c[i] / (q * q * q);
    }
    *dphi = dv;
    return v;
  };
  const double nu = detail::newton_decreasing(phi, nu0, cn / std::sqrt(p_max));
  const AugPair x = x_of(nu);
  const Mat2 b_inv = inverse(m + Mat2::scalar(lam2 + nu));
  const AugPair bx = b_inv * x;
  const double xbx = dot(x, bx);
  const Mat2 g = b_inv * m - (1.0 / xbx) * Mat2::outer(bx, bx) * m;
  return {radial_clip(x, p_max), g};
}

enum class InputThreshold { ClosedForm, Exact };

inline InputResult g_in(const AugPair& u, const SpdMat2& r, const PrecoderConfig& cfg,
                        InputThreshold kind) {
  return kind == InputThreshold::Exact ? g_in_exact(u, r, cfg) : g_in(u, r, cfg);
}

}  // namespace glse
