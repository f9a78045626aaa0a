#pragma once

// Direct numerical evaluation of the thresholding definitions: the argmin of
// E_out / E_in and finite-difference gradients. These do not use any of the
// closed-form expressions in thresholding.hpp and serve as their oracle.

#include <array>
#include <cmath>
#include <numbers>

#include "glse/aug.hpp"
#include "glse/config.hpp"
#include "glse/thresholding.hpp"

namespace glse {

struct NumericArgminOptions {
  int angles = 721;
  int radii = 2000;
  int refine_iters = 30;
  double fd_step = 1e-8;  // relative to max(1, |u|) / max(1, |w|)
};

/// Minimizes E_out over z exactly (the objective is an unconstrained
/// quadratic) and differentiates y in w by central differences.
inline OutputResult g_out_numeric(const AugPair& w, const AugPair& s, const SpdMat2& r,
                                  double rho, const NumericArgminOptions& opt = {}) {
  const Mat2 rinv = inverse(r.mat());
  const AugPair target = std::sqrt(rho) * s;
  auto y_of = [&](const AugPair& wv) {
    // Stationarity: R^{-1}(z - w) + 2(z - target) = 0.
    const AugPair z = inverse(rinv + Mat2::scalar(2.0)) * (rinv * wv + 2.0 * target);
    return rinv * (z - wv);
  };
  const AugPair y = y_of(w);
  const double h = opt.fd_step * std::max(1.0, w.norm()) * 1e2;
  Mat2 jac;
  for (int col = 0; col < 2; ++col) {
    const AugPair e = col == 0 ? AugPair{h, 0.0} : AugPair{0.0, h};
    const AugPair dy = (1.0 / (2.0 * h)) * (y_of(w + e) - y_of(w - e));
    if (col == 0) {
      jac.a = dy.v1;
      jac.c = dy.v2;
    } else {
      jac.b = dy.v1;
      jac.d = dy.v2;
    }
  }
  return {y, SpdMat2::regularized(-jac)};
}

namespace detail {

using ld = long double;

struct Vec2L {
  ld x = 0, y = 0;
};

struct ProxProblem {
  // E(x) = 1/2 (x-u)^T M (x-u) + lam |x|^2 + mu |x|, M = R^{-1}
  ld m00, m01, m11;
  ld ux, uy;
  ld lam, mu;
  bool peak;
  ld p_max;

  ld energy(ld x, ld y) const {
    const ld dx = x - ux, dy = y - uy;
    const ld quad = 0.5L * (m00 * dx * dx + 2.0L * m01 * dx * dy + m11 * dy * dy);
    const ld r2 = x * x + y * y;
    return quad + lam * r2 + mu * std::sqrt(r2);
  }
};

inline ProxProblem make_problem(const AugPair& u, const SpdMat2& r, const PrecoderConfig& cfg) {
  const Mat2& m = r.mat();
  const ld a = m.a, b = 0.5L * (static_cast<ld>(m.b) + m.c), d = m.d;
  const ld det = a * d - b * b;
  if (!(det > 0)) throw NonInvertible("g_in_numeric: singular R");
  return {d / det, -b / det, a / det, u.v1, u.v2, cfg.lambda, cfg.mu,
          cfg.peak_limited(), cfg.peak_limited() ? static_cast<ld>(*cfg.p_max) : 0.0L};
}

// Newton with backtracking on the smooth region x != 0.
inline Vec2L newton_interior(const ProxProblem& p, Vec2L x, int iters) {
  for (int it = 0; it < iters; ++it) {
    const ld r = std::hypot(x.x, x.y);
    if (r == 0) break;
    const ld dx = x.x - p.ux, dy = x.y - p.uy;
    const ld gx = p.m00 * dx + p.m01 * dy + 2 * p.lam * x.x + p.mu * x.x / r;
    const ld gy = p.m01 * dx + p.m11 * dy + 2 * p.lam * x.y + p.mu * x.y / r;
    const ld c = p.mu / r;
    const ld nx = x.x / r, ny = x.y / r;
    const ld h00 = p.m00 + 2 * p.lam + c * (1 - nx * nx);
    const ld h01 = p.m01 - c * nx * ny;
    const ld h11 = p.m11 + 2 * p.lam + c * (1 - ny * ny);
    const ld det = h00 * h11 - h01 * h01;
    if (!(det > 0)) break;
    ld sx = -(h11 * gx - h01 * gy) / det;
    ld sy = -(-h01 * gx + h00 * gy) / det;
    const ld e0 = p.energy(x.x, x.y);
    ld t = 1;
    Vec2L cand{x.x + sx, x.y + sy};
    // Keep the step on the same side of the origin so |x| stays smooth.
    // Energy ties within rounding are accepted so the iteration can keep
    // driving the gradient to zero once the objective is flat.
    const ld slack = 1e-17L * (1 + std::abs(e0));
    while (t > 1e-12L && (p.energy(cand.x, cand.y) > e0 + slack ||
                          (cand.x * x.x + cand.y * x.y) <= 0)) {
      t *= 0.5L;
      cand = {x.x + t * sx, x.y + t * sy};
    }
    if (t <= 1e-12L) break;
    const ld moved = std::hypot(cand.x - x.x, cand.y - x.y);
    x = cand;
    if (moved <= 1e-18L * std::max<ld>(1, r)) break;
  }
  return x;
}

// Minimizes E on the circle |x| = sqrt(p_max) by Newton in the angle.
inline Vec2L newton_circle(const ProxProblem& p, ld phi, int iters) {
  const ld rad = std::sqrt(p.p_max);
  auto eval = [&](ld ph, ld* d1, ld* d2) {
    const ld c = std::cos(ph), s = std::sin(ph);
    const ld x = rad * c, y = rad * s;
    const ld dx = x - p.ux, dy = y - p.uy;
    const ld gx = p.m00 * dx + p.m01 * dy;
    const ld gy = p.m01 * dx + p.m11 * dy;
    const ld tx = -rad * s, ty = rad * c;
    if (d1) *d1 = gx * tx + gy * ty;
    if (d2) {
      const ld curv = p.m00 * tx * tx + 2 * p.m01 * tx * ty + p.m11 * ty * ty;
      *d2 = curv - (gx * x + gy * y);
    }
    return p.energy(x, y);
  };
  for (int it = 0; it < iters; ++it) {
    ld d1 = 0, d2 = 0;
    const ld e0 = eval(phi, &d1, &d2);
    ld step = d2 > 0 ? -d1 / d2 : -d1;
    const ld cap = 0.05L;
    if (std::abs(step) > cap) step = step > 0 ? cap : -cap;
    ld t = 1;
    const ld slack = 1e-17L * (1 + std::abs(e0));
    while (t > 1e-12L && eval(phi + t * step, nullptr, nullptr) > e0 + slack) t *= 0.5L;
    if (t <= 1e-12L) break;
    phi += t * step;
    if (std::abs(t * step) < 1e-19L) break;
  }
  return {rad * std::cos(phi), rad * std::sin(phi)};
}

inline Vec2L refine(const ProxProblem& p, Vec2L start, int iters) {
  // x = 0 is optimal iff the subgradient condition ||M u|| <= mu holds.
  const ld mux = p.m00 * p.ux + p.m01 * p.uy;
  const ld muy = p.m01 * p.ux + p.m11 * p.uy;
  if (std::hypot(mux, muy) <= p.mu) return {0, 0};

  if (std::hypot(start.x, start.y) == 0) {
    // Leave the origin along the steepest-descent direction M u.
    const ld n = std::hypot(mux, muy);
    const ld r0 = std::max<ld>(1e-300L, 1e-3L * std::hypot(p.ux, p.uy));
    start = {r0 * mux / n, r0 * muy / n};
  }
  // Interior iterations are allowed to leave the disk; the convex program's
  // minimizer lies on the circle exactly when the unconstrained one is outside.
  const Vec2L free = newton_interior(p, start, 4 * iters + 40);
  if (!p.peak || free.x * free.x + free.y * free.y <= p.p_max) return free;
  const ld phi0 = std::atan2(start.y, start.x);
  const ld phi_free = std::atan2(free.y, free.x);
  const Vec2L a = newton_circle(p, phi0, 4 * iters + 40);
  const Vec2L b = newton_circle(p, phi_free, 4 * iters + 40);
  return p.energy(a.x, a.y) <= p.energy(b.x, b.y) ? a : b;
}

inline Vec2L grid_start(const ProxProblem& p, const AugPair& u, const PrecoderConfig& cfg,
                        const NumericArgminOptions& opt) {
  double rmax = 4.0 * u.norm();
  if (cfg.peak_limited()) rmax = std::max(rmax, std::sqrt(*cfg.p_max));
  if (rmax == 0.0) rmax = 1.0;
  double rcap = rmax;
  if (cfg.peak_limited()) rcap = std::min(rmax, std::sqrt(*cfg.p_max));
  const double m00 = static_cast<double>(p.m00), m01 = static_cast<double>(p.m01),
               m11 = static_cast<double>(p.m11);
  double best = 0.5 * (m00 * u.v1 * u.v1 + 2 * m01 * u.v1 * u.v2 + m11 * u.v2 * u.v2);
  Vec2L arg{0, 0};
  const int na = std::max(1, opt.angles);
  const int nr = std::max(2, opt.radii);
  for (int j = 0; j < na; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / na;
    const double c = std::cos(phi), s = std::sin(phi);
    for (int i = 1; i < nr; ++i) {
      const double rr = rcap * i / (nr - 1);
      const double x = rr * c, y = rr * s;
      const double dx = x - u.v1, dy = y - u.v2;
      const double e = 0.5 * (m00 * dx * dx + 2 * m01 * dx * dy + m11 * dy * dy) +
                       cfg.lambda * rr * rr + cfg.mu * rr;
      if (e < best) {
        best = e;
        arg = {x, y};
      }
    }
  }
  return arg;
}

}  // namespace detail

/// argmin_{x in X} E_in(x, u, R) by polar grid search plus Newton refinement
/// in extended precision; gradient by central differences in u.
inline InputResult g_in_numeric(const AugPair& u, const SpdMat2& r, const PrecoderConfig& cfg,
                                const NumericArgminOptions& opt = {}) {
  const detail::ProxProblem base = detail::make_problem(u, r, cfg);
  const detail::Vec2L start = detail::grid_start(base, u, cfg, opt);
  const detail::Vec2L xs = detail::refine(base, start, opt.refine_iters);
  InputResult out{{static_cast<double>(xs.x), static_cast<double>(xs.y)}, Mat2{}};
  if (cfg.peak_limited() && out.x.norm2() > *cfg.p_max) out.x = radial_clip(out.x, *cfg.p_max);

  const double h = opt.fd_step * std::max(1.0, u.norm());
  auto solve_at = [&](const AugPair& uu) {
    const detail::ProxProblem p = detail::make_problem(uu, r, cfg);
    const detail::Vec2L v = detail::refine(p, xs, opt.refine_iters);
    return std::array<detail::ld, 2>{v.x, v.y};
  };
  for (int col = 0; col < 2; ++col) {
    const AugPair e = col == 0 ? AugPair{h, 0.0} : AugPair{0.0, h};
    const auto plus = solve_at(u + e);
    const auto minus = solve_at(u - e);
    const double d1 = static_cast<double>((plus[0] - minus[0]) / (2.0L * h));
    const double d2 = static_cast<double>((plus[1] - minus[1]) / (2.0L * h));
    if (col == 0) {
      out.g.a = d1;
      out.g.c = d2;
    } else {
      out.g.b = d1;
      out.g.d = d2;
    }
  }
  return out;
}

}  // namespace glse
