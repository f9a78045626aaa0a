#pragma once

// Reference solver for the convex least-square-error program: accelerated
// proximal gradient with adaptive restart. Used to certify GAMP outputs on
// small instances; it shares nothing with the message-passing path beyond the
// objective definition.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "glse/channel.hpp"
#include "glse/config.hpp"
#include "glse/errors.hpp"

namespace glse {

struct OracleReport {
  std::vector<cplx> x_star;
  double objective = 0.0;
  double prox_residual = 0.0;
  int iterations = 0;
};

class OracleNotConverged : public MaxIterations {
 public:
  explicit OracleNotConverged(OracleReport best)
      : MaxIterations("solve_glse: iteration budget exhausted", best.prox_residual),
        best_(std::move(best)) {}
  const OracleReport& best() const noexcept { return best_; }

 private:
  OracleReport best_;
};

struct OracleOptions {
  double tol = 1e-9;
  int max_iter = 2'000'000;
  int power_steps = 50;
  double power_tol = 1e-10;
};

/// argmin_{v in X} |v - a|^2 / (2 step) + lambda |v|^2 + mu |v|
inline cplx prox_penalty(cplx a, double step, const PrecoderConfig& cfg) {
  const double m = std::abs(a);
  if (m == 0.0) return {0.0, 0.0};
  double r = std::max(m - step * cfg.mu, 0.0) / (1.0 + 2.0 * step * cfg.lambda);
  if (cfg.p_max) {
    const double cap = std::sqrt(*cfg.p_max);
    if (r > cap) r = cap;
    cplx v = (r / m) * a;
    while (std::norm(v) > *cfg.p_max) {
      r = std::nextafter(r, 0.0);
      v = (r / m) * a;
    }
    return v;
  }
  return (r / m) * a;
}

/// Largest eigenvalue of H^H H by power iteration.
inline double gram_spectral_norm(const ChannelMatrix& h, int steps = 50, double rel_tol = 1e-10) {
  std::vector<cplx> v(h.n_antennas());
  // Deterministic, non-degenerate start.
  for (std::size_t n = 0; n < v.size(); ++n) {
    v[n] = cplx(1.0 + 0.1 * static_cast<double>(n % 7), 0.05 * static_cast<double>(n % 3));
  }
  double est = 0.0;
  for (int it = 0; it < steps; ++it) {
    double nv = 0.0;
    for (const cplx& c : v) nv += std::norm(c);
    nv = std::sqrt(nv);
    for (cplx& c : v) c /= nv;
    std::vector<cplx> w = h.apply_adjoint(h.apply(v));
    double rayleigh = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) rayleigh += (std::conj(v[n]) * w[n]).real();
    v = std::move(w);
    const bool done = it > 0 && std::abs(rayleigh - est) <= rel_tol * std::abs(rayleigh);
    est = rayleigh;
    if (done) break;
  }
  return est;
}

namespace detail {

struct ProxGradCtx {
  const ChannelMatrix& h;
  std::vector<cplx> target;  // sqrt(rho) s
  const PrecoderConfig& cfg;
  double step;

  std::vector<cplx> gradient(std::span<const cplx> x) const {
    std::vector<cplx> r = h.apply(x);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = 2.0 * (r[k] - target[k]);
    return h.apply_adjoint(r);
  }

  // Gradient-mapping norm ||x - prox(x - step grad f(x))|| / step.
  double residual(std::span<const cplx> x) const {
    const std::vector<cplx> g = gradient(x);
    double acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      acc += std::norm(x[n] - prox_penalty(x[n] - step * g[n], step, cfg));
    }
    return std::sqrt(acc) / step;
  }
};

}  // namespace detail

inline OracleReport solve_glse(const ChannelMatrix& h, std::span<const cplx> s,
                               const PrecoderConfig& cfg, const OracleOptions& opt = {}) {
  cfg.validate();
  if (!cfg.convex()) throw InvalidConfig("solve_glse requires a convex penalty (lambda >= 0)");
  if (!(opt.tol > 0.0)) throw InvalidConfig("solve_glse: tol must be > 0");
  if (s.size() != h.k_users()) throw InvalidConfig("solve_glse: symbol length != K");

  const double lmax = gram_spectral_norm(h, opt.power_steps, opt.power_tol);
  const double step = 1.0 / (2.0 * std::max(lmax, 1e-300));
  detail::ProxGradCtx ctx{h, {}, cfg, step};
  ctx.target.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) ctx.target[k] = std::sqrt(cfg.rho) * s[k];

  const std::size_t n = h.n_antennas();
  std::vector<cplx> x(n), yv(n);
  double t = 1.0;
  bool at_anchor = true;  // yv == x, no momentum
  double f_x = objective(h, s, cfg, x);
  OracleReport rep;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const std::vector<cplx> g = ctx.gradient(yv);
    std::vector<cplx> x_new(n);
    double move = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x_new[i] = prox_penalty(yv[i] - step * g[i], step, cfg);
      move += std::norm(x_new[i] - yv[i]);
    }
    const double f_new = objective(h, s, cfg, x_new);
    if (f_new > f_x + 1e-15 * (1.0 + std::abs(f_x))) {
      // A plain proximal step that fails to descend means we are at the
      // rounding floor; otherwise restart momentum from the accepted point.
      if (at_anchor) break;
      t = 1.0;
      yv = x;
      at_anchor = true;
      continue;
    }
    at_anchor = false;
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) {
      yv[i] = x_new[i] + ((t - 1.0) / t_new) * (x_new[i] - x[i]);
    }
    x = std::move(x_new);
    f_x = f_new;
    t = t_new;
    if (std::sqrt(move) / step < opt.tol && ctx.residual(x) < opt.tol) {
      ++it;
      break;
    }
  }
  rep.x_star = x;
  rep.objective = f_x;
  rep.prox_residual = ctx.residual(x);
  rep.iterations = it;
  if (rep.prox_residual >= opt.tol) throw OracleNotConverged(rep);
  return rep;
}

}  // namespace glse
