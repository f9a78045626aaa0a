#pragma once

// Randomized self-check: GAMP against the convex reference solver and the
// thresholding functions against their numerical definitions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "glse/gamp.hpp"
#include "glse/oracle.hpp"
#include "glse/sim.hpp"
#include "glse/thresholding.hpp"
#include "glse/thresholding_numeric.hpp"

namespace glse {

struct ValidationOptions {
  std::size_t k_max = 8;
  std::size_t n_max = 16;
  EngineOptions engine{200, 1e-10, 0.8};
  double objective_tol = 1e-3;      // relative
  double threshold_tol = 1e-5;      // outputs
  double gradient_tol = 1e-4;       // Jacobians, relative to max(1, |J|)
};

struct ValidationCase {
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::size_t n = 0;
  PrecoderConfig cfg;
  bool diverged = false;
  double objective_gap = 0.0;  // (f_gamp - f_oracle) / |f_oracle|
  double g_out_err = 0.0;
  double g_in_err = 0.0;
  double g_in_grad_err = 0.0;

  bool ok(const ValidationOptions& o) const {
    return !diverged && objective_gap <= o.objective_tol && g_out_err <= o.threshold_tol &&
           g_in_err <= o.threshold_tol && g_in_grad_err <= o.gradient_tol;
  }
};

/// One randomized case, fully determined by `seed`.
inline ValidationCase run_validation_case(std::uint64_t seed, const ValidationOptions& opt) {
  if (opt.k_max < 1 || opt.n_max < 2) throw InvalidConfig("validation sizes too small");
  std::mt19937_64 rng(stream_seed(seed, 0, 0, 2));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  ValidationCase c;
  c.seed = seed;
  c.n = 2 + static_cast<std::size_t>(u01(rng) * static_cast<double>(opt.n_max - 1));
  c.n = std::min(c.n, opt.n_max);
  c.k = 1 + static_cast<std::size_t>(u01(rng) * static_cast<double>(std::min(opt.k_max, c.n - 1)));
  c.k = std::min(c.k, std::min(opt.k_max, c.n - 1));
  c.cfg.rho = 1.0;
  c.cfg.lambda = 0.05 + 0.95 * u01(rng);
  c.cfg.mu = u01(rng) < 0.5 ? 0.0 : u01(rng);
  if (u01(rng) < 0.5) c.cfg.p_max = 0.1 + 0.5 * u01(rng);

  const ChannelMatrix h = gen_channel(c.k, c.n, stream_seed(seed, 0, 0, 0));
  const std::vector<cplx> s = gen_symbols(c.k, stream_seed(seed, 0, 0, 1));
  const RunResult r = run(h, s, c.cfg, opt.engine);
  if (r.diverged) {
    c.diverged = true;
  } else {
    const OracleReport orc = solve_glse(h, s, c.cfg);
    c.objective_gap = (objective(h, s, c.cfg, r.x) - orc.objective) / std::abs(orc.objective);
  }

  // Thresholding at a random anisotropic R.
  const double l1 = std::pow(10.0, -1.0 + 2.0 * u01(rng));
  const double l2 = std::pow(10.0, -1.0 + 2.0 * u01(rng));
  const double th = std::numbers::pi * u01(rng);
  const AugPair v{std::cos(th), std::sin(th)};
  const AugPair w{-v.v2, v.v1};
  const SpdMat2 rr = SpdMat2::regularized(l1 * Mat2::outer(v, v) + l2 * Mat2::outer(w, w));
  const AugPair uu{4.0 * u01(rng) - 2.0, 4.0 * u01(rng) - 2.0};
  const AugPair ss{2.0 * u01(rng) - 1.0, 2.0 * u01(rng) - 1.0};

  const OutputResult oc = g_out_closed(uu, ss, rr, c.cfg.rho);
  const OutputResult on = g_out_numeric(uu, ss, rr, c.cfg.rho);
  c.g_out_err = (oc.y - on.y).norm();

  const InputResult ic = g_in(uu, rr, c.cfg, opt.engine.input);
  const InputResult in = g_in_numeric(uu, rr, c.cfg);
  c.g_in_err = (ic.x - in.x).norm();
  c.g_in_grad_err = (ic.g - in.g).max_abs() / std::max(1.0, in.g.max_abs());
  return c;
}

inline std::string describe(const ValidationCase& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "seed=%llu K=%zu N=%zu lambda=%.17g mu=%.17g p_max=%s",
                static_cast<unsigned long long>(c.seed), c.k, c.n, c.cfg.lambda, c.cfg.mu,
                c.cfg.p_max ? detail::fmt_num(*c.cfg.p_max).c_str() : "none");
  return buf;
}

}  // namespace glse
