#include <gtest/gtest.h>

#include <random>

#include "glse/oracle.hpp"
#include "glse/sim.hpp"

using namespace glse;

TEST(Prox, Examples) {
  const cplx a(0.7, -1.3);
  EXPECT_EQ(prox_penalty(a, 0.5, PrecoderConfig{}), a);
  PrecoderConfig cfg;
  cfg.lambda = 0.6;
  EXPECT_LT(std::abs(prox_penalty(a, 0.5, cfg) - a / 1.6), 1e-15);
  PrecoderConfig pk;
  pk.mu = 1.0;
  pk.p_max = 1.0;
  EXPECT_DOUBLE_EQ(prox_penalty({2.0, 0.0}, 0.5, pk).real(), 1.0);
  pk.p_max.reset();
  EXPECT_DOUBLE_EQ(prox_penalty({2.0, 0.0}, 0.5, pk).real(), 1.5);
}

TEST(Prox, MatchesGridSearch) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    PrecoderConfig cfg;
    cfg.lambda = u01(rng);
    cfg.mu = u01(rng);
    cfg.p_max = 0.2 + u01(rng);
    const double step = 0.1 + u01(rng);
    const double a = 3.0 * u01(rng);
    // Real axis suffices: the prox keeps the phase of a.
    double best = 0.0, best_f = INFINITY;
    for (double v = 0.0; v * v <= *cfg.p_max; v += 1e-5) {
      const double f = (v - a) * (v - a) / (2 * step) + cfg.lambda * v * v + cfg.mu * v;
      if (f < best_f) best_f = f, best = v;
    }
    EXPECT_NEAR(prox_penalty({a, 0.0}, step, cfg).real(), best, 2e-5) << i;
  }
}

TEST(Prox, NonExpansive) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  PrecoderConfig cfg;
  cfg.lambda = 0.4;
  cfg.mu = 0.7;
  cfg.p_max = 0.5;
  for (int i = 0; i < 1000; ++i) {
    const cplx a(nd(rng), nd(rng)), b(nd(rng), nd(rng));
    EXPECT_LE(std::abs(prox_penalty(a, 0.3, cfg) - prox_penalty(b, 0.3, cfg)),
              std::abs(a - b) + 1e-15);
  }
}

TEST(Objective, Examples) {
  const ChannelMatrix h = gen_channel(3, 5, 1);
  const std::vector<cplx> s = gen_symbols(3, 2);
  PrecoderConfig cfg;
  cfg.rho = 2.0;
  double ss = 0.0;
  for (const cplx& v : s) ss += std::norm(v);
  EXPECT_NEAR(objective(h, s, cfg, std::vector<cplx>(5)), 2.0 * ss, 1e-14);

  const ChannelMatrix eye(2, 2, {1.0, 0.0, 0.0, 1.0});
  const std::vector<cplx> s2{cplx(1, 2), cplx(-1, 0)};
  const std::vector<cplx> x{std::sqrt(2.0) * s2[0], std::sqrt(2.0) * s2[1]};
  EXPECT_NEAR(objective(eye, s2, cfg, x), 0.0, 1e-14);
  cfg.p_max = 1.0;
  EXPECT_THROW(objective(eye, s2, cfg, x), SupportViolation);
}

TEST(SolveGlse, IdentityChannel) {
  const std::size_t k = 4;
  std::vector<cplx> e(k * k);
  for (std::size_t i = 0; i < k; ++i) e[i * k + i] = 1.0;
  const ChannelMatrix h(k, k, e);
  const std::vector<cplx> s = gen_symbols(k, 3);
  PrecoderConfig cfg;
  cfg.lambda = 0.5;
  cfg.rho = 1.5;
  OracleReport r = solve_glse(h, s, cfg);
  for (std::size_t i = 0; i < k; ++i) {
    EXPECT_LT(std::abs(r.x_star[i] - std::sqrt(1.5) * s[i] / 1.5), 1e-8);
  }
  cfg.lambda = 0.0;
  cfg.mu = 1.2;
  r = solve_glse(h, s, cfg);
  for (std::size_t i = 0; i < k; ++i) {
    const cplx a = std::sqrt(1.5) * s[i];
    const cplx want = std::max(std::abs(a) - 0.6, 0.0) * a / std::abs(a);
    EXPECT_LT(std::abs(r.x_star[i] - want), 1e-8);
  }
  EXPECT_LT(r.prox_residual, 1e-9);
}

TEST(SolveGlse, BeatsRandomFeasiblePoints) {
  const ChannelMatrix h = gen_channel(4, 8, 11);
  const std::vector<cplx> s = gen_symbols(4, 12);
  PrecoderConfig cfg;
  cfg.lambda = 0.2;
  cfg.mu = 0.3;
  cfg.p_max = 0.4;
  const OracleReport r = solve_glse(h, s, cfg);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-0.44, 0.44);
  for (int i = 0; i < 100; ++i) {
    std::vector<cplx> x(8);
    for (cplx& v : x) {
      v = {u(rng), u(rng)};
      if (std::norm(v) > 0.4) v *= std::sqrt(0.4) / std::abs(v) * (1 - 1e-12);
    }
    if (i % 2) {  // probe near the optimum
      for (std::size_t n = 0; n < 8; ++n) {
        x[n] = r.x_star[n] + 0.01 * x[n];
        if (std::norm(x[n]) > 0.4) x[n] *= std::sqrt(0.4) / std::abs(x[n]) * (1 - 1e-12);
      }
    }
    EXPECT_LE(r.objective, objective(h, s, cfg, x) + 1e-12) << i;
  }
}

TEST(SolveGlse, SmallInstanceGridRefinement) {
  // K=2, N=3: coordinate grid refinement over the 6 real unknowns, started
  // from the prox-gradient solution with step 0.01 and halved to 1e-7.
  const ChannelMatrix h = gen_channel(2, 3, 21);
  const std::vector<cplx> s = gen_symbols(2, 22);
  PrecoderConfig cfg;
  cfg.lambda = 0.25;
  cfg.mu = 0.35;
  const OracleReport r = solve_glse(h, s, cfg);
  std::vector<cplx> x = r.x_star;
  double best = objective(h, s, cfg, x);
  for (double step = 0.01; step > 1e-7; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t n = 0; n < 3; ++n) {
        for (cplx d : {cplx(step, 0), cplx(-step, 0), cplx(0, step), cplx(0, -step)}) {
          std::vector<cplx> t = x;
          t[n] += d;
          const double f = objective(h, s, cfg, t);
          if (f < best - 1e-15) best = f, x = t, improved = true;
        }
      }
    }
  }
  EXPECT_NEAR(r.objective, best, 1e-4);
  EXPECT_LE(r.objective, best + 1e-9);
}

TEST(SolveGlse, RejectsNonConvex) {
  const ChannelMatrix h = gen_channel(2, 3, 1);
  const std::vector<cplx> s = gen_symbols(2, 2);
  PrecoderConfig cfg;
  cfg.lambda = -0.1;
  cfg.allow_negative_lambda = true;
  EXPECT_THROW(solve_glse(h, s, cfg), InvalidConfig);
}
