#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <sstream>

#include "glse/gamp.hpp"
#include "glse/oracle.hpp"
#include "glse/sim.hpp"

using namespace glse;

namespace {

std::vector<cplx> rzf_direct(const ChannelMatrix& h, std::span<const cplx> s, double lambda,
                             double rho) {
  const auto k = static_cast<Eigen::Index>(h.k_users());
  const auto n = static_cast<Eigen::Index>(h.n_antennas());
  Eigen::MatrixXcd hm(k, n);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) hm(i, j) = h(i, j);
  }
  Eigen::VectorXcd sv(k);
  for (Eigen::Index i = 0; i < k; ++i) sv(i) = std::sqrt(rho) * s[i];
  const Eigen::MatrixXcd a = hm.adjoint() * hm + lambda * Eigen::MatrixXcd::Identity(n, n);
  const Eigen::VectorXcd x = a.ldlt().solve(hm.adjoint() * sv);
  return {x.data(), x.data() + n};
}

}  // namespace

TEST(Init, Examples) {
  const ChannelMatrix h = gen_channel(2, 4, 1);
  PrecoderConfig cfg;
  cfg.lambda = 1.0;
  GampState st = init_state(h, cfg);
  EXPECT_DOUBLE_EQ(st.r_x[0].mat().a, 0.5);
  EXPECT_DOUBLE_EQ(st.r_x[0].mat().d, 0.5);
  for (const AugPair& x : st.x) EXPECT_EQ(x.norm(), 0.0);
  cfg.lambda = 0.0;
  cfg.mu = 0.5;
  st = init_state(h, cfg);
  EXPECT_DOUBLE_EQ(st.r_x[1].mat().a, 1.0);
}

TEST(Sweep, ZeroSymbolsStayZero) {
  const ChannelMatrix h = gen_channel(3, 6, 2);
  const std::vector<cplx> s(3);
  PrecoderConfig cfg;
  cfg.lambda = 0.3;
  cfg.mu = 0.2;
  GampState st = init_state(h, cfg);
  for (int i = 0; i < 5; ++i) st = sweep(st, h, s, cfg);
  for (const AugPair& x : st.x) EXPECT_EQ(x.norm(), 0.0);
}

TEST(Run, ScalarRzf) {
  const ChannelMatrix h(1, 1, {cplx(1.0, 0.0)});
  const std::vector<cplx> s{cplx(0.6, -0.8)};
  PrecoderConfig cfg;
  cfg.lambda = 0.5;
  cfg.rho = 2.0;
  const RunResult r = run(h, s, cfg, {200, 1e-12});
  const cplx want = std::sqrt(2.0) * s[0] / 1.5;
  EXPECT_LT(std::abs(r.x[0] - want), 1e-9);
}

TEST(Run, MatchesDenseRzfSolve) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ChannelMatrix h = gen_channel(4, 8, stream_seed(seed, 1, 0, 0));
    const std::vector<cplx> s = gen_symbols(4, stream_seed(seed, 1, 0, 1));
    PrecoderConfig cfg;
    cfg.lambda = 0.2;
    const RunResult r = run(h, s, cfg, {500, 1e-12});
    ASSERT_FALSE(r.diverged);
    const std::vector<cplx> ref = rzf_direct(h, s, cfg.lambda, cfg.rho);
    for (std::size_t n = 0; n < ref.size(); ++n) EXPECT_LT(std::abs(r.x[n] - ref[n]), 1e-4) << seed;
  }
}

TEST(Run, TasMatchesOracle) {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ChannelMatrix h = gen_channel(4, 8, stream_seed(seed, 2, 0, 0));
    const std::vector<cplx> s = gen_symbols(4, stream_seed(seed, 2, 0, 1));
    PrecoderConfig cfg;
    cfg.lambda = 0.3;
    cfg.mu = 0.4;
    const RunResult r = run(h, s, cfg, {200, 1e-10, 0.8});
    if (r.diverged) continue;
    const OracleReport o = solve_glse(h, s, cfg);
    const double fg = objective(h, s, cfg, r.x);
    EXPECT_LT((fg - o.objective) / o.objective, 1e-3) << seed;
    EXPECT_GE(fg, o.objective - 1e-9) << seed;
    ++compared;
  }
  EXPECT_GE(compared, 9);
}

TEST(Run, PeakLimitedRespectsPeak) {
  const ChannelMatrix h = gen_channel(8, 16, 5);
  const std::vector<cplx> s = gen_symbols(8, 6);
  PrecoderConfig cfg;
  cfg.lambda = 0.1;
  cfg.mu = 0.1;
  cfg.p_max = 0.2;
  for (double damping : {1.0, 0.8, 0.5}) {
    const RunResult r = run(h, s, cfg, {20, 1e-8, damping});
    for (const cplx& x : r.x) EXPECT_LE(std::norm(x), 0.2);
  }
}

TEST(Run, ConvergedPointIsFixed) {
  const ChannelMatrix h = gen_channel(4, 8, 7);
  const std::vector<cplx> s = gen_symbols(4, 8);
  PrecoderConfig cfg;
  cfg.lambda = 0.3;
  cfg.mu = 0.3;
  const RunResult r = run(h, s, cfg, {500, 1e-10, 0.8});
  ASSERT_TRUE(r.converged);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_LT(r.trace.back().max_update, 1e-10);
  EXPECT_EQ(r.trace.back().iteration, r.iterations);
}

TEST(Run, RejectsBadOptions) {
  const ChannelMatrix h = gen_channel(2, 4, 1);
  const std::vector<cplx> s = gen_symbols(2, 2);
  EXPECT_THROW(run(h, s, PrecoderConfig{}, {0}), InvalidConfig);
  EXPECT_THROW(run(h, s, PrecoderConfig{}, {20, 1e-8, 0.0}), InvalidConfig);
  PrecoderConfig bad;
  bad.lambda = -1.0;
  EXPECT_THROW(run(h, s, bad), InvalidConfig);
}

TEST(Run, DivergenceIsReported) {
  const ChannelMatrix h = gen_channel(4, 8, 3);
  const std::vector<cplx> s = gen_symbols(4, 4);
  PrecoderConfig cfg;
  cfg.lambda = 0.1;
  EngineOptions opt;
  opt.divergence_threshold = 1e-6;
  const RunResult r = run(h, s, cfg, opt);
  EXPECT_TRUE(r.diverged);
  EXPECT_EQ(r.diverged_at, 1);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_FALSE(r.failure.empty());
}

TEST(Trace, CsvFormat) {
  std::vector<TraceRow> rows{{1, 2.5, 0.125, 0}, {2, 2.0, 0.0625, 3}};
  std::ostringstream os;
  write_trace_csv(os, rows);
  EXPECT_EQ(os.str(),
            "iteration,objective,max_update,floor_activations\n1,2.5,0.125,0\n2,2,0.0625,3\n");
}
