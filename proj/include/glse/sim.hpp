#pragma once

// Monte-Carlo sweeps over (load, activity, PAPR) grids. Each trial draws its
// own RNG streams from (seed, load index, trial index), so the output does not
// depend on the number of worker threads. Grid points that share a load reuse
// the same channels and symbols, which keeps curve-to-curve comparisons free
// of channel noise.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "glse/channel.hpp"
#include "glse/config.hpp"
#include "glse/errors.hpp"
#include "glse/gamp.hpp"
#include "glse/tuning.hpp"

namespace glse {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for an independent stream identified by (seed, a, b, c).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  std::uint64_t st = seed;
  std::uint64_t h = splitmix64(st);
  for (std::uint64_t v : {a, b, c}) {
    st = h ^ v;
    h = splitmix64(st);
  }
  return h;
}

namespace detail {

inline cplx draw_cn(std::mt19937_64& rng, double variance) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * variance));
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

}  // namespace detail

/// i.i.d. CN(0, 1/N) entries.
inline ChannelMatrix gen_channel(std::size_t k, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<cplx> e(k * n);
  const double var = 1.0 / static_cast<double>(n);
  for (cplx& v : e) v = detail::draw_cn(rng, var);
  return ChannelMatrix(k, n, std::move(e));
}

/// i.i.d. CN(0, 1) symbols.
inline std::vector<cplx> gen_symbols(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<cplx> s(k);
  for (cplx& v : s) v = detail::draw_cn(rng, 1.0);
  return s;
}

/// (1/K) ||H x - sqrt(rho) s||^2
inline double distortion(const ChannelMatrix& h, std::span<const cplx> x, std::span<const cplx> s,
                         double rho) {
  if (x.size() != h.n_antennas() || s.size() != h.k_users()) {
    throw InvalidConfig("distortion: dimension mismatch");
  }
  const std::vector<cplx> hx = h.apply(x);
  const double sr = std::sqrt(rho);
  double acc = 0.0;
  for (std::size_t k = 0; k < hx.size(); ++k) acc += std::norm(hx[k] - sr * s[k]);
  return acc / static_cast<double>(h.k_users());
}

inline double to_db(double v) { return 10.0 * std::log10(v); }

struct TrialResult {
  double distortion = 0.0;
  double distortion_db = 0.0;
  double avg_power = 0.0;
  double active_fraction = 0.0;
  double papr_emp = 0.0;
  double peak_power = 0.0;  // max_n |x_n|^2
  int iterations = 0;
  bool diverged = false;
};

inline TrialResult evaluate_trial(const ChannelMatrix& h, std::span<const cplx> s,
                                  const PrecoderConfig& cfg, const RunResult& run,
                                  double activity_eps) {
  TrialResult t;
  t.iterations = run.iterations;
  t.diverged = run.diverged;
  const std::size_t n = h.n_antennas();
  double pow = 0.0;
  std::size_t active = 0;
  for (const cplx& v : run.x) {
    const double m2 = std::norm(v);
    pow += m2;
    t.peak_power = std::max(t.peak_power, m2);
    if (std::sqrt(m2) > activity_eps) ++active;
  }
  t.avg_power = pow / static_cast<double>(n);
  t.active_fraction = static_cast<double>(active) / static_cast<double>(n);
  t.papr_emp = t.avg_power > 0.0 ? t.peak_power / t.avg_power : 0.0;
  if (std::all_of(run.x.begin(), run.x.end(),
                  [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); })) {
    t.distortion = distortion(h, run.x, s, cfg.rho);
  } else {
    t.distortion = std::numeric_limits<double>::infinity();
    t.diverged = true;
  }
  t.distortion_db = to_db(t.distortion);
  return t;
}

struct ExperimentSpec {
  std::size_t n_antennas = 64;
  std::vector<double> inv_load{2.0};
  double rho = 1.0;
  double p_avg = 0.3;
  std::vector<double> eta{1.0};
  // Target PAPR in dB; +inf means unbounded support. Values <= 0 dB use
  // p_max = P with no penalty (constant-envelope bound).
  std::vector<double> papr_db{std::numeric_limits<double>::infinity()};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  EngineOptions engine{};
  PaprXiForm papr_xi = PaprXiForm::Decoupled;
  bool allow_negative_lambda = false;

  void validate() const {
    if (n_antennas < 1) throw InvalidConfig("n_antennas must be >= 1");
    if (trials < 1) throw InvalidConfig("trials must be >= 1");
    if (!(rho >= 0.0 && std::isfinite(rho))) throw InvalidConfig("rho must be >= 0");
    if (!(p_avg > 0.0 && std::isfinite(p_avg))) throw InvalidConfig("p_avg must be > 0");
    for (double a : inv_load) {
      if (!(a > 0.0 && std::isfinite(a))) throw InvalidConfig("inv_load entries must be > 0");
      if (std::llround(static_cast<double>(n_antennas) / a) < 1) {
        throw InvalidConfig("inv_load too large: no users left");
      }
    }
    for (double e : eta) {
      if (!(e > 0.0 && e <= 1.0)) throw InvalidConfig("eta entries must lie in (0, 1]");
    }
    for (double d : papr_db) {
      if (std::isnan(d) || d == -std::numeric_limits<double>::infinity()) {
        throw InvalidConfig("papr_db entries must be finite or inf");
      }
    }
    if (engine.max_iter < 1) throw InvalidConfig("max_iter must be >= 1");
    if (!(engine.damping > 0.0 && engine.damping <= 1.0)) {
      throw InvalidConfig("damping must be in (0, 1]");
    }
    if (!(engine.tol >= 0.0)) throw InvalidConfig("tol must be >= 0");
  }
};

struct GridPoint {
  std::size_t load_index = 0;
  double inv_load = 0.0;
  std::size_t k_users = 0;
  double alpha = 0.0;  // realized K/N
  double eta = 1.0;
  double papr_db = std::numeric_limits<double>::infinity();
  bool feasible = false;
  std::string note;
  PrecoderConfig cfg;
  TuningResult tuning;
};

struct SweepRow {
  GridPoint point;
  std::size_t trials_ok = 0;
  std::size_t trials_diverged = 0;
  double d_mean = std::numeric_limits<double>::quiet_NaN();
  double d_stderr = std::numeric_limits<double>::quiet_NaN();
  double d_mean_all = std::numeric_limits<double>::quiet_NaN();  // diverged trials included
  double power_mean = std::numeric_limits<double>::quiet_NaN();
  double active_frac_mean = std::numeric_limits<double>::quiet_NaN();
  double papr_emp_mean = std::numeric_limits<double>::quiet_NaN();
  double peak_power_max = 0.0;  // over all trials, diverged or not
  double iterations_mean = std::numeric_limits<double>::quiet_NaN();
};

/// Tunes one grid point. Infeasible targets are reported, not thrown.
inline GridPoint tune_point(const ExperimentSpec& spec, std::size_t load_index, double eta,
                            double papr_db) {
  GridPoint g;
  g.load_index = load_index;
  const double inv_load = spec.inv_load.at(load_index);
  g.inv_load = inv_load;
  g.k_users = static_cast<std::size_t>(std::llround(static_cast<double>(spec.n_antennas) / inv_load));
  g.alpha = static_cast<double>(g.k_users) / static_cast<double>(spec.n_antennas);
  g.eta = eta;
  g.papr_db = papr_db;
  g.cfg.rho = spec.rho;
  g.cfg.allow_negative_lambda = spec.allow_negative_lambda;
  TuningTargets tg;
  tg.p_avg = spec.p_avg;
  tg.eta = eta;
  tg.rho = spec.rho;
  tg.alpha = g.alpha;
  try {
    if (std::isinf(papr_db)) {
      g.tuning = solve_tas(tg, spec.allow_negative_lambda);
    } else if (papr_db <= 0.0) {
      g.cfg.p_max = spec.p_avg;
      g.feasible = true;
      g.note = "peak-only";
      return g;
    } else {
      tg.p_max = spec.p_avg * std::pow(10.0, papr_db / 10.0);
      g.cfg.p_max = tg.p_max;
      g.tuning = solve_papr(tg, spec.papr_xi, spec.allow_negative_lambda);
    }
    g.cfg.lambda = g.tuning.lambda;
    g.cfg.mu = g.tuning.mu;
    g.feasible = true;
  } catch (const InfeasibleTargets& e) {
    g.note = e.what();
  } catch (const NoSolution& e) {
    g.note = e.what();
  }
  return g;
}

inline std::vector<GridPoint> build_grid(const ExperimentSpec& spec) {
  std::vector<GridPoint> grid;
  for (std::size_t a = 0; a < spec.inv_load.size(); ++a) {
    for (double e : spec.eta) {
      for (double d : spec.papr_db) grid.push_back(tune_point(spec, a, e, d));
    }
  }
  return grid;
}

inline TrialResult run_trial(const ExperimentSpec& spec, const GridPoint& g,
                             std::size_t trial_index) {
  const std::uint64_t li = g.load_index;
  const ChannelMatrix h =
      gen_channel(g.k_users, spec.n_antennas, stream_seed(spec.seed, li, trial_index, 0));
  const std::vector<cplx> s = gen_symbols(g.k_users, stream_seed(spec.seed, li, trial_index, 1));
  const RunResult r = run(h, s, g.cfg, spec.engine);
  return evaluate_trial(h, s, g.cfg, r, 1e-6 * std::sqrt(spec.p_avg));
}

inline SweepRow aggregate(const GridPoint& g, std::span<const TrialResult> trials) {
  SweepRow row;
  row.point = g;
  double d = 0.0, d2 = 0.0, d_all = 0.0, pw = 0.0, af = 0.0, pe = 0.0, it = 0.0;
  for (const TrialResult& t : trials) {
    row.peak_power_max = std::max(row.peak_power_max, t.peak_power);
    d_all += t.distortion;
    if (t.diverged) {
      ++row.trials_diverged;
      continue;
    }
    ++row.trials_ok;
    d += t.distortion;
    d2 += t.distortion * t.distortion;
    pw += t.avg_power;
    af += t.active_fraction;
    pe += t.papr_emp;
    it += t.iterations;
  }
  if (!trials.empty()) row.d_mean_all = d_all / static_cast<double>(trials.size());
  if (row.trials_ok > 0) {
    const double m = static_cast<double>(row.trials_ok);
    row.d_mean = d / m;
    row.d_stderr = row.trials_ok > 1
                       ? std::sqrt(std::max(0.0, (d2 - m * row.d_mean * row.d_mean) / (m - 1.0)) / m)
                       : 0.0;
    row.power_mean = pw / m;
    row.active_frac_mean = af / m;
    row.papr_emp_mean = pe / m;
    row.iterations_mean = it / m;
  }
  return row;
}

/// Runs every feasible grid point for spec.trials trials on `workers` threads.
inline std::vector<SweepRow> run_sweep(const ExperimentSpec& spec, unsigned workers = 1) {
  spec.validate();
  const std::vector<GridPoint> grid = build_grid(spec);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].feasible) active.push_back(i);
  }
  const std::size_t total = active.size() * spec.trials;
  std::vector<TrialResult> results(total);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < total; j = next++) {
      const std::size_t gi = active[j / spec.trials];
      results[j] = run_trial(spec, grid[gi], j % spec.trials);
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1 || total <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  std::vector<SweepRow> rows;
  std::size_t a = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].feasible) {
      rows.push_back(aggregate(grid[i], std::span(results).subspan(a * spec.trials, spec.trials)));
      ++a;
    } else {
      SweepRow r;
      r.point = grid[i];
      r.point.cfg.lambda = std::numeric_limits<double>::quiet_NaN();
      r.point.cfg.mu = std::numeric_limits<double>::quiet_NaN();
      rows.push_back(r);
    }
  }
  return rows;
}

inline constexpr const char* kSweepCsvHeader =
    "inv_load,eta_target,papr_target_db,lambda,mu,trials_ok,trials_diverged,D_mean,D_db,"
    "D_stderr,power_mean,active_frac_mean,papr_emp_mean";

namespace detail {

inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << kSweepCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    const auto& p = r.point;
    os << detail::fmt_num(p.inv_load) << ',' << detail::fmt_num(p.eta) << ','
       << detail::fmt_num(p.papr_db) << ',' << detail::fmt_num(p.cfg.lambda) << ','
       << detail::fmt_num(p.cfg.mu) << ',' << r.trials_ok << ',' << r.trials_diverged << ','
       << detail::fmt_num(r.d_mean) << ',' << detail::fmt_num(to_db(r.d_mean)) << ','
       << detail::fmt_num(r.d_stderr) << ',' << detail::fmt_num(r.power_mean) << ','
       << detail::fmt_num(r.active_frac_mean) << ',' << detail::fmt_num(r.papr_emp_mean) << '\n';
  }
}

}  // namespace glse
