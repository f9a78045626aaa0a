// glse: tune penalty weights, precode single instances, run sweeps, and
// self-validate against the reference solver.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "glse/glse.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("GLSE_SEED");
  if (!v || !*v) return std::nullopt;
  return glse::detail::parse_uint("GLSE_SEED", v);
}

glse::PaprXiForm parse_xi_form(const std::string& s) {
  return s == "printed" ? glse::PaprXiForm::Printed : glse::PaprXiForm::Decoupled;
}

glse::InputThreshold parse_input(const std::string& s) {
  return s == "closed" ? glse::InputThreshold::ClosedForm : glse::InputThreshold::Exact;
}

struct TuneArgs {
  std::string mode = "tas";
  double alpha = 0.5;
  double rho = 1.0;
  double p = 0.3;
  double eta = 1.0;
  double papr_db = 3.0;
  std::string papr_xi = "decoupled";
  bool allow_negative_lambda = false;
};

int cmd_tune(const TuneArgs& a) {
  glse::TuningTargets tg;
  tg.p_avg = a.p;
  tg.eta = a.eta;
  tg.rho = a.rho;
  tg.alpha = a.alpha;
  glse::TuningResult r;
  try {
    if (a.mode == "papr") {
      tg.p_max = a.p * db_to_linear(a.papr_db);
      r = glse::solve_papr(tg, parse_xi_form(a.papr_xi), a.allow_negative_lambda);
    } else {
      r = glse::solve_tas(tg, a.allow_negative_lambda);
    }
  } catch (const glse::InvalidConfig& e) {
    std::fprintf(stderr, "invalid targets: %s\n", e.what());
    return kExitInvalid;
  } catch (const glse::InfeasibleTargets& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInvalid;
  } catch (const glse::NoSolution& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInvalid;
  }
  std::printf("lambda = %.17g\nmu = %.17g\nxi = %.17g\ntheta = %.17g\n", r.lambda, r.mu, r.xi,
              r.theta);
  std::printf("residuals = %.3e, %.3e, %.3e\n", r.residuals[0], r.residuals[1], r.residuals[2]);
  if (r.max_residual() >= 1e-10) {
    std::fprintf(stderr, "residual check failed\n");
    return kExitInvalid;
  }
  return 0;
}

struct PrecodeArgs {
  std::size_t k = 4;
  std::size_t n = 8;
  std::uint64_t seed = 1;
  double rho = 1.0;
  double lambda = 0.1;
  double mu = 0.0;
  double p_max = 0.0;  // 0: unbounded
  bool allow_negative_lambda = false;
  int max_iter = 20;
  double tol = 1e-8;
  double damping = 1.0;
  std::string input = "exact";
  std::string trace;
};

int cmd_precode(PrecodeArgs a) {
  if (auto s = env_seed()) a.seed = *s;
  glse::PrecoderConfig cfg;
  cfg.rho = a.rho;
  cfg.lambda = a.lambda;
  cfg.mu = a.mu;
  cfg.allow_negative_lambda = a.allow_negative_lambda;
  if (a.p_max > 0.0) cfg.p_max = a.p_max;
  glse::EngineOptions eo;
  eo.max_iter = a.max_iter;
  eo.tol = a.tol;
  eo.damping = a.damping;
  eo.input = parse_input(a.input);
  try {
    cfg.validate();
    const glse::ChannelMatrix h =
        glse::gen_channel(a.k, a.n, glse::stream_seed(a.seed, 0, 0, 0));
    const std::vector<glse::cplx> s = glse::gen_symbols(a.k, glse::stream_seed(a.seed, 0, 0, 1));
    const glse::RunResult r = glse::run(h, s, cfg, eo);
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      std::printf("x[%zu] = %.17g %+.17gi\n", i, r.x[i].real(), r.x[i].imag());
    }
    std::printf("D = %.17g\nD_db = %.6f\niterations = %d\nconverged = %s\n",
                glse::distortion(h, r.x, s, cfg.rho),
                glse::to_db(glse::distortion(h, r.x, s, cfg.rho)), r.iterations,
                r.converged ? "true" : "false");
    if (r.diverged) std::printf("diverged at %d: %s\n", r.diverged_at, r.failure.c_str());
    if (!a.trace.empty()) {
      std::ofstream os(a.trace);
      if (!os) {
        std::fprintf(stderr, "cannot open %s\n", a.trace.c_str());
        return kExitIo;
      }
      glse::write_trace_csv(os, r.trace);
      if (!os) return kExitIo;
    }
  } catch (const glse::InvalidConfig& e) {
    std::fprintf(stderr, "invalid: %s\n", e.what());
    return kExitInvalid;
  }
  return 0;
}

int cmd_sweep(const std::string& path, const std::string& output_override, unsigned workers) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "cannot read %s\n", path.c_str());
    return kExitIo;
  }
  glse::RunConfig rc;
  try {
    rc = glse::parse_run_config(in);
    if (auto s = env_seed()) rc.spec.seed = *s;
  } catch (const glse::InvalidConfig& e) {
    std::fprintf(stderr, "%s: %s\n", path.c_str(), e.what());
    return kExitInvalid;
  }
  if (!output_override.empty()) rc.output = output_override;
  const std::vector<glse::SweepRow> rows = glse::run_sweep(rc.spec, workers);

  std::ofstream os(rc.output, std::ios::binary);
  if (!os) {
    std::fprintf(stderr, "cannot write %s\n", rc.output.c_str());
    return kExitIo;
  }
  glse::write_sweep_csv(os, rows);
  os.close();
  if (!os) {
    std::fprintf(stderr, "write failed: %s\n", rc.output.c_str());
    return kExitIo;
  }
  for (const glse::SweepRow& r : rows) {
    const auto& p = r.point;
    if (!p.feasible) {
      std::printf("inv_load=%-4g eta=%-4g papr_db=%-4g infeasible: %s\n", p.inv_load, p.eta,
                  p.papr_db, p.note.c_str());
      continue;
    }
    std::printf("inv_load=%-4g eta=%-4g papr_db=%-4g D=%8.3f dB  power=%.4f active=%.4f  "
                "ok=%zu diverged=%zu\n",
                p.inv_load, p.eta, p.papr_db, glse::to_db(r.d_mean), r.power_mean,
                r.active_frac_mean, r.trials_ok, r.trials_diverged);
  }
  return 0;
}

struct ValidateArgs {
  std::size_t cases = 20;
  std::size_t k_max = 8;
  std::size_t n_max = 16;
  std::uint64_t seed = 1;
  std::string input = "exact";
};

int cmd_validate(ValidateArgs a) {
  if (auto s = env_seed()) a.seed = *s;
  if (a.k_max > 16 || a.n_max > 32 || a.k_max < 1 || a.n_max < 2) {
    std::fprintf(stderr, "validate is limited to 1 <= K <= 16 and 2 <= N <= 32\n");
    return kExitFail;
  }
  glse::ValidationOptions vo;
  vo.k_max = a.k_max;
  vo.n_max = a.n_max;
  vo.engine.input = parse_input(a.input);
  double gap = 0.0, out = 0.0, in = 0.0, grad = 0.0;
  std::size_t diverged = 0;
  for (std::size_t i = 0; i < a.cases; ++i) {
    const glse::ValidationCase c = glse::run_validation_case(glse::stream_seed(a.seed, i, 0, 3), vo);
    diverged += c.diverged;
    gap = std::max(gap, c.objective_gap);
    out = std::max(out, c.g_out_err);
    in = std::max(in, c.g_in_err);
    grad = std::max(grad, c.g_in_grad_err);
    if (!c.ok(vo)) {
      std::printf("FAIL case %zu: %s\n  objective_gap=%.3e g_out=%.3e g_in=%.3e grad=%.3e%s\n", i,
                  glse::describe(c).c_str(), c.objective_gap, c.g_out_err, c.g_in_err,
                  c.g_in_grad_err, c.diverged ? " diverged" : "");
      return kExitFail;
    }
  }
  std::printf("cases=%zu diverged=%zu max_objective_gap=%.3e max_g_out_err=%.3e "
              "max_g_in_err=%.3e max_g_in_grad_err=%.3e\n",
              a.cases, diverged, gap, out, in, grad);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GLSE precoding via generalized approximate message passing"};
  app.require_subcommand(1);

  TuneArgs ta;
  CLI::App* tune = app.add_subcommand("tune", "solve the tuning equations for (lambda, mu)");
  tune->add_option("--mode", ta.mode, "tas or papr")->check(CLI::IsMember({"tas", "papr"}));
  tune->add_option("--alpha", ta.alpha, "load K/N");
  tune->add_option("--rho", ta.rho, "power control factor");
  tune->add_option("--p", ta.p, "average power per antenna");
  tune->add_option("--eta", ta.eta, "fraction of active antennas");
  tune->add_option("--papr-db", ta.papr_db, "peak-to-average power ratio in dB (papr mode)");
  tune->add_option("--papr-xi", ta.papr_xi, "printed or decoupled")
      ->check(CLI::IsMember({"printed", "decoupled"}));
  tune->add_flag("--allow-negative-lambda", ta.allow_negative_lambda);

  PrecodeArgs pa;
  CLI::App* precode = app.add_subcommand("precode", "precode one random instance");
  precode->add_option("--k", pa.k, "users")->check(CLI::PositiveNumber);
  precode->add_option("--n", pa.n, "antennas")->check(CLI::PositiveNumber);
  precode->add_option("--seed", pa.seed);
  precode->add_option("--rho", pa.rho);
  precode->add_option("--lambda", pa.lambda);
  precode->add_option("--mu", pa.mu);
  precode->add_option("--p-max", pa.p_max, "peak power; 0 for unbounded support");
  precode->add_flag("--allow-negative-lambda", pa.allow_negative_lambda);
  precode->add_option("--max-iter", pa.max_iter);
  precode->add_option("--tol", pa.tol);
  precode->add_option("--damping", pa.damping);
  precode->add_option("--input-threshold", pa.input, "exact or closed")
      ->check(CLI::IsMember({"exact", "closed"}));
  precode->add_option("--trace", pa.trace, "write the per-iteration trace CSV here");

  std::string cfg_path, out_override;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  CLI::App* sweep = app.add_subcommand("sweep", "run an experiment grid and write CSV");
  sweep->add_option("config", cfg_path, "experiment config file")->required();
  sweep->add_option("--output", out_override, "override [output] path");
  sweep->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  ValidateArgs va;
  CLI::App* validate = app.add_subcommand("validate", "check GAMP and thresholding against references");
  validate->add_option("--cases", va.cases);
  validate->add_option("--k-max", va.k_max);
  validate->add_option("--n-max", va.n_max);
  validate->add_option("--seed", va.seed);
  validate->add_option("--input-threshold", va.input, "exact or closed")
      ->check(CLI::IsMember({"exact", "closed"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*tune) return cmd_tune(ta);
    if (*precode) return cmd_precode(pa);
    if (*sweep) return cmd_sweep(cfg_path, out_override, workers);
    if (*validate) return cmd_validate(va);
  } catch (const glse::InvalidConfig& e) {
    std::fprintf(stderr, "invalid: %s\n", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
  return 0;
}
