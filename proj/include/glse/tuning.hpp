#pragma once

// Replica-based tuning of the penalty weights. The large-system precoder
// decouples into a scalar problem x = argmin |v - s0|^2 + xi u(v) with
// s0 ~ CN(0, sigma^2); matching E f_j(x) to constraint targets fixes (lambda,
// mu). For the i.i.d. Rayleigh ensemble the fixed point reduces to the closed
// systems solved by solve_tas and solve_papr.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "glse/config.hpp"
#include "glse/errors.hpp"
#include "glse/oracle.hpp"

namespace glse {

/// exp(-x^2 / lam)
inline double phi_tilde(double x, double lam) { return std::exp(-x * x / lam); }

/// (1/lam) * integral_x^inf exp(-t^2/lam) dt
inline double q_tilde(double x, double lam) {
  return 0.5 * std::sqrt(std::numbers::pi / lam) * std::erfc(x / std::sqrt(lam));
}

/// R-transform of the limiting eigenvalue law of H^H H.
using RTransform = std::function<double(double)>;

inline double rayleigh_r_transform(double omega, double alpha) {
  if (omega == 1.0) throw PoleAtOne("Rayleigh R-transform has a pole at omega = 1");
  return alpha / (1.0 - omega);
}

inline RTransform rayleigh_r(double alpha) {
  return [alpha](double omega) { return rayleigh_r_transform(omega, alpha); };
}

struct TuningTargets {
  double p_avg = 0.0;
  double eta = 1.0;
  std::optional<double> p_max;
  double rho = 1.0;
  double alpha = 0.5;

  double theta() const { return (rho + p_avg) / alpha; }

  void validate() const {
    if (!(p_avg > 0.0 && std::isfinite(p_avg))) throw InvalidConfig("target power P must be > 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidConfig("active fraction eta must lie in (0, 1]");
    if (!(rho >= 0.0 && std::isfinite(rho))) throw InvalidConfig("rho must be >= 0");
    if (!(alpha > 0.0 && std::isfinite(alpha))) throw InvalidConfig("load alpha must be > 0");
    if (p_max && !(*p_max > p_avg)) throw InvalidConfig("p_max must exceed the average power P");
  }
};

struct TuningResult {
  double lambda = 0.0;
  double mu = 0.0;
  double xi = 0.0;
  double theta = 0.0;
  // |lhs - rhs| of the activity, power and xi equations, in that order.
  std::array<double, 3> residuals{};

  double max_residual() const {
    return std::max({residuals[0], residuals[1], residuals[2]});
  }
};

/// Form of the bracket in the peak-limited xi equation.
enum class PaprXiForm {
  // Delta1 - 2 a Delta2, the same bracket as the power equation.
  Printed,
  // Delta1 - a Delta2 + b sqrt(P_max) Q(a + b sqrt(P_max)): E Re{x* s0} of the
  // clipped scalar model, which matches the antenna-selection equation as
  // P_max grows.
  Decoupled,
};

namespace detail {

inline double threshold_level(double theta, double eta) {
  // phi_tilde(a; theta) = eta
  return eta >= 1.0 ? 0.0 : std::sqrt(theta * std::log(1.0 / eta));
}

inline TuningResult finish_tuning(double a, double b, double bracket_xi, double alpha,
                                  double theta, bool allow_negative_lambda) {
  const double denom = alpha - bracket_xi / b;
  if (!(denom > 0.0)) {
    throw NoSolution("xi equation has no positive root: alpha <= bracket / (1 + 2 xi lambda)");
  }
  TuningResult r;
  r.theta = theta;
  r.xi = 1.0 / (2.0 * denom);
  r.lambda = (b - 1.0) / (2.0 * r.xi);
  r.mu = a / r.xi;
  if (r.lambda < 0.0 && !allow_negative_lambda) {
    throw InfeasibleTargets(
        "power equation needs lambda < 0: target power exceeds what lambda >= 0 delivers");
  }
  return r;
}

}  // namespace detail

/// Antenna selection on the complex plane: solves
///   phi(xi mu; theta) = eta,
///   (1 + 2 xi lambda)^2 = theta/P [eta - 2 xi mu Q(xi mu; theta)],
///   alpha xi = 1/2 + xi/(1 + 2 xi lambda) [eta - xi mu Q(xi mu; theta)].
/// The first equation fixes a = xi mu, the second b = 1 + 2 xi lambda, and the
/// third is then linear in xi.
inline TuningResult solve_tas(const TuningTargets& tg, bool allow_negative_lambda = false) {
  tg.validate();
  if (tg.p_max) throw InvalidConfig("solve_tas: use solve_papr for peak-limited targets");
  const double theta = tg.theta();
  const double a = detail::threshold_level(theta, tg.eta);
  const double qa = q_tilde(a, theta);
  const double power_bracket = tg.eta - 2.0 * a * qa;
  if (!(power_bracket > 0.0)) {
    throw InfeasibleTargets("power equation: right-hand side is non-positive");
  }
  const double b = std::sqrt(theta / tg.p_avg * power_bracket);
  const double xi_bracket = tg.eta - a * qa;
  TuningResult r = detail::finish_tuning(a, b, xi_bracket, tg.alpha, theta, allow_negative_lambda);

  const double am = r.xi * r.mu;
  const double bm = 1.0 + 2.0 * r.xi * r.lambda;
  const double q = q_tilde(am, theta);
  r.residuals[0] = std::abs(phi_tilde(am, theta) - tg.eta);
  r.residuals[1] = std::abs(bm * bm - theta / tg.p_avg * (tg.eta - 2.0 * am * q));
  r.residuals[2] = std::abs(tg.alpha * r.xi - 0.5 - r.xi / bm * (tg.eta - am * q));
  return r;
}

namespace detail {

struct PaprBrackets {
  double power;  // Delta1 - 2 a Delta2
  double xi;
};

inline PaprBrackets papr_brackets(double a, double b, double theta, double p_max,
                                  PaprXiForm form) {
  const double c = a + b * std::sqrt(p_max);
  const double d1 = -phi_tilde(a, theta) * std::expm1(-(c * c - a * a) / theta);
  const double qc = q_tilde(c, theta);
  const double d2 = q_tilde(a, theta) - qc;
  const double power = d1 - 2.0 * a * d2;
  const double xi = form == PaprXiForm::Printed ? power : d1 - a * d2 + (c - a) * qc;
  return {power, xi};
}

}  // namespace detail

/// Peak-limited support: same activity equation, with Delta1/Delta2 in place
/// of the unclipped moments. The power equation is one-dimensional in
/// b = 1 + 2 xi lambda and is solved by bracketing; xi then follows in
/// closed form.
inline TuningResult solve_papr(const TuningTargets& tg, PaprXiForm form = PaprXiForm::Printed,
                               bool allow_negative_lambda = false) {
  tg.validate();
  if (!tg.p_max) throw InvalidConfig("solve_papr: targets need p_max");
  const double theta = tg.theta();
  const double p_max = *tg.p_max;
  const double a = detail::threshold_level(theta, tg.eta);
  auto gap = [&](double b) {
    return b * b - theta / tg.p_avg * detail::papr_brackets(a, b, theta, p_max, form).power;
  };

  const double unclipped = tg.eta - 2.0 * a * q_tilde(a, theta);
  if (!(unclipped > 0.0)) throw InfeasibleTargets("power equation: right-hand side is non-positive");
  // The clipped bracket never exceeds the unclipped one, so the root lies
  // below the antenna-selection value of b.
  const double b_hi = std::sqrt(theta / tg.p_avg * unclipped) * (1.0 + 1e-12) + 1e-12;
  double b_lo = allow_negative_lambda ? b_hi * 1e-3 : 1.0;
  if (b_lo >= b_hi || gap(b_lo) > 0.0) {
    throw InfeasibleTargets(
        "power equation: peak power too small to carry the average power P with lambda >= 0");
  }
  // Locate the first sign change on a geometric grid, then bisect.
  constexpr int kScan = 400;
  double lo = b_lo, hi = b_hi;
  const double ratio = std::pow(b_hi / b_lo, 1.0 / kScan);
  double prev = b_lo;
  for (int i = 1; i <= kScan; ++i) {
    const double cur = i == kScan ? b_hi : b_lo * std::pow(ratio, i);
    if (gap(cur) > 0.0) {
      lo = prev;
      hi = cur;
      break;
    }
    prev = cur;
  }
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gap(mid) > 0.0 ? hi : lo) = mid;
  }
  const double b = std::abs(gap(lo)) <= std::abs(gap(hi)) ? lo : hi;

  const detail::PaprBrackets br = detail::papr_brackets(a, b, theta, p_max, form);
  TuningResult r = detail::finish_tuning(a, b, br.xi, tg.alpha, theta, allow_negative_lambda);

  const double am = r.xi * r.mu;
  const double bm = 1.0 + 2.0 * r.xi * r.lambda;
  const detail::PaprBrackets chk = detail::papr_brackets(am, bm, theta, p_max, form);
  r.residuals[0] = std::abs(phi_tilde(am, theta) - tg.eta);
  r.residuals[1] = std::abs(bm * bm - theta / tg.p_avg * chk.power);
  r.residuals[2] = std::abs(tg.alpha * r.xi - 0.5 - r.xi / bm * chk.xi);
  return r;
}

// ---------------------------------------------------------------------------
// General decoupled model

/// Constraint functional f(x, s0) evaluated on the scalar model. Must be
/// invariant under a common rotation of x and s0 (all of |x|^2, 1{x != 0},
/// Re{x* s0} are).
using DecoupledFunctional = std::function<double(std::complex<double>, std::complex<double>)>;

enum class ExpectationMethod { Quadrature, MonteCarlo };

struct DecoupledOptions {
  double lambda_s = std::numeric_limits<double>::quiet_NaN();  // NaN: use rho
  ExpectationMethod method = ExpectationMethod::Quadrature;
  std::size_t mc_samples = 10'000'000;
  std::uint64_t mc_seed = 0x5eed'0fde'c0de'd001ULL;
  int max_iter = 10'000;
  double damping = 0.5;
  double tol = 1e-10;
};

struct DecoupledModel {
  double xi = 0.0;      // 1 / R(-chi), the weight in argmin |v - s0|^2 + xi u(v)
  double sigma2 = 0.0;  // variance of s0
  double chi = 0.0;
  double p = 0.0;       // E|x|^2
  std::array<double, 2> residuals{};  // |p - E|x|^2|, |sigma2 chi / xi - E Re{x* s0}|
  int iterations = 0;
};

struct DecoupledSolution {
  DecoupledModel model;
  std::vector<double> expectations;  // E f_j(x), one per functional
};

/// Solution of the scalar problem argmin_{v in X} |v - s0|^2 + xi u(v).
inline std::complex<double> decoupled_estimate(std::complex<double> s0, double xi,
                                               const PrecoderConfig& penalty) {
  return prox_penalty(s0, 0.5 * xi, penalty);
}

/// E f_j(x) for s0 ~ CN(0, sigma2). Quadrature integrates along the radius
/// (the functionals are rotation invariant) with adaptive Gauss-Kronrod,
/// split at the radii where the scalar estimate changes branch.
inline std::vector<double> decoupled_expectations(const PrecoderConfig& penalty, double xi,
                                                  double sigma2,
                                                  const std::vector<DecoupledFunctional>& fs,
                                                  const DecoupledOptions& opt = {}) {
  std::vector<double> out(fs.size(), 0.0);
  if (opt.method == ExpectationMethod::MonteCarlo) {
    std::mt19937_64 rng(opt.mc_seed);
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * sigma2));
    for (std::size_t i = 0; i < opt.mc_samples; ++i) {
      const std::complex<double> s0(nd(rng), nd(rng));
      const std::complex<double> x = decoupled_estimate(s0, xi, penalty);
      for (std::size_t j = 0; j < fs.size(); ++j) out[j] += fs[j](x, s0);
    }
    for (double& v : out) v /= static_cast<double>(opt.mc_samples);
    return out;
  }

  // |x| = (|s0| - xi mu / 2)_+ / (1 + xi lambda), clipped at sqrt(p_max).
  std::vector<double> breaks;  // in v = |s0|^2 / sigma2
  const double r_thr = 0.5 * xi * penalty.mu;
  if (r_thr > 0.0) breaks.push_back(r_thr * r_thr / sigma2);
  if (penalty.p_max) {
    const double r_clip = (1.0 + xi * penalty.lambda) * std::sqrt(*penalty.p_max) + r_thr;
    breaks.push_back(r_clip * r_clip / sigma2);
  }
  std::sort(breaks.begin(), breaks.end());

  using boost::math::quadrature::gauss_kronrod;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    auto integrand = [&](double v) {
      const double r = std::sqrt(sigma2 * v);
      const std::complex<double> s0(r, 0.0);
      return fs[j](decoupled_estimate(s0, xi, penalty), s0) * std::exp(-v);
    };
    double acc = 0.0;
    double lo = 0.0;
    for (double bk : breaks) {
      if (bk > lo) acc += gauss_kronrod<double, 61>::integrate(integrand, lo, bk, 15, 1e-14);
      lo = std::max(lo, bk);
    }
    acc += gauss_kronrod<double, 61>::integrate(integrand, lo,
                                                std::numeric_limits<double>::infinity(), 15,
                                                1e-14);
    out[j] = acc;
  }
  return out;
}

/// Damped fixed-point iteration on (chi, p):
///   xi = 1/R(-chi),
///   sigma2 = R(-chi)^{-2} d/dchi[(lambda_s chi - p) R(-chi)],
///   p = E|x|^2,  sigma2 chi / xi = E Re{x* s0}.
inline DecoupledSolution decoupled_solve(const PrecoderConfig& penalty, const RTransform& rt,
                                         double rho,
                                         const std::vector<DecoupledFunctional>& constraints,
                                         const DecoupledOptions& opt = {}) {
  const double lambda_s = std::isnan(opt.lambda_s) ? rho : opt.lambda_s;
  const std::vector<DecoupledFunctional> moments = {
      [](std::complex<double> x, std::complex<double>) { return std::norm(x); },
      [](std::complex<double> x, std::complex<double> s0) { return (std::conj(x) * s0).real(); },
  };
  auto sigma2_at = [&](double chi, double p) {
    const double r = rt(-chi);
    const double h = 1e-5 * (1.0 + chi);
    auto g = [&](double c) { return (lambda_s * c - p) * rt(-c); };
    return (g(chi + h) - g(chi - h)) / (2.0 * h) / (r * r);
  };

  double chi = 1.0;
  double p = std::max(rho, 1e-3);
  DecoupledModel m;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const double xi = 1.0 / rt(-chi);
    const double sigma2 = sigma2_at(chi, p);
    if (!(xi > 0.0 && sigma2 > 0.0 && std::isfinite(xi) && std::isfinite(sigma2))) {
      throw NoConvergence("decoupled_solve: fixed point left the admissible region");
    }
    const std::vector<double> e = decoupled_expectations(penalty, xi, sigma2, moments, opt);
    const double chi_new = xi * e[1] / sigma2;
    m = {xi, sigma2, chi, p, {std::abs(p - e[0]), std::abs(sigma2 * chi / xi - e[1])}, it};
    if (m.residuals[0] < opt.tol && m.residuals[1] < opt.tol) {
      DecoupledSolution sol{m, decoupled_expectations(penalty, xi, sigma2, constraints, opt)};
      return sol;
    }
    chi = (1.0 - opt.damping) * chi + opt.damping * chi_new;
    p = (1.0 - opt.damping) * p + opt.damping * e[0];
  }
  throw NoConvergence("decoupled_solve: no convergence within the iteration budget");
}

}  // namespace glse
