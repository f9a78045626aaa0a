#pragma once

// The GLSE-GAMP iteration on the 2-D real augmentation of a complex channel.
// One sweep runs the user (output) phase for every k followed by the antenna
// (input) phase for every n; both phases cost O(KN) constant-size block work.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "glse/aug.hpp"
#include "glse/channel.hpp"
#include "glse/config.hpp"
#include "glse/errors.hpp"
#include "glse/thresholding.hpp"

namespace glse {

struct GampState {
  int t = 1;
  std::vector<AugPair> x;
  std::vector<SpdMat2> r_x;
  std::vector<AugPair> y;
  std::vector<SpdMat2> r_y;
  std::vector<AugPair> w;
  std::vector<AugPair> z;
  std::vector<SpdMat2> r_w;
  // Clamp events on R^w (A1) and on the matrix inverted in A6. R^x blocks of
  // inactive antennas are zero by construction and floored without counting.
  std::size_t floor_activations = 0;
  double last_update = 0.0;    // max_n |x_n(t+1) - x_n(t)| of the latest sweep
  double last_y_update = 0.0;  // max_k |y_k(t) - y_k(t-1)|
};

struct EngineOptions {
  int max_iter = 20;
  double tol = 1e-8;
  double damping = 1.0;
  double divergence_threshold = 1e9;
  InputThreshold input = InputThreshold::Exact;
};

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double max_update = 0.0;
  std::size_t floor_activations = 0;
};

struct RunResult {
  std::vector<cplx> x;
  std::vector<TraceRow> trace;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  int diverged_at = 0;
  std::string failure;
  std::size_t floor_activations = 0;
};

inline GampState init_state(const ChannelMatrix& h, const PrecoderConfig& cfg) {
  cfg.validate();
  const std::size_t k = h.k_users();
  const std::size_t n = h.n_antennas();
  GampState st;
  st.t = 1;
  st.x.assign(n, AugPair{});
  // Inverse Hessian of lambda|x|^2 at the origin; the mu|x| term has none.
  const double rx = cfg.lambda > 0.0 ? 1.0 / (2.0 * cfg.lambda) : 1.0;
  st.r_x.assign(n, SpdMat2::scalar(rx));
  st.y.assign(k, AugPair{});
  st.r_y.assign(k, SpdMat2{});
  st.w.assign(k, AugPair{});
  st.z.assign(k, AugPair{});
  st.r_w.assign(k, SpdMat2{});
  return st;
}

/// One pass of the output phase (A1-A5) and input phase (A6-A9). `damping`
/// is the weight on the new x and y iterates.
inline GampState sweep(GampState st, const ChannelMatrix& h, std::span<const cplx> s,
                       const PrecoderConfig& cfg, double damping = 1.0,
                       double divergence_threshold = 1e9,
                       InputThreshold input = InputThreshold::Exact) {
  const std::size_t kk = h.k_users();
  const std::size_t nn = h.n_antennas();
  if (s.size() != kk || st.x.size() != nn || st.y.size() != kk) {
    throw InvalidConfig("sweep: dimension mismatch");
  }
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidConfig("damping must be in (0, 1]");

  double max_y_update = 0.0;
  for (std::size_t k = 0; k < kk; ++k) {
    const std::span<const cplx> row = h.row(k);
    Mat2 rw{};
    AugPair z{};
    for (std::size_t n = 0; n < nn; ++n) {
      const Mat2 q = augment_complex(row[n]);
      rw += q * st.r_x[n].mat() * q.transpose();
      z += aug_mul(row[n], st.x[n]);
    }
    bool clamped = false;
    st.r_w[k] = SpdMat2::regularized(rw, &clamped);
    st.floor_activations += clamped;
    st.z[k] = z;
    st.w[k] = z - st.r_w[k].mat() * st.y[k];
    const OutputResult out = g_out_closed(st.w[k], AugPair(s[k]), st.r_w[k], cfg.rho);
    const AugPair yk = damping * out.y + (1.0 - damping) * st.y[k];
    max_y_update = std::max(max_y_update, (yk - st.y[k]).norm());
    st.y[k] = yk;
    st.r_y[k] = out.r_y;
  }

  double max_update = 0.0;
  double max_norm = 0.0;
  for (std::size_t n = 0; n < nn; ++n) {
    Mat2 acc{};
    AugPair v{};
    for (std::size_t k = 0; k < kk; ++k) {
      const cplx hk = h(k, n);
      const Mat2 q = augment_complex(hk);
      acc += q.transpose() * st.r_y[k].mat() * q;
      v += aug_mul_transpose(hk, st.y[k]);
    }
    bool clamped = false;
    const SpdMat2 prec = SpdMat2::regularized(acc, &clamped);
    st.floor_activations += clamped;
    const SpdMat2 ru = spd_inverse(prec);
    const AugPair u = st.x[n] + ru.mat() * v;
    const InputResult in = g_in(u, ru, cfg, input);
    AugPair xn = damping * in.x + (1.0 - damping) * st.x[n];
    if (cfg.p_max && xn.norm2() > *cfg.p_max) xn = radial_clip(xn, *cfg.p_max);
    max_update = std::max(max_update, (xn - st.x[n]).norm());
    st.x[n] = xn;
    st.r_x[n] = SpdMat2::regularized(in.g * ru.mat());
    const double mag = xn.norm();
    if (!std::isfinite(mag)) max_norm = mag;
    else max_norm = std::max(max_norm, mag);
  }
  st.last_update = max_update;
  st.last_y_update = max_y_update;
  ++st.t;
  if (!std::isfinite(max_norm) || max_norm > divergence_threshold) {
    throw Divergence("GAMP iterate norm exceeded the divergence threshold", st.t - 1);
  }
  return st;
}

inline std::vector<cplx> to_complex(std::span<const AugPair> v) {
  std::vector<cplx> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].to_complex();
  return out;
}

/// Runs up to `max_iter` sweeps, stopping early once the largest per-antenna
/// update and the largest per-user y update both fall below `tol`. Divergence is reported, not thrown; the trace up
/// to the failing sweep is kept.
inline RunResult run(const ChannelMatrix& h, std::span<const cplx> s, const PrecoderConfig& cfg,
                     const EngineOptions& opt = {}) {
  if (opt.max_iter < 1) throw InvalidConfig("max_iter must be >= 1");
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw InvalidConfig("damping must be in (0, 1]");
  GampState st = init_state(h, cfg);
  RunResult res;
  for (int it = 1; it <= opt.max_iter; ++it) {
    try {
      // Copy in so the last good iterate survives a throwing sweep.
      st = sweep(st, h, s, cfg, opt.damping, opt.divergence_threshold, opt.input);
    } catch (const Divergence& e) {
      res.diverged = true;
      res.diverged_at = it;
      res.failure = e.what();
      break;
    } catch (const NonInvertible& e) {
      res.diverged = true;
      res.diverged_at = it;
      res.failure = e.what();
      break;
    }
    res.iterations = it;
    const std::vector<cplx> xc = to_complex(st.x);
    TraceRow row;
    row.iteration = it;
    row.objective = objective(h, s, cfg, xc);
    row.max_update = st.last_update;
    row.floor_activations = st.floor_activations;
    res.trace.push_back(row);
    if (st.last_update < opt.tol && st.last_y_update < opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.x = to_complex(st.x);
  res.floor_activations = st.floor_activations;
  return res;
}

inline void write_trace_csv(std::ostream& os, std::span<const TraceRow> trace) {
  os << "iteration,objective,max_update,floor_activations\n";
  char buf[128];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%zu\n", r.iteration, r.objective,
                  r.max_update, r.floor_activations);
    os << buf;
  }
}

}  // namespace glse
