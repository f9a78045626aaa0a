#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "glse/aug.hpp"
#include "glse/config.hpp"
#include "glse/errors.hpp"

namespace glse {

/// K x N complex channel, row-major (row k = user k).
class ChannelMatrix {
 public:
  ChannelMatrix(std::size_t k_users, std::size_t n_antennas)
      : k_(k_users), n_(n_antennas), h_(k_users * n_antennas) {
    if (k_ == 0 || n_ == 0) throw InvalidConfig("channel needs K >= 1 and N >= 1");
  }
  ChannelMatrix(std::size_t k_users, std::size_t n_antennas, std::vector<cplx> entries)
      : k_(k_users), n_(n_antennas), h_(std::move(entries)) {
    if (k_ == 0 || n_ == 0) throw InvalidConfig("channel needs K >= 1 and N >= 1");
    if (h_.size() != k_ * n_) throw InvalidConfig("channel entry count != K*N");
    for (const cplx& v : h_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw InvalidConfig("channel entries must be finite");
      }
    }
  }

  std::size_t k_users() const { return k_; }
  std::size_t n_antennas() const { return n_; }
  double load() const { return static_cast<double>(k_) / static_cast<double>(n_); }

  cplx operator()(std::size_t k, std::size_t n) const { return h_[k * n_ + n]; }
  cplx& operator()(std::size_t k, std::size_t n) { return h_[k * n_ + n]; }
  std::span<const cplx> row(std::size_t k) const { return {h_.data() + k * n_, n_}; }
  const std::vector<cplx>& entries() const { return h_; }

  /// H x
  std::vector<cplx> apply(std::span<const cplx> x) const {
    std::vector<cplx> out(k_);
    for (std::size_t k = 0; k < k_; ++k) {
      cplx acc{};
      const cplx* r = h_.data() + k * n_;
      for (std::size_t n = 0; n < n_; ++n) acc += r[n] * x[n];
      out[k] = acc;
    }
    return out;
  }

  /// H^H y
  std::vector<cplx> apply_adjoint(std::span<const cplx> y) const {
    std::vector<cplx> out(n_);
    for (std::size_t k = 0; k < k_; ++k) {
      const cplx* r = h_.data() + k * n_;
      for (std::size_t n = 0; n < n_; ++n) out[n] += std::conj(r[n]) * y[k];
    }
    return out;
  }

 private:
  std::size_t k_;
  std::size_t n_;
  std::vector<cplx> h_;
};

/// ||H x - sqrt(rho) s||^2 + lambda ||x||^2 + mu ||x||_1, with ||.||_1 the sum
/// of complex magnitudes. Throws SupportViolation for x outside the disk.
inline double objective(const ChannelMatrix& h, std::span<const cplx> s,
                        const PrecoderConfig& cfg, std::span<const cplx> x) {
  if (s.size() != h.k_users() || x.size() != h.n_antennas()) {
    throw InvalidConfig("objective: dimension mismatch");
  }
  double pen = 0.0;
  for (const cplx& v : x) {
    const double m2 = std::norm(v);
    if (cfg.p_max && m2 > *cfg.p_max + 1e-9) {
      throw SupportViolation("objective: |x_n|^2 exceeds p_max");
    }
    pen += cfg.lambda * m2 + cfg.mu * std::sqrt(m2);
  }
  const std::vector<cplx> hx = h.apply(x);
  const double sr = std::sqrt(cfg.rho);
  double fid = 0.0;
  for (std::size_t k = 0; k < hx.size(); ++k) fid += std::norm(hx[k] - sr * s[k]);
  return fid + pen;
}

}  // namespace glse
