#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "glse/errors.hpp"

namespace glse {

/// Penalty u(v) = lambda |v|^2 + mu |v| over either the whole complex plane
/// or the peak-power disk |v|^2 <= p_max.
struct PrecoderConfig {
  double rho = 1.0;
  double lambda = 0.0;
  double mu = 0.0;
  std::optional<double> p_max;  // empty: unbounded support

  bool peak_limited() const { return p_max.has_value(); }

  /// Range checks. lambda = 0 on unbounded support is accepted: the program
  /// is still bounded whenever H^H H is nonsingular.
  void validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidConfig("rho must be finite and >= 0");
    if (!std::isfinite(lambda)) throw InvalidConfig("lambda must be finite");
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidConfig("mu must be finite and >= 0");
    if (p_max && !(*p_max > 0.0 && std::isfinite(*p_max))) {
      throw InvalidConfig("p_max must be finite and > 0");
    }
    if (lambda < 0.0 && !allow_negative_lambda) {
      throw InvalidConfig("lambda must be >= 0");
    }
  }

  /// Targets that need more power than any lambda >= 0 delivers tune to a
  /// negative lambda; the global program is then non-convex and only the
  /// message-passing engine (not the convex oracle) accepts it.
  bool allow_negative_lambda = false;

  bool convex() const { return lambda >= 0.0; }
};

}  // namespace glse
