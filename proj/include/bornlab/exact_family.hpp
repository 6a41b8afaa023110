#pragma once

#include <cmath>

#include "core.hpp"
#include "geometry.hpp"

namespace bornlab {

/// Member u_k(t,x) = k ln((T-t+x)/(T-t-x)) of the explicit self-similar family.
struct SelfSimilarParams {
  double k = 1.0, T = 1.0;

  SelfSimilarParams() = default;
  SelfSimilarParams(double k_, double T_) : k(k_), T(T_) {
    require(k != 0.0, "SelfSimilarParams: k must be nonzero");
    require(T > 0.0, "SelfSimilarParams: T must be positive");
  }
};

enum class SingularityType { Timelike, Spacelike, Lightlike };

inline constexpr double kLightlikeTol = 1e-10;

/// With s = T-t and D = s^2 - x^2:
///   u_x = 2ks/D, u_t = 2kx/D, u_tt = u_xx = 4ksx/D^2, u_tx = 2k(s^2+x^2)/D^2.
inline Jet2 eval_uk(const SelfSimilarParams& p, double t, double x) {
  const double s = p.T - t;
  if (!(s > 0) || !(std::abs(x) < s)) throw DomainError("eval_uk: point outside the backward light cone");
  const double D = (s - x) * (s + x);
  const double k = p.k;
  Jet2 j;
  j.u = k * (std::log1p(x / s) - std::log1p(-x / s));
  j.u_x = 2 * k * s / D;
  j.u_t = 2 * k * x / D;
  j.u_tt = 4 * k * s * x / (D * D);
  j.u_xx = j.u_tt;
  j.u_tx = 2 * k * (s * s + x * x) / (D * D);
  return j;
}

inline double bi_residual(const Jet2& j) {
  return j.u_tt * (1 + j.u_x * j.u_x) - j.u_xx * (1 - j.u_t * j.u_t) - 2 * j.u_t * j.u_x * j.u_tx;
}

inline double wave_residual(const Jet2& j) { return j.u_tt - j.u_xx; }

inline double timelike_q(const Jet2& j) { return 1 - j.u_t * j.u_t + j.u_x * j.u_x; }

inline SingularityType classify_singularity(const Jet2& j) {
  const double q = timelike_q(j);
  if (q > kLightlikeTol) return SingularityType::Timelike;
  if (q < -kLightlikeTol) return SingularityType::Spacelike;
  return SingularityType::Lightlike;
}

/// Steady profile v(rho) = k ln((1+rho)/(1-rho)).
inline double steady_profile(double k, double rho) { return k * (std::log1p(rho) - std::log1p(-rho)); }

inline double steady_ode_residual(double k, double rho) {
  if (!(std::abs(rho) < 1)) throw DomainError("steady_ode_residual: |rho| must be < 1");
  const double w = 1 - rho * rho;
  const double v1 = 2 * k / w;
  const double v2 = 4 * k * rho / (w * w);
  return (rho * rho - 1) * v2 + 2 * rho * v1;
}

/// Jet of u_lambda(t,x) = u(lambda t, lambda x) / lambda, given the jet of u at (lambda t, lambda x).
inline Jet2 scaling_orbit(const Jet2& j, double lambda) {
  require(lambda > 0, "scaling_orbit: lambda must be positive");
  return {j.u / lambda, j.u_t, j.u_x, lambda * j.u_tt, lambda * j.u_tx, lambda * j.u_xx};
}

inline const char* to_string(SingularityType t) {
  switch (t) {
    case SingularityType::Timelike: return "timelike";
    case SingularityType::Spacelike: return "spacelike";
    default: return "lightlike";
  }
}

}  // namespace bornlab
