#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "core.hpp"
#include "geometry.hpp"

namespace bornlab {

/// Background-independent factors of the perturbation equation about u_1 at (t, x).
struct PerturbationFactors {
  double s, x, D, den, j, q, p, r, m2;
  double b0, c0, d0, e0;
};

inline PerturbationFactors perturbation_factors(double t, double x, double T) {
  const double s = T - t;
  if (!(s > 0) || !(std::abs(x) < s)) throw DomainError("perturbation equation: point outside B_t");
  PerturbationFactors f{};
  f.s = s;
  f.x = x;
  f.D = (s - x) * (s + x);
  f.den = f.D * f.D + 4 * s * s;
  f.j = f.D * f.D / f.den;
  f.q = 4 * x * s / (f.D * f.D);
  f.p = 2 * s / f.D;
  f.r = 2 * x / f.D;
  f.m2 = 2 * (s * s + x * x) / (f.D * f.D);
  f.b0 = (f.D * f.D - 4 * x * x) / f.den;
  f.c0 = 8 * s / f.den;
  f.d0 = 8 * x / f.den;
  f.e0 = 8 * x * s / f.den;
  return f;
}

inline double linear_part(const Jet2& w, const PerturbationFactors& f) {
  return w.u_tt - f.b0 * w.u_xx - f.c0 * w.u_t + f.d0 * w.u_x - f.e0 * w.u_tx;
}

/// Bracket multiplying j; the last product is w_x w_tx (the form that makes P(w) = j BI(u_1 + w)).
inline double nonlinear_bracket(const Jet2& w, const PerturbationFactors& f) {
  const double wt = w.u_t, wx = w.u_x;
  return (f.q + w.u_tt) * wx * wx + (f.q + w.u_xx) * wt * wt - 2 * (f.p * wt + f.r * wx) * w.u_tx +
         2 * (f.p * w.u_tt - f.m2 * wt) * wx + 2 * (f.r * w.u_xx - wx * w.u_tx) * wt;
}

inline double perturbation_residual(const Jet2& w, const PerturbationFactors& f) {
  return linear_part(w, f) + f.j * nonlinear_bracket(w, f);
}

inline double perturbation_residual(const Jet2& w, double t, double x, double T) {
  return perturbation_residual(w, perturbation_factors(t, x, T));
}

/// Partial derivatives of the bracket in (w, w_t, w_x, w_tt, w_tx, w_xx).
inline Coeff6 bracket_partials(const Jet2& w, const PerturbationFactors& f) {
  const double wt = w.u_t, wx = w.u_x;
  Coeff6 g{};
  g[1] = 2 * (f.q + w.u_xx) * wt - 2 * f.p * w.u_tx - 2 * f.m2 * wx + 2 * (f.r * w.u_xx - wx * w.u_tx);
  g[2] = 2 * (f.q + w.u_tt) * wx - 2 * f.r * w.u_tx + 2 * (f.p * w.u_tt - f.m2 * wt) - 2 * w.u_tx * wt;
  g[3] = wx * wx + 2 * f.p * wx;
  g[4] = -2 * (f.p * wt + f.r * wx) - 2 * wx * wt;
  g[5] = wt * wt + 2 * f.r * wt;
  return g;
}

/// Linear part as a coefficient vector over (u, u_t, u_x, u_tt, u_tx, u_xx).
inline Coeff6 linear_vector(const PerturbationFactors& f) { return {0.0, -f.c0, f.d0, 1.0, -f.e0, -f.b0}; }

struct Coefficients {
  double a, b, c, d, e, j;
};

/// Linearized operator a h_tt - b h_xx - c h_t + d h_x - e h_tx about the background jet wbar.
inline Coefficients coefficients(const Jet2& wbar, const PerturbationFactors& f) {
  const Coeff6 n = bracket_partials(wbar, f);
  return {1.0 + f.j * n[3], f.b0 - f.j * n[5], f.c0 - f.j * n[1], f.d0 + f.j * n[2], f.e0 - f.j * n[4], f.j};
}

inline Coefficients coefficients(const Jet2& wbar, double t, double x, double T) {
  return coefficients(wbar, perturbation_factors(t, x, T));
}

inline Coeff6 operator_vector(const Coefficients& k) { return {0.0, -k.c, k.d, k.a, -k.e, -k.b}; }

/// A background perturbation wbar given through its physical jet.
struct BackgroundField {
  std::function<Jet2(double t, double x)> jet;
  double R = 0.1;

  static BackgroundField zero() {
    return {[](double, double) { return Jet2{}; }, 0.1};
  }
  /// Background defined on the rectangle by its (t, xi) jet.
  static BackgroundField from_rect(std::function<Jet2(double t, double xi)> rect, double T, double R) {
    return {[rect = std::move(rect), T](double t, double x) {
              const double s = T - t;
              return rect_to_physical(rect(t, x / s), x / s, s);
            },
            R};
  }
};

inline Coefficients coefficients(const BackgroundField& bg, double t, double x, double T) {
  return coefficients(bg.jet(t, x), t, x, T);
}

/// x* = -1 + sqrt(1 + (T-t)^2), where b vanishes for wbar = 0.
inline double degenerate_x(double t, double T) {
  require(t < T, "degenerate_x: t must be < T");
  return degenerate_curve_x(T - t);
}

enum class PointType { Hyperbolic, Degenerate, Elliptic };

inline constexpr double kDegenerateTol = 1e-12;

inline PointType classify_point(const BackgroundField& bg, double t, double x, double T) {
  const double b = coefficients(bg, t, x, T).b;
  if (b > kDegenerateTol) return PointType::Hyperbolic;
  if (b < -kDegenerateTol) return PointType::Elliptic;
  return PointType::Degenerate;
}

/// Coefficients and background sampled at every node of a SpaceTimeGrid.
struct CoefficientField {
  SpaceTimeGrid grid;
  GridFunction2D a, b, c, d, e, j;
  std::vector<Jet2> wbar;     // physical background jets, row-major (n, i)
  std::vector<Coeff6> base;   // linear_vector at each node
  std::vector<Coeff6> brack;  // bracket_partials at each node

  std::size_t at(int n, int i) const { return static_cast<std::size_t>(n) * (grid.nx + 1) + i; }
  Coefficients operator()(int n, int i) const {
    return {a(n, i), b(n, i), c(n, i), d(n, i), e(n, i), j(n, i)};
  }
  Coeff6 vector(int n, int i) const { return operator_vector((*this)(n, i)); }
};

inline CoefficientField sample_coefficients(const SpaceTimeGrid& g, const std::function<Jet2(int, int)>& wbar_at) {
  CoefficientField cf;
  cf.grid = g;
  for (auto* f : {&cf.a, &cf.b, &cf.c, &cf.d, &cf.e, &cf.j}) *f = GridFunction2D(g.nt, g.nx);
  const std::size_t N = static_cast<std::size_t>(g.nt + 1) * (g.nx + 1);
  cf.wbar.resize(N);
  cf.base.resize(N);
  cf.brack.resize(N);
  for (int n = 0; n <= g.nt; ++n) {
    for (int i = 0; i <= g.nx; ++i) {
      const PerturbationFactors f = perturbation_factors(g.t(n), g.x(n, i), g.dom.T);
      const Jet2 w = wbar_at(n, i);
      const Coefficients k = coefficients(w, f);
      cf.a(n, i) = k.a;
      cf.b(n, i) = k.b;
      cf.c(n, i) = k.c;
      cf.d(n, i) = k.d;
      cf.e(n, i) = k.e;
      cf.j(n, i) = k.j;
      cf.wbar[cf.at(n, i)] = w;
      cf.base[cf.at(n, i)] = linear_vector(f);
      cf.brack[cf.at(n, i)] = bracket_partials(w, f);
    }
  }
  return cf;
}

inline CoefficientField sample_coefficients(const SpaceTimeGrid& g, const BackgroundField& bg) {
  return sample_coefficients(g, [&](int n, int i) { return bg.jet(g.t(n), g.x(n, i)); });
}

/// Smallest constants making each bound of the coefficient lemma hold at every node.
struct Lemma31Report {
  double C_a = 0, C_b = 0, C_c = 0, C_d = 0, C_e = 0, C_j = 0;
  double d_growth_exponent = 0;  // slope of log max|d(t,0)| against log(T-t)
  bool d_exponent_fitted = false;

  double max_constant() const { return std::max({C_a, C_b, C_c, C_d, C_e}); }
};

inline Lemma31Report check_lemma31_bounds(const CoefficientField& cf) {
  Lemma31Report rep;
  const SpaceTimeGrid& g = cf.grid;
  auto upd = [](double& C, double v, double bound) { C = std::max(C, std::abs(v) / bound); };
  for (int n = 0; n <= g.nt; ++n) {
    const double s = g.s(n);
    for (int i = 0; i <= g.nx; ++i) {
      const Jet2& w = cf.wbar[cf.at(n, i)];
      const double wt = std::abs(w.u_t), wx = std::abs(w.u_x), wtt = std::abs(w.u_tt);
      const double wtx = std::abs(w.u_tx), wxx = std::abs(w.u_xx);
      upd(rep.C_a, cf.a(n, i), (1 + 1 / s) * (1 + wx + wx * wx));
      upd(rep.C_b, cf.b(n, i), (1 + 1 / s) * (1 + wt + wt * wt));
      upd(rep.C_c, cf.c(n, i), (1 + 1 / (s * s)) * (1 + wt + wx + wtx + wxx + wx * wx + wxx * wxx));
      upd(rep.C_d, cf.d(n, i),
          1 + (1 + wx + wtt + wtx + wt * wt + wx * wx + wtt * wtt + wtx * wtx) / (s * s * s));
      upd(rep.C_e, cf.e(n, i), 1 + (1 + wt + wx + wt * wt + wx * wx) / s);
      upd(rep.C_j, cf.j(n, i), 1.0);
    }
  }
  // least-squares slope of log|d(t,0)| against log s over the second half of the time range
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int n = g.nt / 2; n <= g.nt; ++n) {
    const double dv = std::abs(cf.d(n, 0));
    if (!(dv > 1e-300)) continue;
    const double X = std::log(g.s(n)), Y = std::log(dv);
    sx += X, sy += Y, sxx += X * X, sxy += X * Y, ++m;
  }
  if (m >= 3 && sxx * m - sx * sx > 0) {
    rep.d_growth_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.d_exponent_fitted = true;
  }
  return rep;
}

/// Sign changes of b on slice n and the interpolated xi of the first one.
struct SignChange {
  int count = 0;
  int cell = -1;
  double xi = 0;
};

inline SignChange locate_sign_change(const CoefficientField& cf, int n) {
  SignChange sc;
  const SpaceTimeGrid& g = cf.grid;
  for (int i = 0; i < g.nx; ++i) {
    const double b0 = cf.b(n, i), b1 = cf.b(n, i + 1);
    if ((b0 > 0 && b1 <= 0) || (b0 < 0 && b1 >= 0)) {
      if (sc.count == 0) {
        sc.cell = i;
        sc.xi = g.xi(i) + g.dxi() * b0 / (b0 - b1);
      }
      ++sc.count;
    }
  }
  return sc;
}

}  // namespace bornlab
