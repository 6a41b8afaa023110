#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "core.hpp"

namespace bornlab {

/// Uniform grid with n cells on [x_min, x_max].
struct Grid1D {
  double x_min = 0, x_max = 1;
  int n = 8;

  Grid1D() = default;
  Grid1D(double a, double b, int cells) : x_min(a), x_max(b), n(cells) {
    require(a < b, "Grid1D: x_min must be < x_max");
    require(cells >= 8, "Grid1D: need at least 8 cells");
  }

  double h() const { return (x_max - x_min) / n; }
  double node(int i) const { return x_min + i * h(); }
  int size() const { return n + 1; }
  std::vector<double> nodes() const {
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = node(i);
    return v;
  }
};

/// Truncated backward cone B_t = {0 <= x <= delta (T - t), 0 <= t <= T_bar}.
struct ConeDomain {
  double T = 1.0, delta = 0.9, T_bar = 0.9;

  ConeDomain() = default;
  ConeDomain(double T_, double delta_, double T_bar_) : T(T_), delta(delta_), T_bar(T_bar_) {
    require(T > 0, "ConeDomain: T must be positive");
    require(delta > 0 && delta < 1, "ConeDomain: delta must lie in (0,1)");
    require(T_bar > 0 && T_bar < T, "ConeDomain: T_bar must lie in (0,T)");
  }

  double delta_bar() const { return T - T_bar; }
  double s(double t) const { return T - t; }
  double slice_length(double t) const { return delta * (T - t); }
  bool contains(double t, double x, double tol = 1e-14) const {
    return t >= -tol && t <= T_bar + tol && x >= -tol && x <= slice_length(t) * (1 + tol) + tol;
  }
};

struct SimilarityPoint {
  double tau = 0, rho = 0;
};

struct SpaceTimePoint {
  double t = 0, x = 0;
};

struct RectPoint {
  double t = 0, xi = 0;
};

inline SimilarityPoint to_similarity(double t, double x, double T) {
  if (!(t < T) || !(std::abs(x) < T - t)) throw DomainError("to_similarity: point outside the backward light cone");
  const double s = T - t;
  return {-std::log(s), x / s};
}

inline SpaceTimePoint from_similarity(const SimilarityPoint& p, double T) {
  if (!(std::abs(p.rho) < 1)) throw DomainError("from_similarity: |rho| must be < 1");
  const double s = std::exp(-p.tau);
  return {T - s, p.rho * s};
}

inline RectPoint cone_to_rectangle(double t, double x, const ConeDomain& dom) {
  if (!dom.contains(t, x)) throw DomainError("cone_to_rectangle: point outside B_t");
  return {t, std::min(x / (dom.T - t), dom.delta)};
}

inline SpaceTimePoint rectangle_to_cone(double t, double xi, const ConeDomain& dom) {
  return {t, xi * (dom.T - t)};
}

/// x* = -1 + sqrt(1 + s^2), written without cancellation for small s.
inline double degenerate_curve_x(double s) { return s * s / (1.0 + std::sqrt(1.0 + s * s)); }

inline double degenerate_curve_xi(double s) { return s / (1.0 + std::sqrt(1.0 + s * s)); }

// Jets on the rectangle store (U, U_t, U_xi, U_tt, U_txi, U_xixi) in the Jet2 slots,
// where U(t, xi) = u(t, xi s) and s = T - t.

inline Jet2 rect_to_physical(const Jet2& r, double xi, double s) {
  Jet2 p;
  p.u = r.u;
  p.u_x = r.u_x / s;
  p.u_t = r.u_t + xi / s * r.u_x;
  p.u_xx = r.u_xx / (s * s);
  p.u_tx = (r.u_tx + r.u_x / s + xi / s * r.u_xx) / s;
  p.u_tt = r.u_tt + 2 * xi / s * r.u_tx + 2 * xi / (s * s) * r.u_x + xi * xi / (s * s) * r.u_xx;
  return p;
}

inline Jet2 physical_to_rect(const Jet2& p, double xi, double s) {
  Jet2 r;
  r.u = p.u;
  r.u_x = s * p.u_x;
  r.u_t = p.u_t - xi * p.u_x;
  r.u_xx = s * s * p.u_xx;
  r.u_tx = s * (p.u_tx - xi * p.u_xx) - p.u_x;
  r.u_tt = p.u_tt - 2 * xi * p.u_tx + xi * xi * p.u_xx;
  return r;
}

/// Coefficients g over (u, u_t, u_x, u_tt, u_tx, u_xx) of a linear operator, pulled back
/// so that sum g_k p_k = sum G_k r_k for p = rect_to_physical(r).
using Coeff6 = std::array<double, 6>;

inline Coeff6 pull_back(const Coeff6& g, double xi, double s) {
  const double is = 1.0 / s, is2 = is * is;
  Coeff6 G{};
  G[0] = g[0];
  G[1] = g[1];
  G[2] = g[2] * is + g[1] * xi * is + g[4] * is2 + g[3] * 2 * xi * is2;
  G[3] = g[3];
  G[4] = g[4] * is + g[3] * 2 * xi * is;
  G[5] = g[5] * is2 + g[4] * xi * is2 + g[3] * xi * xi * is2;
  return G;
}

inline double contract(const Coeff6& g, const Jet2& j) {
  return g[0] * j.u + g[1] * j.u_t + g[2] * j.u_x + g[3] * j.u_tt + g[4] * j.u_tx + g[5] * j.u_xx;
}

/// Uniform grid on the rectangle [0, T_bar] x [0, delta] that images B_t.
struct SpaceTimeGrid {
  ConeDomain dom;
  int nt = 16, nx = 16;

  SpaceTimeGrid() = default;
  SpaceTimeGrid(const ConeDomain& d, int nt_, int nx_) : dom(d), nt(nt_), nx(nx_) {
    require(nt >= 16 && nx >= 16, "SpaceTimeGrid: nt, nx must be >= 16");
  }

  double dt() const { return dom.T_bar / nt; }
  double dxi() const { return dom.delta / nx; }
  double t(int n) const { return n * dt(); }
  double xi(int i) const { return i * dxi(); }
  double s(int n) const { return dom.T - t(n); }
  double x(int n, int i) const { return xi(i) * s(n); }
  Grid1D xi_grid() const { return Grid1D(0.0, dom.delta, nx); }
};

}  // namespace bornlab
