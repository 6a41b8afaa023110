#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "discrete_jet.hpp"
#include "geometry.hpp"
#include "linearization.hpp"
#include "mixed_solver.hpp"
#include "smoothing_sobolev.hpp"

namespace bornlab {

/// Value, first and second derivative of a profile in x.
using Profile = std::function<std::array<double, 3>(double x)>;

inline Profile zero_profile() {
  return [](double) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
}

/// c x^p (L - x)^p on [0, L], zero outside, with c fixing the H^k norm on [0, L] to `norm`.
/// Value and first p - 1 derivatives vanish at both ends.
inline Profile polynomial_bump(double L, int p = 3, double norm = 1.0, int k = 2) {
  require(L > 0 && p >= 2 && k >= 0, "polynomial_bump: need L > 0, p >= 2, k >= 0");
  // coefficients of x^p (L - x)^p in powers of x
  std::vector<double> c(2 * p + 1, 0.0);
  for (int j = 0; j <= p; ++j) c[p + j] = std::pow(-1.0, j) * std::tgamma(p + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(p - j + 1.0)) * std::pow(L, p - j);
  auto eval = [](const std::vector<double>& q, double x) {
    double acc = 0;
    for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  auto deriv = [](const std::vector<double>& q) {
    std::vector<double> d(q.size() > 1 ? q.size() - 1 : 1, 0.0);
    for (std::size_t j = 1; j < q.size(); ++j) d[j - 1] = j * q[j];
    return d;
  };
  // squared H^k norm: integrate each |D^i q|^2 exactly as a polynomial
  double n2 = 0;
  std::vector<double> d = c;
  for (int i = 0; i <= k; ++i) {
    if (i > 0) d = deriv(d);
    std::vector<double> sq(2 * d.size() - 1, 0.0);
    for (std::size_t a = 0; a < d.size(); ++a)
      for (std::size_t b = 0; b < d.size(); ++b) sq[a + b] += d[a] * d[b];
    for (std::size_t j = 0; j < sq.size(); ++j) n2 += sq[j] * std::pow(L, j + 1.0) / (j + 1.0);
  }
  const double scale = norm / std::sqrt(n2);
  std::array<std::vector<double>, 3> q{c, deriv(c), deriv(deriv(c))};
  for (auto& v : q)
    for (double& e : v) e *= scale;
  return [q, eval, L](double x) {
    if (x <= 0 || x >= L) return std::array<double, 3>{0.0, 0.0, 0.0};
    return std::array<double, 3>{eval(q[0], x), eval(q[1], x), eval(q[2], x)};
  };
}

struct IterationConfig {
  double epsilon = 1e-4;
  double R = 0.1;
  int N0 = 2;
  int s_bar = 2;
  int s = 4;
  double d = 0.2;
  int max_m = 6;
  double floor_rel = 1e-8;  // stop once |E^(m)| < floor_rel |E^(0)|
  SpaceTimeGrid grid;

  void validate() const {
    require(epsilon > 0, "IterationConfig: epsilon must be positive");
    require(N0 >= 2, "IterationConfig: N0 must be >= 2");
    require(s_bar >= 2 && s > s_bar, "IterationConfig: need s > s_bar >= 2");
    require(d > 0 && d < 1, "IterationConfig: d must lie in (0,1)");
    require(R > 0 && R < 1, "IterationConfig: R must lie in (0,1)");
    require(max_m >= 3, "IterationConfig: max_m must be >= 3");
    const double chain = std::pow(static_cast<double>(N0), -8) * d * d;
    require(epsilon < chain && chain < R, "IterationConfig: smallness chain eps < N0^-8 d^2 < R violated");
  }
  double N(int m) const { return std::pow(static_cast<double>(N0), m); }
  double s_real(int m) const { return s_bar + (s - s_bar) / std::pow(2.0, m); }
  int s_int(int m) const { return static_cast<int>(std::floor(s_real(m))); }
};

/// phi = eps (w0 + t w1), the forcing F = -P(phi) and the Dirichlet data of psi = w - phi.
struct ShiftedProblem {
  SpaceTimeGrid grid;
  std::vector<Jet2> phi;  // physical jets of phi at every node
  GridFunction2D F;
  std::vector<double> left, right;
  std::size_t at(int n, int i) const { return static_cast<std::size_t>(n) * (grid.nx + 1) + i; }
};

inline Jet2 shift_jet(const Profile& w0, const Profile& w1, double eps, double t, double x) {
  const auto a = w0(x), b = w1(x);
  return {eps * (a[0] + t * b[0]), eps * b[0], eps * (a[1] + t * b[1]), 0.0, eps * b[1], eps * (a[2] + t * b[2])};
}

inline ShiftedProblem auxiliary_shift(const Profile& w0, const Profile& w1, double eps, const SpaceTimeGrid& g) {
  ShiftedProblem sp;
  sp.grid = g;
  sp.phi.resize(static_cast<std::size_t>(g.nt + 1) * (g.nx + 1));
  sp.F = GridFunction2D(g.nt, g.nx);
  sp.left.resize(g.nt + 1);
  sp.right.resize(g.nt + 1);
  for (int n = 0; n <= g.nt; ++n) {
    for (int i = 0; i <= g.nx; ++i) {
      const Jet2 ph = shift_jet(w0, w1, eps, g.t(n), g.x(n, i));
      sp.phi[sp.at(n, i)] = ph;
      sp.F(n, i) = -perturbation_residual(ph, g.t(n), g.x(n, i), g.dom.T);
    }
    sp.left[n] = -sp.phi[sp.at(n, 0)].u;
    sp.right[n] = -sp.phi[sp.at(n, g.nx)].u;
  }
  return sp;
}

/// Mask of nodes carrying PDE rows (interior levels, interior xi, not replaced by curve rows).
inline std::vector<char> pde_mask(const SpaceTimeGrid& g) {
  std::vector<char> mask(static_cast<std::size_t>(g.nt + 1) * (g.nx + 1), 0);
  for (int n = 1; n < g.nt; ++n)
    for (int i = 1; i < g.nx; ++i) mask[static_cast<std::size_t>(n) * (g.nx + 1) + i] = 1;
  const std::vector<int> ic = curve_nodes(g);
  for (int n = 2; n <= g.nt; ++n)
    if (ic[n] >= 0) mask[static_cast<std::size_t>(n - 1) * (g.nx + 1) + ic[n]] = 0;
  return mask;
}

/// Lin(psi) + j Pi_theta [NL(psi + phi) - NL(phi)] - F on PDE nodes, zero elsewhere.
/// theta <= 0 skips the smoothing.
inline GridFunction2D smoothed_residual(const GridFunction2D& psi, const ShiftedProblem& sp, double theta) {
  const SpaceTimeGrid& g = sp.grid;
  GridFunction2D out(g.nt, g.nx);
  const std::vector<char> mask = pde_mask(g);
  std::optional<SmoothingOperator> pi;
  if (theta > 0) pi.emplace(theta, g.xi_grid());
  std::vector<double> br(g.nx + 1), lin(g.nx + 1), jj(g.nx + 1);
  for (int n = 1; n < g.nt; ++n) {
    const double t = g.t(n), s = g.s(n);
    for (int i = 0; i <= g.nx; ++i) {
      const PerturbationFactors f = perturbation_factors(t, g.x(n, i), g.dom.T);
      const Jet2 pj = rect_to_physical(rect_jet(psi, g, n, i), g.xi(i), s);
      const Jet2& ph = sp.phi[sp.at(n, i)];
      br[i] = nonlinear_bracket(pj + ph, f) - nonlinear_bracket(ph, f);
      lin[i] = linear_part(pj, f);
      jj[i] = f.j;
    }
    const std::vector<double> sm = pi ? pi->apply(br) : br;
    for (int i = 0; i <= g.nx; ++i)
      if (mask[sp.at(n, i)]) out(n, i) = lin[i] + jj[i] * sm[i] - sp.F(n, i);
  }
  return out;
}

inline GridFunction2D smoothed_operator(const GridFunction2D& psi, int m, const ShiftedProblem& sp, int N0 = 2) {
  return smoothed_residual(psi, sp, std::pow(static_cast<double>(N0), m));
}

namespace detail {
/// Time derivative of order 1 or 2 at (n, i) using only masked-in nodes; false when no stencil fits.
inline bool masked_time_diff(const GridFunction2D& u, const std::vector<char>& mask, int n, int i, int order,
                             double dt, double& out) {
  const int nt = u.nt(), nx = u.nx();
  auto ok = [&](int m) { return m >= 0 && m <= nt && mask[static_cast<std::size_t>(m) * (nx + 1) + i]; };
  if (!ok(n)) return false;
  if (order == 1) {
    if (ok(n - 1) && ok(n + 1)) return out = (u(n + 1, i) - u(n - 1, i)) / (2 * dt), true;
    if (ok(n + 1) && ok(n + 2)) return out = (-3 * u(n, i) + 4 * u(n + 1, i) - u(n + 2, i)) / (2 * dt), true;
    if (ok(n - 1) && ok(n - 2)) return out = (3 * u(n, i) - 4 * u(n - 1, i) + u(n - 2, i)) / (2 * dt), true;
    return false;
  }
  const double q = dt * dt;
  if (ok(n - 1) && ok(n + 1)) return out = (u(n + 1, i) - 2 * u(n, i) + u(n - 1, i)) / q, true;
  if (ok(n + 1) && ok(n + 2) && ok(n + 3))
    return out = (2 * u(n, i) - 5 * u(n + 1, i) + 4 * u(n + 2, i) - u(n + 3, i)) / q, true;
  if (ok(n - 1) && ok(n - 2) && ok(n - 3))
    return out = (2 * u(n, i) - 5 * u(n - 1, i) + 4 * u(n - 2, i) - u(n - 3, i)) / q, true;
  return false;
}

/// Squared H^s norm summed over maximal runs of valid nodes; runs shorter than 4s+1 nodes are skipped.
inline double broken_h_norm_sq(const std::vector<double>& f, const std::vector<char>& valid, double h, int s) {
  double total = 0;
  const int n = static_cast<int>(f.size());
  for (int a = 0; a < n;) {
    if (!valid[a]) {
      ++a;
      continue;
    }
    int b = a;
    while (b + 1 < n && valid[b + 1]) ++b;
    if (b - a >= std::max(4 * s, 2)) {
      std::vector<double> d(f.begin() + a, f.begin() + b + 1), sq(d.size());
      for (int k = 0; k <= s; ++k) {
        if (k > 0) d = diff1(d, h);
        for (std::size_t j = 0; j < d.size(); ++j) sq[j] = d[j] * d[j];
        total += trapezoid(sq, h);
      }
    }
    a = b + 1;
  }
  return total;
}
}  // namespace detail

/// C^2_s norm restricted to PDE nodes: differences never cross the boundary, the initial levels or the curve.
inline double residual_norm(const GridFunction2D& E, const SpaceTimeGrid& g, int s) {
  require(s >= 2, "residual_norm: s must be >= 2");
  const std::vector<char> mask = pde_mask(g);
  const int nx = g.nx;
  std::vector<double> u(nx + 1), u1(nx + 1), u2(nx + 1);
  std::vector<char> v0(nx + 1), v1(nx + 1), v2(nx + 1);
  double sup = 0;
  for (int n = 1; n < g.nt; ++n) {
    for (int i = 0; i <= nx; ++i) {
      u[i] = E(n, i);
      v0[i] = mask[static_cast<std::size_t>(n) * (nx + 1) + i];
      v1[i] = detail::masked_time_diff(E, mask, n, i, 1, g.dt(), u1[i]);
      v2[i] = detail::masked_time_diff(E, mask, n, i, 2, g.dt(), u2[i]);
    }
    const double h = g.dxi();
    sup = std::max(sup, detail::broken_h_norm_sq(u, v0, h, s) + detail::broken_h_norm_sq(u1, v1, h, s - 1) +
                            detail::broken_h_norm_sq(u2, v2, h, s - 2));
  }
  return std::sqrt(sup);
}

struct StepRecord {
  int m = 0;
  double N_m = 1, s_m = 0;
  int s_used = 0;
  double h_norm = 0, E_norm = 0, ratio = NAN, psi_norm = 0, lemma_C = NAN;
  double solve_residual = 0;
};

struct IterationTrace {
  std::vector<StepRecord> steps;
  GridFunction2D psi;
  bool reached_floor = false;
  double floor = 0;                 // roundoff stopping floor, relative to |E^(0)|
  double discretization_floor = 0;  // 1e-2 max(dt, dxi)^2
  double final_unsmoothed_norm = 0;  // unsmoothed residual of w = psi + phi, at s_bar

  double fitted_lemma_C() const {
    double c = 0;
    for (const auto& r : steps)
      if (std::isfinite(r.lemma_C)) c = std::max(c, r.lemma_C);
    return c;
  }
};

struct DivergenceError : std::runtime_error {
  IterationTrace trace;
  DivergenceError(const std::string& w, IterationTrace t) : std::runtime_error(w), trace(std::move(t)) {}
};

/// Jacobian of the smoothed operator at background psi + phi, as a mixed-solver problem for h.
inline LinearProblem newton_problem(const GridFunction2D& psi, const ShiftedProblem& sp, double theta,
                                    const GridFunction2D& residual) {
  const SpaceTimeGrid& g = sp.grid;
  CoefficientField cf = sample_coefficients(g, [&](int n, int i) {
    return rect_to_physical(rect_jet(psi, g, n, i), g.xi(i), g.s(n)) + sp.phi[sp.at(n, i)];
  });
  LinearProblem p = LinearProblem::homogeneous(cf);
  p.kappa = 0;
  p.theta = 0;
  p.bracket_theta = theta;
  p.f = -1.0 * residual;
  p.left.resize(g.nt + 1);
  p.right.resize(g.nt + 1);
  for (int n = 0; n <= g.nt; ++n) {
    p.left[n] = sp.left[n] - psi(n, 0);
    p.right[n] = sp.right[n] - psi(n, g.nx);
  }
  for (int i = 0; i <= g.nx; ++i) p.h0[i] = -psi(0, i);
  const std::vector<double> v = time_derivative(psi, g.dt(), 1).slice(0);
  for (int i = 0; i <= g.nx; ++i) p.h1[i] = -v[i];
  p.curve.assign(g.nt + 1, 0.0);
  const std::vector<int> ic = curve_nodes(g);
  for (int n = 2; n <= g.nt; ++n)
    if (ic[n] >= 0) p.curve[n] = -(psi(n, ic[n]) - psi(n - 1, ic[n]));
  return p;
}

inline IterationTrace iterate(const IterationConfig& cfg, const Profile& w0, const Profile& w1) {
  cfg.validate();
  const SpaceTimeGrid& g = cfg.grid;
  const ShiftedProblem sp = auxiliary_shift(w0, w1, cfg.epsilon, g);
  IterationTrace tr;
  tr.discretization_floor = 1e-2 * std::pow(std::max(g.dt(), g.dxi()), 2);
  tr.psi = GridFunction2D(g.nt, g.nx);
  const Grid1D xg = g.xi_grid();

  StepRecord r0;
  r0.m = 0;
  r0.N_m = 1;
  r0.s_m = cfg.s_real(0);
  r0.s_used = cfg.s_int(0);
  r0.E_norm = residual_norm(smoothed_residual(tr.psi, sp, -1), g, r0.s_used);
  tr.steps.push_back(r0);
  tr.floor = cfg.floor_rel * r0.E_norm;
  if (r0.E_norm == 0) {
    tr.reached_floor = true;
    return tr;
  }
  for (int m = 1; m <= cfg.max_m; ++m) {
    const double theta = cfg.N(m);
    const GridFunction2D res = smoothed_residual(tr.psi, sp, theta);
    const LinearSolution sol = solve(newton_problem(tr.psi, sp, theta, res));
    tr.psi = tr.psi + sol.h;
    StepRecord r;
    r.m = m;
    r.N_m = theta;
    r.s_m = cfg.s_real(m);
    r.s_used = cfg.s_int(m);
    r.solve_residual = sol.rel_residual;
    r.h_norm = c2s_norm(sol.h, g.dt(), xg, r.s_used);
    r.E_norm = residual_norm(smoothed_residual(tr.psi, sp, theta), g, r.s_used);
    r.psi_norm = c2s_norm(tr.psi, g.dt(), xg, cfg.s_bar);
    const double prev = tr.steps.back().E_norm;
    if (r.E_norm > 0 && prev > 0 && prev != 1.0) r.ratio = std::log(r.E_norm) / std::log(prev);
    if (r.h_norm > 0) r.lemma_C = r.E_norm / (std::pow(theta, 4) * r.h_norm * r.h_norm);
    tr.steps.push_back(r);
    if (r.psi_norm > cfg.R) throw DivergenceError("iterate: |psi| left the ball B_R", tr);
    if (r.E_norm < tr.floor) {
      tr.reached_floor = true;
      break;
    }
  }
  tr.final_unsmoothed_norm = residual_norm(smoothed_residual(tr.psi, sp, -1), g, cfg.s_bar);
  return tr;
}

}  // namespace bornlab
