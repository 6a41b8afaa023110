#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "core.hpp"
#include "discrete_jet.hpp"
#include "geometry.hpp"
#include "linearization.hpp"
#include "smoothing_sobolev.hpp"

namespace bornlab {

struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// TypePreserving: b+kappa where b>0, b+theta where b<=0 (|b| shrinks on the elliptic side).
/// Literal: b+kappa where b>0, b-theta where b<=0.
enum class Regularization { TypePreserving, Literal };

inline double regularized_b(double b, double kappa, double theta, Regularization reg) {
  if (b > 0) return b + kappa;
  return reg == Regularization::TypePreserving ? b + theta : b - theta;
}

/// Node of the curve constraint replacing the PDE row at (n-1, i) for level n >= 2, or -1.
inline std::vector<int> curve_nodes(const SpaceTimeGrid& g) {
  std::vector<int> ic(g.nt + 1, -1);
  for (int n = 2; n <= g.nt; ++n) {
    const int i = static_cast<int>(std::lround(degenerate_curve_xi(g.s(n)) / g.dxi()));
    if (i >= 1 && i <= g.nx - 1) ic[n] = i;
  }
  return ic;
}

struct LinearProblem {
  SpaceTimeGrid grid;
  CoefficientField cf;
  GridFunction2D f;
  std::vector<double> h0, h1;
  std::vector<double> left, right;  // Dirichlet data per level; empty means zero
  std::vector<double> curve;        // prescribed h(n,i*) - h(n-1,i*) per level; empty means zero
  double kappa = 1e-4, theta = 1e-4;
  Regularization reg = Regularization::TypePreserving;
  bool curve_rows = true;
  std::optional<double> bracket_theta;  // pass the j-weighted part through Pi_theta slice by slice

  static LinearProblem homogeneous(const CoefficientField& cf) {
    LinearProblem p;
    p.grid = cf.grid;
    p.cf = cf;
    p.f = GridFunction2D(cf.grid.nt, cf.grid.nx);
    p.h0.assign(cf.grid.nx + 1, 0.0);
    p.h1.assign(cf.grid.nx + 1, 0.0);
    return p;
  }
};

enum class RowKind { Boundary, InitialValue, InitialVelocity, Pde, Curve };

struct RowInfo {
  RowKind kind;
  int n, i;
};

struct AssembledSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;
  std::vector<RowInfo> rows;  // first (nt+1)(nx+1) rows; auxiliary mode rows follow
  int n_nodes = 0;
};

/// Regularized local operator vector (over the physical jet) at node (n, i).
inline Coeff6 local_vector(const LinearProblem& p, int n, int i) {
  const CoefficientField& cf = p.cf;
  const bool split = p.bracket_theta && cutoff_mode(*p.bracket_theta, p.grid.dom.delta) < p.grid.nx;
  Coeff6 g = split ? cf.base[cf.at(n, i)] : cf.vector(n, i);
  const double b = cf.b(n, i);
  g[5] -= regularized_b(b, p.kappa, p.theta, p.reg) - b;
  return g;
}

inline AssembledSystem assemble(const LinearProblem& p) {
  const SpaceTimeGrid& g = p.grid;
  const int nt = g.nt, nx = g.nx;
  require(p.cf.grid.nt == nt && p.cf.grid.nx == nx, "assemble: coefficient grid mismatch");
  require(p.f.nt() == nt && p.f.nx() == nx, "assemble: rhs grid mismatch");
  require(static_cast<int>(p.h0.size()) == nx + 1 && static_cast<int>(p.h1.size()) == nx + 1,
          "assemble: initial trace size mismatch");
  require(p.kappa >= 0 && p.theta >= 0, "assemble: kappa and theta must be nonnegative");
  auto node = [nx](int n, int i) { return n * (nx + 1) + i; };
  const int N = (nt + 1) * (nx + 1);

  std::optional<SmoothingOperator> pi;
  if (p.bracket_theta) {
    pi.emplace(*p.bracket_theta, g.xi_grid());
    if (pi->identity) pi.reset();
  }
  const int K = pi ? static_cast<int>(pi->alpha.size()) : 0;
  const int n_aux = pi ? (nt - 1) * K : 0;
  auto aux = [&](int n, int k) { return N + (n - 1) * K + k; };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(N) * 24 + static_cast<std::size_t>(n_aux) * (nx + 1) * 12);
  AssembledSystem sys;
  sys.n_nodes = N;
  sys.rhs = Eigen::VectorXd::Zero(N + n_aux);
  sys.rows.reserve(N);
  int r = 0;

  auto put_stencil = [&](int row, const JetStencil& st, const Coeff6& G, double scale) {
    for (int k = 0; k < 6; ++k) {
      if (G[k] == 0.0) continue;
      for (const Tap& tp : st[k]) trip.emplace_back(row, node(tp.n, tp.i), scale * G[k] * tp.w);
    }
  };

  for (int n = 0; n <= nt; ++n) {
    for (int i : {0, nx}) {
      trip.emplace_back(r, node(n, i), 1.0);
      const auto& data = i == 0 ? p.left : p.right;
      sys.rhs[r] = data.empty() ? 0.0 : data[n];
      sys.rows.push_back({RowKind::Boundary, n, i});
      ++r;
    }
  }
  const double dt = g.dt();
  for (int i = 1; i < nx; ++i) {
    trip.emplace_back(r, node(0, i), 1.0);
    sys.rhs[r] = p.h0[i];
    sys.rows.push_back({RowKind::InitialValue, 0, i});
    ++r;
    trip.emplace_back(r, node(0, i), -1.5 / dt);
    trip.emplace_back(r, node(1, i), 2.0 / dt);
    trip.emplace_back(r, node(2, i), -0.5 / dt);
    sys.rhs[r] = p.h1[i];
    sys.rows.push_back({RowKind::InitialVelocity, 0, i});
    ++r;
  }
  std::vector<int> replaced(static_cast<std::size_t>(N), -1);
  if (p.curve_rows) {
    const std::vector<int> ic = curve_nodes(g);
    for (int n = 2; n <= nt; ++n)
      if (ic[n] >= 0) replaced[node(n - 1, ic[n])] = n;
  }
  for (int n = 1; n < nt; ++n) {
    const double s = g.s(n);
    for (int i = 1; i < nx; ++i) {
      const int lev = replaced[node(n, i)];
      if (lev >= 0) {
        trip.emplace_back(r, node(lev, i), 1.0);
        trip.emplace_back(r, node(lev - 1, i), -1.0);
        sys.rhs[r] = p.curve.empty() ? 0.0 : p.curve[lev];
        sys.rows.push_back({RowKind::Curve, lev, i});
        ++r;
        continue;
      }
      put_stencil(r, rect_jet_stencil(g, n, i), pull_back(local_vector(p, n, i), g.xi(i), s), 1.0);
      if (pi) {
        const double jn = p.cf.j(n, i);
        for (int k = 0; k < K; ++k) trip.emplace_back(r, aux(n, k), jn * pi->v[k][i]);
      }
      sys.rhs[r] = p.f(n, i);
      sys.rows.push_back({RowKind::Pde, n, i});
      ++r;
    }
  }
  if (pi) {
    // z_{n,k} = alpha_k sum_i' u_k(i') [bracket partials . jet](n, i')
    for (int n = 1; n < nt; ++n) {
      const double s = g.s(n);
      std::vector<JetStencil> st(nx + 1);
      std::vector<Coeff6> G(nx + 1);
      for (int i = 0; i <= nx; ++i) {
        st[i] = rect_jet_stencil(g, n, i);
        G[i] = pull_back(p.cf.brack[p.cf.at(n, i)], g.xi(i), s);
      }
      for (int k = 0; k < K; ++k) {
        const int row = aux(n, k);
        trip.emplace_back(row, row, -1.0);
        for (int i = 0; i <= nx; ++i) put_stencil(row, st[i], G[i], pi->alpha[k] * pi->u[k][i]);
      }
    }
  }
  require(r == N, "assemble: row count mismatch");
  sys.A.resize(N + n_aux, N + n_aux);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  return sys;
}

struct LinearSolution {
  GridFunction2D h;
  double rel_residual = 0;
  double rel_residual_before_refinement = 0;
  std::vector<RowInfo> rows;
};

inline LinearSolution solve(const LinearProblem& p) {
  AssembledSystem sys = assemble(p);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(sys.A);
  lu.factorize(sys.A);
  if (lu.info() != Eigen::Success) {
    std::ostringstream os;
    os << "solve: sparse factorization failed: " << lu.lastErrorMessage();
    throw SingularSystemError(os.str());
  }
  Eigen::VectorXd x = lu.solve(sys.rhs);
  const double scale = std::max(sys.rhs.lpNorm<Eigen::Infinity>(), 1e-300);
  Eigen::VectorXd res = sys.rhs - sys.A * x;
  LinearSolution out;
  out.rel_residual_before_refinement = res.lpNorm<Eigen::Infinity>() / scale;
  x += lu.solve(res);
  res = sys.rhs - sys.A * x;
  out.rel_residual = sys.rhs.lpNorm<Eigen::Infinity>() > 0 ? res.lpNorm<Eigen::Infinity>() / scale
                                                          : res.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(out.rel_residual)) throw SingularSystemError("solve: non-finite solution");
  out.h = GridFunction2D(p.grid.nt, p.grid.nx);
  for (int k = 0; k < sys.n_nodes; ++k) out.h.data()[k] = x[k];
  out.rows = std::move(sys.rows);
  return out;
}

/// Data of the problem solved exactly by a rectangle-jet function h_ms(t, xi).
inline LinearProblem manufactured_problem(const CoefficientField& cf, const std::function<Jet2(double, double)>& rect,
                                          double kappa, double theta, Regularization reg = Regularization::TypePreserving) {
  LinearProblem p = LinearProblem::homogeneous(cf);
  const SpaceTimeGrid& g = cf.grid;
  p.kappa = kappa;
  p.theta = theta;
  p.reg = reg;
  for (int n = 0; n <= g.nt; ++n)
    for (int i = 0; i <= g.nx; ++i) p.f(n, i) = contract(pull_back(local_vector(p, n, i), g.xi(i), g.s(n)), rect(g.t(n), g.xi(i)));
  for (int i = 0; i <= g.nx; ++i) {
    const Jet2 j = rect(0.0, g.xi(i));
    p.h0[i] = j.u;
    p.h1[i] = j.u_t;
  }
  p.left.resize(g.nt + 1);
  p.right.resize(g.nt + 1);
  p.curve.assign(g.nt + 1, 0.0);
  for (int n = 0; n <= g.nt; ++n) {
    p.left[n] = rect(g.t(n), 0.0).u;
    p.right[n] = rect(g.t(n), g.dom.delta).u;
  }
  const std::vector<int> ic = curve_nodes(g);
  for (int n = 2; n <= g.nt; ++n)
    if (ic[n] >= 0) p.curve[n] = rect(g.t(n), g.xi(ic[n])).u - rect(g.t(n - 1), g.xi(ic[n])).u;
  return p;
}

inline GridFunction2D sample_rect(const SpaceTimeGrid& g, const std::function<Jet2(double, double)>& rect) {
  GridFunction2D h(g.nt, g.nx);
  for (int n = 0; n <= g.nt; ++n)
    for (int i = 0; i <= g.nx; ++i) h(n, i) = rect(g.t(n), g.xi(i)).u;
  return h;
}

// ---------------------------------------------------------------------------
// Energy monitors

/// Physical-coordinate difference operators on the rectangle grid.
inline GridFunction2D d_xi(const GridFunction2D& u, const SpaceTimeGrid& g) {
  GridFunction2D out(g.nt, g.nx);
  for (int n = 0; n <= g.nt; ++n) out.set_slice(n, diff1(u.slice(n), g.dxi()));
  return out;
}

inline GridFunction2D d_x(const GridFunction2D& u, const SpaceTimeGrid& g) {
  GridFunction2D out = d_xi(u, g);
  for (int n = 0; n <= g.nt; ++n)
    for (int i = 0; i <= g.nx; ++i) out(n, i) /= g.s(n);
  return out;
}

inline GridFunction2D d_t(const GridFunction2D& u, const SpaceTimeGrid& g) {
  GridFunction2D out = time_derivative(u, g.dt(), 1);
  const GridFunction2D ux = d_xi(u, g);
  for (int n = 0; n <= g.nt; ++n)
    for (int i = 0; i <= g.nx; ++i) out(n, i) += g.xi(i) / g.s(n) * ux(n, i);
  return out;
}

struct EnergyWeights {
  double nu = 50, chi = 6, mu = 10;
};

struct EnergyTrace {
  std::vector<double> t, E_hyp, E_ell, flux_boundary, flux_curve;
};

struct MarginSample {
  double value = INFINITY, t = 0, xi = 0, b = 0;
};

struct EnergyReport {
  EnergyTrace trace;
  double lhs_hyp = 0, rhs_hyp = 0, C_hyp = 0;  // first-order energy inequality on the hyperbolic part
  double lhs_ell = 0, rhs_ell = 0, C_ell = 0;  // same on the elliptic part
  MarginSample R7, R8, E1, E2;                 // minima over grid nodes
  MarginSample R8_curve;                       // hyperbolic-side limit on the degenerate curve
  bool verdict = false;
};

namespace detail {
struct CoeffDerivs {
  GridFunction2D a_t, a_x, b_t, b_x, e_t, e_x;
};
inline CoeffDerivs coeff_derivs(const CoefficientField& cf) {
  const SpaceTimeGrid& g = cf.grid;
  return {d_t(cf.a, g), d_x(cf.a, g), d_t(cf.b, g), d_x(cf.b, g), d_t(cf.e, g), d_x(cf.e, g)};
}
inline double ratio(double lhs, double rhs) { return rhs > 0 ? lhs / rhs : (lhs > 0 ? INFINITY : 0.0); }
}  // namespace detail

/// Positivity margins of the multiplier expressions with weight W = chi nu / (T-t)^{chi+1}:
///   hyperbolic (b>0):  R7 = -2c - 2a_t + W a + e_x - |d| - |b_x| - 1
///                      R8 = -b_t + W b - |d| - |b_x|
///   elliptic (b<=0), bt = -b:
///                      E1 = -2c - a_t + W a + e_x + mu a_x - mu|c| - |d| - |bt_x| - 1
///                      E2 = -mu bt_x + 2 mu d + mu e_t + W mu e + bt_t - W bt - mu|c| - |d| - |bt_x| - mu
inline EnergyReport energy_monitor(const GridFunction2D& h, const CoefficientField& cf, const GridFunction2D& f,
                                   const std::vector<double>& h0, const std::vector<double>& h1,
                                   const EnergyWeights& w = {}) {
  require(w.nu > 0 && w.chi > 0 && w.mu > 0, "energy_monitor: weights must be positive");
  const SpaceTimeGrid& g = cf.grid;
  EnergyReport rep;
  const GridFunction2D ht = d_t(h, g), hx = d_x(h, g);
  const std::vector<double> h0x = diff1(h0, g.dxi());
  const detail::CoeffDerivs cd = detail::coeff_derivs(cf);
  const double dxi = g.dxi(), dt = g.dt();
  auto qw = [&](int i) { return (i == 0 || i == g.nx) ? 0.5 : 1.0; };
  auto tw = [&](int n) { return (n == 0 || n == g.nt) ? 0.5 : 1.0; };
  for (int n = 0; n <= g.nt; ++n) {
    const double s = g.s(n);
    const double weight = std::exp(-w.nu / std::pow(s, w.chi));
    const double W = w.chi * w.nu / std::pow(s, w.chi + 1);
    double eh = 0, ee = 0;
    for (int i = 0; i <= g.nx; ++i) {
      const double a = cf.a(n, i), b = cf.b(n, i), c = cf.c(n, i), d = cf.d(n, i);
      const double dx = qw(i) * dxi * s;
      const double e2 = ht(n, i) * ht(n, i), x2 = hx(n, i) * hx(n, i);
      const double ff = f(n, i) * f(n, i);
      auto upd = [&](MarginSample& m, double v) {
        if (v < m.value) m = {v, g.t(n), g.xi(i), b};
      };
      if (b > 0) {
        eh += weight * (a * e2 + b * x2) * dx;
        rep.lhs_hyp += (e2 + x2) * dx * tw(n) * dt;
        rep.rhs_hyp += ff * dx * tw(n) * dt;
        if (n == 0) rep.rhs_hyp += (h1[i] * h1[i] + h0x[i] * h0x[i] / (s * s)) * dx;
        upd(rep.R7, -2 * c - 2 * cd.a_t(n, i) + W * a + cd.e_x(n, i) - std::abs(d) - std::abs(cd.b_x(n, i)) - 1);
        upd(rep.R8, -cd.b_t(n, i) + W * b - std::abs(d) - std::abs(cd.b_x(n, i)));
      } else {
        const double bt = -b, bt_t = -cd.b_t(n, i), bt_x = -cd.b_x(n, i);
        ee += weight * (a * e2 + bt * x2) * dx;
        rep.lhs_ell += (e2 + x2) * dx * tw(n) * dt;
        rep.rhs_ell += ff * dx * tw(n) * dt;
        if (n == 0) rep.rhs_ell += (h1[i] * h1[i] + h0x[i] * h0x[i] / (s * s)) * dx;
        upd(rep.E1, -2 * c - cd.a_t(n, i) + W * a + cd.e_x(n, i) + w.mu * cd.a_x(n, i) - w.mu * std::abs(c) -
                        std::abs(d) - std::abs(bt_x) - 1);
        upd(rep.E2, -w.mu * bt_x + 2 * w.mu * d + w.mu * cd.e_t(n, i) + W * w.mu * cf.e(n, i) + bt_t - W * bt -
                        w.mu * std::abs(c) - std::abs(d) - std::abs(bt_x) - w.mu);
      }
    }
    rep.trace.t.push_back(g.t(n));
    rep.trace.E_hyp.push_back(eh);
    rep.trace.E_ell.push_back(ee);
    const int ib = g.nx;
    rep.trace.flux_boundary.push_back(weight * (2 * cf.b(n, ib) * ht(n, ib) * hx(n, ib) + cf.e(n, ib) * ht(n, ib) * ht(n, ib)));
    // hyperbolic-side limit of R8 on the curve: interpolate -b_t - |d| - |b_x| to the zero of b
    const SignChange sc = locate_sign_change(cf, n);
    double fl = 0;
    if (sc.count > 0) {
      const int i0 = sc.cell;
      const double lam = (sc.xi - g.xi(i0)) / dxi;
      auto lerp = [&](const GridFunction2D& F) { return (1 - lam) * F(n, i0) + lam * F(n, i0 + 1); };
      const double v = -lerp(cd.b_t) - std::abs(lerp(cf.d)) - std::abs(lerp(cd.b_x));
      if (v < rep.R8_curve.value) rep.R8_curve = {v, g.t(n), sc.xi, 0.0};
      fl = weight * lerp(cf.e) * std::pow(lerp(ht), 2);
    }
    rep.trace.flux_curve.push_back(fl);
  }
  rep.C_hyp = detail::ratio(rep.lhs_hyp, rep.rhs_hyp);
  rep.C_ell = detail::ratio(rep.lhs_ell, rep.rhs_ell);
  auto pos = [](const MarginSample& m) { return !std::isfinite(m.value) || m.value > 0; };
  rep.verdict = pos(rep.R7) && pos(rep.R8) && pos(rep.E1) && pos(rep.E2) && pos(rep.R8_curve);
  return rep;
}

// ---------------------------------------------------------------------------
// Higher-order monitor

struct HigherOrderReport {
  int k = 2;
  double lhs_hyp = 0, rhs_hyp = 0, C_hyp = 0;
  double lhs_ell = 0, rhs_ell = 0, C_ell = 0;
  double max_abs_derivative = 0;  // max |d_t d_x^k h| over the grid
};

/// d^{k+1} = d_t d_x^k in physical coordinates, by repeated differencing.
inline GridFunction2D d_k1(const GridFunction2D& u, const SpaceTimeGrid& g, int k) {
  GridFunction2D v = u;
  for (int m = 0; m < k; ++m) v = d_x(v, g);
  return d_t(v, g);
}

inline HigherOrderReport higher_order_monitor(const GridFunction2D& h, const CoefficientField& cf,
                                              const GridFunction2D& f, int k) {
  const SpaceTimeGrid& g = cf.grid;
  require(k >= 2, "higher_order_monitor: k must be >= 2");
  if (g.nx < 4 * (k + 2) || g.nt < 8) throw ResolutionError("higher_order_monitor: grid too coarse for order k");
  HigherOrderReport rep;
  rep.k = k;
  const GridFunction2D p = d_k1(h, g, k);
  const GridFunction2D qt = d_t(p, g), qx = d_x(p, g), fk = d_k1(f, g, k);
  rep.max_abs_derivative = p.max_abs();
  const double dxi = g.dxi(), dt = g.dt();
  for (int n = 0; n <= g.nt; ++n) {
    const double s = g.s(n), wt = (n == 0 || n == g.nt) ? 0.5 : 1.0;
    for (int i = 0; i <= g.nx; ++i) {
      const double dx = ((i == 0 || i == g.nx) ? 0.5 : 1.0) * dxi * s;
      const double lhs = (qt(n, i) * qt(n, i) + qx(n, i) * qx(n, i)) * dx * wt * dt;
      double rhs = fk(n, i) * fk(n, i) * dx * wt * dt;
      if (n == 0) rhs += (qt(0, i) * qt(0, i) + qx(0, i) * qx(0, i)) * dx;
      if (cf.b(n, i) > 0) {
        rep.lhs_hyp += lhs;
        rep.rhs_hyp += rhs;
      } else {
        rep.lhs_ell += lhs;
        rep.rhs_ell += rhs;
      }
    }
  }
  rep.C_hyp = detail::ratio(rep.lhs_hyp, rep.rhs_hyp);
  rep.C_ell = detail::ratio(rep.lhs_ell, rep.rhs_ell);
  return rep;
}

/// Physical-jet fields of h by composed difference operators.
struct JetFields {
  GridFunction2D u, t, x, tt, tx, xx;
};

inline JetFields jet_fields(const GridFunction2D& h, const SpaceTimeGrid& g) {
  JetFields J;
  J.u = h;
  J.t = d_t(h, g);
  J.x = d_x(h, g);
  J.tt = d_t(J.t, g);
  J.tx = d_x(J.t, g);
  J.xx = d_x(J.x, g);
  return J;
}

/// Applies a h_tt - b h_xx - c h_t + d h_x - e h_tx with composed difference operators.
inline GridFunction2D apply_operator_fd(const JetFields& J, const CoefficientField& cf) {
  const SpaceTimeGrid& g = cf.grid;
  GridFunction2D out(g.nt, g.nx);
  for (int n = 0; n <= g.nt; ++n)
    for (int i = 0; i <= g.nx; ++i)
      out(n, i) = cf.a(n, i) * J.tt(n, i) - cf.b(n, i) * J.xx(n, i) - cf.c(n, i) * J.t(n, i) +
                  cf.d(n, i) * J.x(n, i) - cf.e(n, i) * J.tx(n, i);
  return out;
}

/// Commuted source f_k = d^{k+1} f minus the Leibniz commutator [d^{k+1}, L] h, d^{k+1} = d_t d_x^k.
inline GridFunction2D commuted_source(const GridFunction2D& h, const CoefficientField& cf, const GridFunction2D& f,
                                      int k) {
  const SpaceTimeGrid& g = cf.grid;
  const JetFields J = jet_fields(h, g);
  GridFunction2D out = d_k1(f, g, k);
  // L = sum sgn * coef * jet; jets in the same order as the coefficients below
  const GridFunction2D* coef[5] = {&cf.a, &cf.b, &cf.c, &cf.d, &cf.e};
  const GridFunction2D* jet[5] = {&J.tt, &J.xx, &J.t, &J.x, &J.tx};
  const double sgn[5] = {1, -1, -1, 1, -1};
  std::vector<double> binom(k + 1, 1.0);
  for (int m = 1; m <= k; ++m) binom[m] = binom[m - 1] * (k - m + 1) / m;
  for (int q = 0; q < 5; ++q) {
    // dx^m of the coefficient and of the jet for m = 0..k
    std::vector<GridFunction2D> cx(k + 1), jx(k + 1);
    cx[0] = *coef[q];
    jx[0] = *jet[q];
    for (int m = 1; m <= k; ++m) {
      cx[m] = d_x(cx[m - 1], g);
      jx[m] = d_x(jx[m - 1], g);
    }
    for (int a1 = 0; a1 <= 1; ++a1) {
      for (int a2 = 0; a2 <= k; ++a2) {
        if (a1 == 0 && a2 == 0) continue;
        const GridFunction2D cpart = a1 ? d_t(cx[a2], g) : cx[a2];
        const GridFunction2D jpart = a1 ? jx[k - a2] : d_t(jx[k - a2], g);
        for (std::size_t z = 0; z < out.data().size(); ++z)
          out.data()[z] -= sgn[q] * binom[a2] * cpart.data()[z] * jpart.data()[z];
      }
    }
  }
  return out;
}

}  // namespace bornlab
