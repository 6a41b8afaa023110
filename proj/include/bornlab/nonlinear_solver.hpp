#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "core.hpp"
#include "exact_family.hpp"
#include "geometry.hpp"

namespace bornlab {

/// Physical: nodes are x. Comoving: nodes are xi with x = xi (T - t), and v = U_t at fixed xi.
enum class Frame { Physical, Comoving };

struct FieldState {
  Grid1D grid;
  double t = 0;
  std::vector<double> u, v;
  Frame frame = Frame::Physical;
  double T = 1.0;  // used by the comoving frame only

  double scale() const { return frame == Frame::Comoving ? T - t : 1.0; }
  double coord(int i) const { return frame == Frame::Comoving ? grid.node(i) : 0.0; }
};

/// Dirichlet traces (u, v) at the end nodes, or periodic identification u[n] = u[0].
struct BoundaryCondition {
  enum class Kind { Dirichlet, Periodic } kind = Kind::Dirichlet;
  std::function<std::pair<double, double>(double t, double coord)> trace;

  static BoundaryCondition periodic() { return {Kind::Periodic, nullptr}; }
  static BoundaryCondition zero() {
    return {Kind::Dirichlet, [](double, double) { return std::pair<double, double>{0.0, 0.0}; }};
  }
  /// Traces of u_k in the given frame.
  static BoundaryCondition exact(const SelfSimilarParams& p, Frame frame) {
    return {Kind::Dirichlet, [p, frame](double t, double c) {
              if (frame == Frame::Physical) {
                const Jet2 j = eval_uk(p, t, c);
                return std::pair<double, double>{j.u, j.u_t};
              }
              const double s = p.T - t;
              const Jet2 j = eval_uk(p, t, c * s);
              return std::pair<double, double>{j.u, j.u_t - c * j.u_x};
            }};
  }
};

enum class Termination { ReachedTEnd, NonTimelike, NonFinite, GradientBlowUp };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTEnd: return "reached_t_end";
    case Termination::NonTimelike: return "non_timelike";
    case Termination::NonFinite: return "non_finite";
    default: return "gradient_blow_up";
  }
}

struct EvolutionReport {
  std::vector<double> times, grad_at_origin, mass, cfl_dt_history;
  Termination terminated = Termination::ReachedTEnd;
  FieldState final_state;
};

namespace detail {

struct NodeDerivs {
  double ux, uxx, vx;
};

inline NodeDerivs node_derivs(const FieldState& st, int i, bool periodic) {
  const int n = st.grid.n;
  const double h = st.grid.h();
  const auto& u = st.u;
  const auto& v = st.v;
  if (periodic || (i > 0 && i < n)) {
    const int im = i == 0 ? n - 1 : i - 1;
    const int ip = i == n ? 1 : i + 1;
    return {(u[ip] - u[im]) / (2 * h), (u[ip] - 2 * u[i] + u[im]) / (h * h), (v[ip] - v[im]) / (2 * h)};
  }
  const int sgn = i == 0 ? 1 : -1;
  const int a = i, b = i + sgn, c = i + 2 * sgn, d = i + 3 * sgn;
  return {sgn * (-1.5 * u[a] + 2 * u[b] - 0.5 * u[c]) / h, (2 * u[a] - 5 * u[b] + 4 * u[c] - u[d]) / (h * h),
          sgn * (-1.5 * v[a] + 2 * v[b] - 0.5 * v[c]) / h};
}

/// Physical (u_t, u_x) at node i.
inline std::pair<double, double> physical_first(const FieldState& st, int i, bool periodic) {
  const NodeDerivs d = node_derivs(st, i, periodic);
  const double s = st.scale(), xi = st.coord(i);
  const double ux = d.ux / s;
  return {st.v[i] + xi * ux, ux};
}

inline void apply_bc(FieldState& st, const BoundaryCondition& bc) {
  const int n = st.grid.n;
  if (bc.kind == BoundaryCondition::Kind::Periodic) {
    st.u[n] = st.u[0];
    st.v[n] = st.v[0];
    return;
  }
  auto [ul, vl] = bc.trace(st.t, st.grid.node(0));
  auto [ur, vr] = bc.trace(st.t, st.grid.node(n));
  st.u[0] = ul, st.v[0] = vl, st.u[n] = ur, st.v[n] = vr;
}

}  // namespace detail

/// Grid-frame acceleration d v / d t. In the comoving frame
/// U_tt = u_tt - [2 (xi/s) V_xi + (2 xi / s^2) U_xi + (xi^2/s^2) U_xixi].
inline std::vector<double> bi_rhs(const FieldState& st, const BoundaryCondition& bc) {
  const int n = st.grid.n;
  const bool periodic = bc.kind == BoundaryCondition::Kind::Periodic;
  std::vector<double> acc(n + 1, 0.0);
  const double s = st.scale();
  const int lo = periodic ? 0 : 1, hi = periodic ? n - 1 : n - 1;
  for (int i = lo; i <= hi; ++i) {
    const detail::NodeDerivs d = detail::node_derivs(st, i, periodic);
    const double xi = st.coord(i);
    const double ux = d.ux / s, uxx = d.uxx / (s * s);
    const double ut = st.v[i] + xi * ux;
    const double utx = st.frame == Frame::Comoving ? (d.vx + ux + xi * d.uxx / s) / s : d.vx;
    const double utt = (uxx * (1 - ut * ut) + 2 * ut * ux * utx) / (1 + ux * ux);
    acc[i] = utt;
    if (st.frame == Frame::Comoving) acc[i] -= 2 * xi / s * d.vx + 2 * xi / (s * s) * d.ux + xi * xi / (s * s) * d.uxx;
  }
  if (periodic) acc[n] = acc[0];
  return acc;
}

struct CflResult {
  double dt = 0;
  bool timelike = true;
  double max_speed = 0;
};

/// dt = cfl h / max(1, max |c|) with grid-frame characteristic speeds.
inline CflResult cfl_dt(const FieldState& st, bool periodic = false, double cfl = 0.4) {
  double cmax = 0;
  const double s = st.scale();
  for (int i = 0; i <= st.grid.n; ++i) {
    auto [ut, ux] = detail::physical_first(st, i, periodic);
    const double q = 1 - ut * ut + ux * ux;
    if (!std::isfinite(q)) return {0, false, INFINITY};
    if (q < 0) return {0, false, 0};
    const double r = std::sqrt(q), a = 1 + ux * ux;
    const double cp = (-ut * ux + r) / a, cm = (-ut * ux - r) / a;
    const double xi = st.coord(i);
    cmax = std::max({cmax, std::abs(cp + xi) / s, std::abs(cm + xi) / s});
  }
  return {cfl * st.grid.h() / std::max(1.0, cmax), true, cmax};
}

inline FieldState step(const FieldState& st, const BoundaryCondition& bc, double dt, double cfl = 0.4) {
  const bool periodic = bc.kind == BoundaryCondition::Kind::Periodic;
  require(dt > 0, "step: dt must be positive");
  const CflResult c = cfl_dt(st, periodic, cfl);
  require(c.timelike, "step: state is not timelike");
  require(dt <= c.dt * (1 + 1e-12), "step: dt exceeds the CFL bound");
  const int n = st.grid.n;
  auto stage = [&](const FieldState& base, const std::vector<double>& du, const std::vector<double>& dv, double f) {
    FieldState y = base;
    y.t = st.t + f * dt;
    for (int i = 0; i <= n; ++i) {
      y.u[i] = st.u[i] + f * dt * du[i];
      y.v[i] = st.v[i] + f * dt * dv[i];
    }
    detail::apply_bc(y, bc);
    return y;
  };
  const std::vector<double> k1u = st.v, k1v = bi_rhs(st, bc);
  const FieldState y2 = stage(st, k1u, k1v, 0.5);
  const std::vector<double> k2u = y2.v, k2v = bi_rhs(y2, bc);
  const FieldState y3 = stage(st, k2u, k2v, 0.5);
  const std::vector<double> k3u = y3.v, k3v = bi_rhs(y3, bc);
  const FieldState y4 = stage(st, k3u, k3v, 1.0);
  const std::vector<double> k4u = y4.v, k4v = bi_rhs(y4, bc);
  FieldState out = st;
  out.t = st.t + dt;
  for (int i = 0; i <= n; ++i) {
    out.u[i] = st.u[i] + dt / 6 * (k1u[i] + 2 * k2u[i] + 2 * k3u[i] + k4u[i]);
    out.v[i] = st.v[i] + dt / 6 * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i]);
  }
  detail::apply_bc(out, bc);
  for (int i = 0; i <= n; ++i)
    if (!std::isfinite(out.u[i]) || !std::isfinite(out.v[i])) throw NonFiniteError("step: non-finite state");
  return out;
}

/// Physical d u / d x at the left end node (one-sided second order).
inline double grad_at_origin(const FieldState& st) {
  const double h = st.grid.h();
  return (-1.5 * st.u[0] + 2 * st.u[1] - 0.5 * st.u[2]) / h / st.scale();
}

/// Trapezoid of u_t / sqrt(1 - u_t^2 + u_x^2) over the physical slice.
inline double mass(const FieldState& st, bool periodic) {
  const int n = st.grid.n;
  double acc = 0;
  for (int i = 0; i <= n; ++i) {
    if (periodic && i == n) break;
    auto [ut, ux] = detail::physical_first(st, i, periodic);
    const double w = periodic ? 1.0 : ((i == 0 || i == n) ? 0.5 : 1.0);
    acc += w * ut / std::sqrt(1 - ut * ut + ux * ux);
  }
  return acc * st.grid.h() * st.scale();
}

struct EvolveOptions {
  double cfl = 0.4;
  double gradient_limit = 1e6;
  std::function<void(const FieldState&)> observer;
};

inline EvolutionReport evolve(const FieldState& initial, const BoundaryCondition& bc, double t_end,
                              const EvolveOptions& opt = {}) {
  require(t_end > initial.t, "evolve: t_end must exceed the initial time");
  require(initial.u.size() == static_cast<std::size_t>(initial.grid.size()) && initial.v.size() == initial.u.size(),
          "evolve: array sizes must match the grid");
  const bool periodic = bc.kind == BoundaryCondition::Kind::Periodic;
  EvolutionReport rep;
  FieldState st = initial;
  auto record = [&](double dt) {
    rep.times.push_back(st.t);
    rep.grad_at_origin.push_back(grad_at_origin(st));
    rep.mass.push_back(mass(st, periodic));
    rep.cfl_dt_history.push_back(dt);
    if (opt.observer) opt.observer(st);
  };
  const CflResult c0 = cfl_dt(st, periodic, opt.cfl);
  record(c0.dt);
  while (st.t < t_end) {
    const CflResult c = cfl_dt(st, periodic, opt.cfl);
    if (!c.timelike) {
      rep.terminated = std::isfinite(c.max_speed) ? Termination::NonTimelike : Termination::NonFinite;
      break;
    }
    const bool last = t_end - st.t <= c.dt;
    const double dt = last ? t_end - st.t : c.dt;
    try {
      st = step(st, bc, dt, opt.cfl);
    } catch (const NonFiniteError&) {
      rep.terminated = Termination::NonFinite;
      break;
    }
    if (last) st.t = t_end;
    record(c.dt);
    double gmax = 0;
    for (int i = 0; i <= st.grid.n; ++i) gmax = std::max(gmax, std::abs(detail::physical_first(st, i, periodic).second));
    if (gmax > opt.gradient_limit) {
      rep.terminated = Termination::GradientBlowUp;
      break;
    }
  }
  rep.final_state = st;
  return rep;
}

/// Samples u_k and its grid-frame velocity at time t on the given grid.
inline FieldState exact_state(const SelfSimilarParams& p, const Grid1D& g, double t, Frame frame) {
  FieldState st;
  st.grid = g;
  st.t = t;
  st.frame = frame;
  st.T = p.T;
  st.u.resize(g.size());
  st.v.resize(g.size());
  const double s = p.T - t;
  for (int i = 0; i <= g.n; ++i) {
    const double c = g.node(i);
    const double x = frame == Frame::Comoving ? c * s : c;
    const Jet2 j = eval_uk(p, t, x);
    st.u[i] = j.u;
    st.v[i] = frame == Frame::Comoving ? j.u_t - c * j.u_x : j.u_t;
  }
  return st;
}

}  // namespace bornlab
