#pragma once

#include <array>
#include <vector>

#include "core.hpp"
#include "geometry.hpp"

namespace bornlab {

struct Tap {
  int n, i;
  double w;
};

/// Taps for (U, U_t, U_xi, U_tt, U_txi, U_xixi) at node (n, i) of a SpaceTimeGrid.
///
/// Interior levels use centered time differences and xi differences averaged over
/// levels n-1, n, n+1 with weights 1/4, 1/2, 1/4. The first and last levels and the
/// xi boundary nodes use one-sided second-order formulas.
using JetStencil = std::array<std::vector<Tap>, 6>;

namespace detail {

struct Taps1 {
  int off[4];
  double w[4];
  int len;
};

inline Taps1 first_diff(int k, int kmax, double h) {
  if (k == 0) return {{0, 1, 2, 0}, {-1.5 / h, 2.0 / h, -0.5 / h, 0}, 3};
  if (k == kmax) return {{0, -1, -2, 0}, {1.5 / h, -2.0 / h, 0.5 / h, 0}, 3};
  return {{-1, 1, 0, 0}, {-0.5 / h, 0.5 / h, 0, 0}, 2};
}

inline Taps1 second_diff(int k, int kmax, double h) {
  const double h2 = h * h;
  if (k == 0) return {{0, 1, 2, 3}, {2 / h2, -5 / h2, 4 / h2, -1 / h2}, 4};
  if (k == kmax) return {{0, -1, -2, -3}, {2 / h2, -5 / h2, 4 / h2, -1 / h2}, 4};
  return {{-1, 0, 1, 0}, {1 / h2, -2 / h2, 1 / h2, 0}, 3};
}

inline Taps1 level_average(int k, int kmax) {
  if (k == 0 || k == kmax) return {{0, 0, 0, 0}, {1, 0, 0, 0}, 1};
  return {{-1, 0, 1, 0}, {0.25, 0.5, 0.25, 0}, 3};
}

inline void outer(std::vector<Tap>& out, int n, int i, const Taps1& tn, const Taps1& ti) {
  for (int a = 0; a < tn.len; ++a)
    for (int b = 0; b < ti.len; ++b) out.push_back({n + tn.off[a], i + ti.off[b], tn.w[a] * ti.w[b]});
}

}  // namespace detail

inline JetStencil rect_jet_stencil(const SpaceTimeGrid& g, int n, int i) {
  using namespace detail;
  const Taps1 one{{0, 0, 0, 0}, {1, 0, 0, 0}, 1};
  const Taps1 t1 = first_diff(n, g.nt, g.dt()), t2 = second_diff(n, g.nt, g.dt());
  const Taps1 x1 = first_diff(i, g.nx, g.dxi()), x2 = second_diff(i, g.nx, g.dxi());
  const Taps1 av = level_average(n, g.nt);
  JetStencil st;
  st[0].push_back({n, i, 1.0});
  outer(st[1], n, i, t1, one);
  outer(st[2], n, i, av, x1);
  outer(st[3], n, i, t2, one);
  outer(st[4], n, i, t1, x1);
  outer(st[5], n, i, av, x2);
  return st;
}

inline Jet2 rect_jet(const GridFunction2D& h, const JetStencil& st) {
  double v[6];
  for (int k = 0; k < 6; ++k) {
    double acc = 0;
    for (const Tap& tp : st[k]) acc += tp.w * h(tp.n, tp.i);
    v[k] = acc;
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

inline Jet2 rect_jet(const GridFunction2D& h, const SpaceTimeGrid& g, int n, int i) {
  return rect_jet(h, rect_jet_stencil(g, n, i));
}

inline Jet2 physical_jet(const GridFunction2D& h, const SpaceTimeGrid& g, int n, int i) {
  return rect_to_physical(rect_jet(h, g, n, i), g.xi(i), g.s(n));
}

/// First derivative of a 1D array with central interior and one-sided boundary stencils.
inline std::vector<double> diff1(const std::vector<double>& f, double h) {
  const int n = static_cast<int>(f.size()) - 1;
  std::vector<double> d(f.size());
  for (int i = 0; i <= n; ++i) {
    const detail::Taps1 t = detail::first_diff(i, n, h);
    double acc = 0;
    for (int a = 0; a < t.len; ++a) acc += t.w[a] * f[i + t.off[a]];
    d[i] = acc;
  }
  return d;
}

/// Time derivative of order 1 or 2 of a trajectory at every node.
inline GridFunction2D time_derivative(const GridFunction2D& u, double dt, int order) {
  GridFunction2D out(u.nt(), u.nx());
  for (int n = 0; n <= u.nt(); ++n) {
    const detail::Taps1 t = order == 1 ? detail::first_diff(n, u.nt(), dt) : detail::second_diff(n, u.nt(), dt);
    for (int i = 0; i <= u.nx(); ++i) {
      double acc = 0;
      for (int a = 0; a < t.len; ++a) acc += t.w[a] * u(n + t.off[a], i);
      out(n, i) = acc;
    }
  }
  return out;
}

}  // namespace bornlab
