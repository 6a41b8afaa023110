#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include "core.hpp"
#include "discrete_jet.hpp"
#include "geometry.hpp"

namespace bornlab {

inline double trapezoid(const std::vector<double>& f, double h) {
  double acc = 0;
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; ++i) acc += (i == 0 || i + 1 == n ? 0.5 : 1.0) * f[i];
  return acc * h;
}

inline int max_sobolev_order(const Grid1D& g) { return g.n / 4; }

/// Squared H^s norm: sum over i <= s of the trapezoid L^2 norm of D^i f.
inline double h_norm_sq(const std::vector<double>& f, const Grid1D& g, int s) {
  require(s >= 0, "h_norm: order must be nonnegative");
  require(static_cast<int>(f.size()) == g.size(), "h_norm: size mismatch");
  if (s > max_sobolev_order(g)) throw ResolutionError("h_norm: order too large for grid");
  std::vector<double> d = f, sq(f.size());
  double total = 0;
  for (int k = 0; k <= s; ++k) {
    if (k > 0) d = diff1(d, g.h());
    for (std::size_t i = 0; i < d.size(); ++i) sq[i] = d[i] * d[i];
    total += trapezoid(sq, g.h());
  }
  return total;
}

inline double h_norm(const std::vector<double>& f, const Grid1D& g, int s) { return std::sqrt(h_norm_sq(f, g, s)); }

/// sqrt of sup over time levels of sum_{i<=2} |d_t^i u|^2_{H^{s-i}}.
inline double c2s_norm(const GridFunction2D& u, double dt, const Grid1D& g, int s) {
  require(s >= 2, "c2s_norm: s must be >= 2");
  require(u.nx() == g.n, "c2s_norm: size mismatch");
  require(u.nt() >= 3, "c2s_norm: need at least 4 time levels");
  const GridFunction2D u1 = time_derivative(u, dt, 1), u2 = time_derivative(u, dt, 2);
  double sup = 0;
  for (int n = 0; n <= u.nt(); ++n) {
    const double v = h_norm_sq(u.slice(n), g, s) + h_norm_sq(u1.slice(n), g, s - 1) + h_norm_sq(u2.slice(n), g, s - 2);
    sup = std::max(sup, v);
  }
  return std::sqrt(sup);
}

/// Largest cosine mode index kept by Pi_theta on an interval of length L.
inline int cutoff_mode(double theta, double L) { return static_cast<int>(std::floor(theta * L / M_PI)); }

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Unnormalized DCT-I (FFTW REDFT00): F_k = f_0 + (-1)^k f_n + 2 sum f_j cos(pi j k / n).
inline std::vector<double> dct1(const std::vector<double>& f) {
  const int N = static_cast<int>(f.size());
  std::vector<double> in(f), out(N);
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    p = fftw_plan_r2r_1d(N, in.data(), out.data(), FFTW_REDFT00, FFTW_ESTIMATE);
  }
  fftw_execute(p);
  {
    std::lock_guard<std::mutex> lk(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
  return out;
}
}  // namespace detail

/// Pi_theta: cosine series of the even extension truncated at mode cutoff_mode(theta, L).
inline std::vector<double> smooth(const std::vector<double>& f, const Grid1D& g, double theta) {
  require(theta >= 1, "smooth: theta must be >= 1");
  const int n = g.n;
  const int K = cutoff_mode(theta, g.x_max - g.x_min);
  if (K >= n) return f;
  std::vector<double> F = detail::dct1(f);
  for (int k = K + 1; k <= n; ++k) F[k] = 0;
  std::vector<double> out = detail::dct1(F);
  for (double& v : out) v /= 2.0 * n;
  return out;
}

/// Low-rank factors of Pi_theta on a grid: Pi f = sum_k alpha_k v_k (u_k . f).
struct SmoothingOperator {
  double theta = 1;
  Grid1D grid;
  int K = 0;
  bool identity = false;
  std::vector<std::vector<double>> u, v;  // u[k][j], v[k][j]
  std::vector<double> alpha;

  SmoothingOperator() = default;
  SmoothingOperator(double theta_, const Grid1D& g) : theta(theta_), grid(g) {
    require(theta >= 1, "SmoothingOperator: theta must be >= 1");
    const int n = g.n;
    K = cutoff_mode(theta, g.x_max - g.x_min);
    identity = K >= n;
    if (identity) return;
    for (int k = 0; k <= K; ++k) {
      std::vector<double> uk(n + 1), vk(n + 1);
      for (int j = 0; j <= n; ++j) {
        const double c = std::cos(M_PI * j * k / n);
        vk[j] = c;
        uk[j] = (j == 0 || j == n) ? c : 2 * c;
      }
      u.push_back(std::move(uk));
      v.push_back(std::move(vk));
      alpha.push_back(k == 0 ? 1.0 / (2.0 * n) : 1.0 / n);
    }
  }

  std::vector<double> apply(const std::vector<double>& f) const {
    if (identity) return f;
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      double c = 0;
      for (std::size_t j = 0; j < f.size(); ++j) c += u[k][j] * f[j];
      c *= alpha[k];
      for (std::size_t j = 0; j < f.size(); ++j) out[j] += c * v[k][j];
    }
    return out;
  }
};

/// Fitted constants of the three smoothing inequalities over a corpus.
struct AxiomReport {
  double C_bound = 0;   // |Pi f|_{s1} <= C theta^{(s1-s2)+} |f|_{s2}
  double C_approx = 0;  // |Pi f - f|_{s1} <= C theta^{s1-s2} |f|_{s2}, s1 <= s2
  double C_deriv = 0;   // |d/dtheta Pi f|_{s1} <= C theta^{s1-s2-1} |f|_{s2}
  double C_bounded_low = 0;  // s1 <= s2 boundedness constant, max over theta
  double max_projection_defect = 0;

  double fitted_C() const { return std::max({C_bound, C_approx, C_deriv}); }
};

inline AxiomReport smoothing_axiom_sweep(const std::vector<std::vector<double>>& corpus, const Grid1D& g,
                                         const std::vector<double>& thetas, int s_max, double dtheta_rel = 0.5) {
  AxiomReport rep;
  for (const auto& f : corpus) {
    std::vector<double> fn(s_max + 1);
    for (int s = 0; s <= s_max; ++s) fn[s] = h_norm(f, g, s);
    const double f0 = std::sqrt(h_norm_sq(f, g, 0));
    for (double th : thetas) {
      const auto p = smooth(f, g, th);
      const auto pp = smooth(p, g, th);
      double defect = 0;
      for (std::size_t i = 0; i < f.size(); ++i) defect = std::max(defect, std::abs(pp[i] - p[i]));
      rep.max_projection_defect = std::max(rep.max_projection_defect, defect / std::max(f0, 1e-300));
      std::vector<double> diff(f.size()), dth(f.size());
      const auto pplus = smooth(f, g, th * (1 + dtheta_rel)), pminus = smooth(f, g, th * (1 - dtheta_rel));
      for (std::size_t i = 0; i < f.size(); ++i) {
        diff[i] = p[i] - f[i];
        dth[i] = (pplus[i] - pminus[i]) / (2 * dtheta_rel * th);
      }
      for (int s1 = 0; s1 <= s_max; ++s1) {
        const double np = h_norm(p, g, s1), nd = h_norm(diff, g, s1), nt = h_norm(dth, g, s1);
        for (int s2 = 0; s2 <= s_max; ++s2) {
          if (!(fn[s2] > 0)) continue;
          rep.C_bound = std::max(rep.C_bound, np / (std::pow(th, std::max(0, s1 - s2)) * fn[s2]));
          if (s1 <= s2) {
            rep.C_bounded_low = std::max(rep.C_bounded_low, np / fn[s2]);
            rep.C_approx = std::max(rep.C_approx, nd / (std::pow(th, s1 - s2) * fn[s2]));
          }
          rep.C_deriv = std::max(rep.C_deriv, nt / (std::pow(th, s1 - s2 - 1) * fn[s2]));
        }
      }
    }
  }
  return rep;
}

}  // namespace bornlab
