#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bornlab {

/// Thrown when a point lies outside the domain an operation is defined on.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Thrown when a caller violates a documented precondition.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a grid is too coarse for the requested stencil or norm order.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

/// Value and all derivatives up to second order at a point.
struct Jet2 {
  double u = 0, u_t = 0, u_x = 0, u_tt = 0, u_tx = 0, u_xx = 0;

  Jet2 operator+(const Jet2& o) const {
    return {u + o.u, u_t + o.u_t, u_x + o.u_x, u_tt + o.u_tt, u_tx + o.u_tx, u_xx + o.u_xx};
  }
  Jet2 operator*(double c) const {
    return {c * u, c * u_t, c * u_x, c * u_tt, c * u_tx, c * u_xx};
  }
  double max_abs() const {
    double m = 0;
    for (double v : {u, u_t, u_x, u_tt, u_tx, u_xx}) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Dense (nt+1) x (nx+1) array indexed by (time level, space node).
class GridFunction2D {
 public:
  GridFunction2D() = default;
  GridFunction2D(int nt, int nx, double fill = 0.0)
      : nt_(nt), nx_(nx), data_(static_cast<std::size_t>(nt + 1) * (nx + 1), fill) {}

  int nt() const { return nt_; }
  int nx() const { return nx_; }
  double& operator()(int n, int i) { return data_[idx(n, i)]; }
  double operator()(int n, int i) const { return data_[idx(n, i)]; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  std::vector<double> slice(int n) const {
    return {data_.begin() + idx(n, 0), data_.begin() + idx(n, 0) + nx_ + 1};
  }
  void set_slice(int n, const std::vector<double>& v) {
    for (int i = 0; i <= nx_; ++i) (*this)(n, i) = v[i];
  }
  double max_abs() const {
    double m = 0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::size_t idx(int n, int i) const { return static_cast<std::size_t>(n) * (nx_ + 1) + i; }
  int nt_ = 0, nx_ = 0;
  std::vector<double> data_;
};

inline GridFunction2D operator+(GridFunction2D a, const GridFunction2D& b) {
  for (std::size_t k = 0; k < a.data().size(); ++k) a.data()[k] += b.data()[k];
  return a;
}
inline GridFunction2D operator-(GridFunction2D a, const GridFunction2D& b) {
  for (std::size_t k = 0; k < a.data().size(); ++k) a.data()[k] -= b.data()[k];
  return a;
}
inline GridFunction2D operator*(double c, GridFunction2D a) {
  for (double& v : a.data()) v *= c;
  return a;
}

}  // namespace bornlab
