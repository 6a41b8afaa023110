#include <gtest/gtest.h>

#include <bornlab/nonlinear_solver.hpp>

using namespace bornlab;

namespace {
double rhs_error(int n) {
  const SelfSimilarParams p(1, 1);
  const Grid1D g(0, 0.5, n);
  const FieldState st = exact_state(p, g, 0, Frame::Physical);
  const auto r = bi_rhs(st, BoundaryCondition::exact(p, Frame::Physical));
  double e = 0;
  for (int i = 1; i < n; ++i) e = std::max(e, std::abs(r[i] - eval_uk(p, 0, g.node(i)).u_tt));
  return e;
}

double evolve_error(int n, Frame frame, double L) {
  const SelfSimilarParams p(1, 1);
  const Grid1D g(0, L, n);
  const auto rep = evolve(exact_state(p, g, 0, frame), BoundaryCondition::exact(p, frame), 0.5);
  EXPECT_EQ(rep.terminated, Termination::ReachedTEnd);
  const FieldState ex = exact_state(p, g, 0.5, frame);
  double e = 0;
  for (int i = 0; i <= n; ++i) e = std::max(e, std::abs(rep.final_state.u[i] - ex.u[i]));
  return e;
}
}  // namespace

TEST(Rhs, ZeroState) {
  FieldState st;
  st.grid = Grid1D(0, 1, 32);
  st.u.assign(33, 0.0);
  st.v.assign(33, 0.0);
  for (double r : bi_rhs(st, BoundaryCondition::zero())) EXPECT_EQ(r, 0.0);
}

TEST(Rhs, ExactDataSecondOrder) {
  const double e1 = rhs_error(256), e2 = rhs_error(512);
  EXPECT_LT(e2, 1e-4);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(Rhs, TravellingWaveOfSine) {
  auto err = [](int n) {
    const Grid1D g(0, 1, n);
    FieldState st;
    st.grid = g;
    st.u.resize(n + 1), st.v.resize(n + 1);
    const double t = 0.3;
    for (int i = 0; i <= n; ++i) {
      const double x = g.node(i);
      st.u[i] = std::sin(t + x);
      st.v[i] = std::cos(t + x);
    }
    st.t = t;
    const auto r = bi_rhs(st, BoundaryCondition::zero());
    double e = 0;
    for (int i = 1; i < n; ++i) e = std::max(e, std::abs(r[i] + std::sin(t + g.node(i))));
    return e;
  };
  EXPECT_NEAR(err(128) / err(256), 4.0, 0.5);
}

TEST(Evolve, ZeroDataStaysZero) {
  FieldState st;
  st.grid = Grid1D(0, 1, 64);
  st.u.assign(65, 0.0);
  st.v.assign(65, 0.0);
  const auto rep = evolve(st, BoundaryCondition::zero(), 0.5);
  EXPECT_EQ(rep.terminated, Termination::ReachedTEnd);
  for (double v : rep.final_state.u) EXPECT_EQ(v, 0.0);
  for (double m : rep.mass) EXPECT_EQ(m, 0.0);
  for (double g : rep.grad_at_origin) EXPECT_EQ(g, 0.0);
}

TEST(Evolve, ExactDataComoving) { EXPECT_LE(evolve_error(1024, Frame::Comoving, 0.5), 1e-4); }

// the edge x = 0.1 stays timelike for u_k up to t = 0.5: one characteristic enters, one leaves
TEST(Evolve, ExactDataPhysical) { EXPECT_LE(evolve_error(1024, Frame::Physical, 0.1), 1e-4); }

TEST(Evolve, BlowUpRate) {
  const SelfSimilarParams p(1, 1);
  const Grid1D g(0, 0.5, 512);
  const auto rep = evolve(exact_state(p, g, 0, Frame::Comoving), BoundaryCondition::exact(p, Frame::Comoving), 0.95);
  ASSERT_EQ(rep.terminated, Termination::ReachedTEnd);
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    const double r = (1 - rep.times[k]) * rep.grad_at_origin[k];
    EXPECT_GE(r, 2 * 0.95);
    EXPECT_LE(r, 2 * 1.05);
  }
}

TEST(Cfl, ZeroStateIsLinearWave) {
  FieldState st;
  st.grid = Grid1D(0, 1, 100);
  st.u.assign(101, 0.0);
  st.v.assign(101, 0.0);
  const CflResult c = cfl_dt(st, false, 0.4);
  EXPECT_TRUE(c.timelike);
  EXPECT_NEAR(c.max_speed, 1.0, 1e-15);
  EXPECT_NEAR(c.dt, 0.4 * 0.01, 1e-15);
  EXPECT_THROW(step(st, BoundaryCondition::zero(), 2 * c.dt), PreconditionError);
}

// the comoving profile is stationary, so xi-speeds settle (near 1/2) and each step spans s * dxi physically
TEST(Cfl, ComovingStepsResolveShrinkingSlice) {
  const SelfSimilarParams p(1, 1);
  const Grid1D g(0, 0.9, 256);
  const CflResult a = cfl_dt(exact_state(p, g, 0.9, Frame::Comoving)), b = cfl_dt(exact_state(p, g, 0.95, Frame::Comoving));
  EXPECT_NEAR(a.max_speed, 0.5, 1e-2);
  EXPECT_NEAR(b.dt / a.dt, 1.0, 1e-2);
}

TEST(Cfl, NonTimelikeState) {
  FieldState st;
  st.grid = Grid1D(0, 1, 16);
  st.u.assign(17, 0.0);
  st.v.assign(17, 2.0);
  EXPECT_FALSE(cfl_dt(st).timelike);
  const auto rep = evolve(st, BoundaryCondition::periodic(), 0.1);
  EXPECT_EQ(rep.terminated, Termination::NonTimelike);
}

TEST(Mass, ConservedOnPeriodicRun) {
  auto drift = [](int n) {
    const Grid1D g(0, 1, n);
    FieldState st;
    st.grid = g;
    st.u.resize(n + 1), st.v.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double x = g.node(i);
      st.u[i] = 0.1 * std::sin(2 * M_PI * x);
      st.v[i] = 0.2 + 0.1 * std::cos(2 * M_PI * x);
    }
    const auto rep = evolve(st, BoundaryCondition::periodic(), 0.5);
    double d = 0;
    for (double m : rep.mass) d = std::max(d, std::abs(m - rep.mass.front()));
    return d;
  };
  const double a = drift(128), b = drift(256);
  EXPECT_NEAR(a / b, 4.0, 0.5);
  EXPECT_LE(b, 1e-5);
}
