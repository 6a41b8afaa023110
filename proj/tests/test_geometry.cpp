#include <gtest/gtest.h>

#include <random>

#include <bornlab/geometry.hpp>

#include "oracle_values.hpp"

using namespace bornlab;

TEST(Similarity, OriginMapsToZero) {
  const auto p = to_similarity(0, 0, 1);
  EXPECT_EQ(p.tau, 0.0);
  EXPECT_EQ(p.rho, 0.0);
}

TEST(Similarity, HalfwayPoint) {
  const auto p = to_similarity(0.5, 0.25, 1);
  EXPECT_NEAR(p.tau, oracle::tau_half, 1e-15);
  EXPECT_NEAR(p.rho, 0.5, 1e-15);
  const auto q = from_similarity({oracle::tau_half, 0.5}, 1);
  EXPECT_NEAR(q.t, 0.5, 1e-15);
  EXPECT_NEAR(q.x, 0.25, 1e-15);
}

TEST(Similarity, RoundTripRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 100; ++k) {
    const double T = 0.5 + 2 * U(rng), t = 0.99 * T * U(rng), s = T - t, x = (2 * U(rng) - 1) * 0.999 * s;
    const auto q = from_similarity(to_similarity(t, x, T), T);
    EXPECT_NEAR(q.t, t, 1e-12 * std::max(1.0, std::abs(t)));
    EXPECT_NEAR(q.x, x, 1e-12 * std::max(1.0, std::abs(x)));
  }
}

TEST(Similarity, EdgeRhoStaysInsideCone) {
  for (double r : {1 - 1e-9, -(1 - 1e-9)}) {
    const auto q = from_similarity({0.3, r}, 1);
    EXPECT_LT(std::abs(q.x), 1 - q.t);
  }
}

TEST(Similarity, RejectsPointsOutsideCone) {
  EXPECT_THROW(to_similarity(1, 0, 1), DomainError);
  EXPECT_THROW(to_similarity(0.5, 0.5, 1), DomainError);
}

TEST(Rectangle, MapsSlicesToFixedInterval) {
  const ConeDomain dom(1, 0.9, 0.9);
  EXPECT_EQ(cone_to_rectangle(0, 0, dom).xi, 0.0);
  for (double t : {0.0, 0.3, 0.9}) EXPECT_NEAR(cone_to_rectangle(t, 0.9 * (1 - t), dom).xi, 0.9, 1e-15);
  EXPECT_NEAR(cone_to_rectangle(0.5, 0.2, dom).xi, 0.4, 1e-15);
  EXPECT_THROW(cone_to_rectangle(0.5, 0.46, dom), DomainError);
  EXPECT_THROW(cone_to_rectangle(0.95, 0.0, dom), DomainError);
}

TEST(Rectangle, MonotoneInX) {
  const ConeDomain dom(1, 0.9, 0.9);
  double prev = -1;
  for (int i = 0; i <= 50; ++i) {
    const double xi = cone_to_rectangle(0.4, 0.9 * 0.6 * i / 50, dom).xi;
    EXPECT_GT(xi, prev);
    prev = xi;
  }
}

TEST(Rectangle, JetTransformRoundTrip) {
  const Jet2 r{0.3, -1.2, 0.7, 2.5, -0.4, 1.9};
  const Jet2 back = physical_to_rect(rect_to_physical(r, 0.35, 0.6), 0.35, 0.6);
  EXPECT_NEAR(back.u, r.u, 1e-14);
  EXPECT_NEAR(back.u_t, r.u_t, 1e-14);
  EXPECT_NEAR(back.u_x, r.u_x, 1e-14);
  EXPECT_NEAR(back.u_tt, r.u_tt, 1e-13);
  EXPECT_NEAR(back.u_tx, r.u_tx, 1e-13);
  EXPECT_NEAR(back.u_xx, r.u_xx, 1e-13);
}

// h(t, xi) = t^2 xi^3 seen in physical variables: x^3 t^2 / s^3
TEST(Rectangle, JetTransformMatchesChainRule) {
  const double T = 1, t = 0.3, s = T - t, xi = 0.4, x = xi * s;
  const Jet2 r{t * t * xi * xi * xi, 2 * t * xi * xi * xi, 3 * t * t * xi * xi, 2 * xi * xi * xi, 6 * t * xi * xi, 6 * t * t * xi};
  const Jet2 p = rect_to_physical(r, xi, s);
  auto h = [&](double tt, double xx) { return tt * tt * std::pow(xx / (T - tt), 3); };
  const double e = 1e-4;
  EXPECT_NEAR(p.u_t, (h(t + e, x) - h(t - e, x)) / (2 * e), 1e-7);
  EXPECT_NEAR(p.u_x, (h(t, x + e) - h(t, x - e)) / (2 * e), 1e-7);
  EXPECT_NEAR(p.u_tt, (h(t + e, x) - 2 * h(t, x) + h(t - e, x)) / (e * e), 1e-5);
  EXPECT_NEAR(p.u_xx, (h(t, x + e) - 2 * h(t, x) + h(t, x - e)) / (e * e), 1e-5);
  EXPECT_NEAR(p.u_tx, (h(t + e, x + e) - h(t + e, x - e) - h(t - e, x + e) + h(t - e, x - e)) / (4 * e * e), 1e-5);
}

TEST(DegenerateCurve, ImageInsideRectangle) {
  const ConeDomain dom(1, 0.9, 0.9);
  for (int n = 0; n <= 90; ++n) {
    const double s = dom.s(0.01 * n), xi = degenerate_curve_xi(s);
    EXPECT_GT(xi, 0);
    EXPECT_LT(xi, dom.delta);
    EXPECT_NEAR(xi * s, degenerate_curve_x(s), 1e-15);
  }
}

TEST(Grids, Preconditions) {
  EXPECT_THROW(Grid1D(0, 1, 7), PreconditionError);
  EXPECT_THROW(Grid1D(1, 0, 16), PreconditionError);
  EXPECT_THROW(ConeDomain(1, 1.0, 0.5), PreconditionError);
  EXPECT_THROW(ConeDomain(1, 0.9, 1.0), PreconditionError);
  const Grid1D g(-1, 1, 8);
  EXPECT_DOUBLE_EQ(g.h(), 0.25);
  EXPECT_DOUBLE_EQ(g.node(8), 1.0);
}
