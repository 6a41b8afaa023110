#include <gtest/gtest.h>

#include <random>

#include <bornlab/exact_family.hpp>

#include "oracle_values.hpp"

using namespace bornlab;

namespace {
void expect_jet(const Jet2& j, const double (&v)[6], double rel) {
  const double got[6] = {j.u, j.u_t, j.u_x, j.u_tt, j.u_tx, j.u_xx};
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(got[k], v[k], rel * (1 + std::abs(v[k]))) << "component " << k;
}

double scaled_bi(const Jet2& j) {
  const double m = std::abs(j.u_tt * (1 + j.u_x * j.u_x)) + std::abs(j.u_xx * (1 - j.u_t * j.u_t)) +
                   std::abs(2 * j.u_t * j.u_x * j.u_tx);
  return std::abs(bi_residual(j)) / std::max(m, 1e-300);
}
}  // namespace

TEST(ExactFamily, CentreOfUnitMember) {
  const Jet2 j = eval_uk({1, 1}, 0, 0);
  EXPECT_EQ(j.u, 0.0);
  EXPECT_EQ(j.u_t, 0.0);
  EXPECT_DOUBLE_EQ(j.u_x, 2.0);
}

TEST(ExactFamily, OracleJets) {
  expect_jet(eval_uk({1, 1}, 0, 0.5),
             {oracle::uk_a_u, oracle::uk_a_ut, oracle::uk_a_ux, oracle::uk_a_utt, oracle::uk_a_utx, oracle::uk_a_uxx}, 1e-14);
  expect_jet(eval_uk({-2, 0.5}, 0.1, -0.2),
             {oracle::uk_b_u, oracle::uk_b_ut, oracle::uk_b_ux, oracle::uk_b_utt, oracle::uk_b_utx, oracle::uk_b_uxx}, 1e-14);
}

TEST(ExactFamily, CentreLineAndGradient) {
  for (double k : {1.0, -0.5, 3.0})
    for (double t : {0.0, 0.5, 0.99}) {
      const Jet2 j = eval_uk({k, 1}, t, 0);
      EXPECT_EQ(j.u, 0.0);
      EXPECT_NEAR(j.u_x * (1 - t), 2 * k, 1e-12 * std::abs(k));
    }
}

TEST(ExactFamily, Preconditions) {
  EXPECT_THROW(SelfSimilarParams(0, 1), PreconditionError);
  EXPECT_THROW(SelfSimilarParams(1, -1), PreconditionError);
  EXPECT_THROW(eval_uk({1, 1}, 1, 0), DomainError);
  EXPECT_THROW(eval_uk({1, 1}, 0.5, 0.5), DomainError);
}

TEST(BornInfeld, ExactFamilyIsASolution) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (int m = 0; m < 2000; ++m) {
    const double k = 6 * U(rng) - 3, T = 0.2 + 3 * U(rng), t = 0.999 * T * U(rng), s = T - t;
    const double x = (2 * U(rng) - 1) * 0.999 * s;
    if (std::abs(k) < 1e-3) continue;
    const Jet2 j = eval_uk({k, T}, t, x);
    EXPECT_LE(scaled_bi(j), 1e-9);
    EXPECT_LE(std::abs(wave_residual(j)), 1e-9 * (std::abs(j.u_tt) + std::abs(j.u_xx)));
  }
}

TEST(BornInfeld, ZeroAndPolynomialJets) {
  EXPECT_EQ(bi_residual(Jet2{}), 0.0);
  EXPECT_EQ(wave_residual(Jet2{}), 0.0);
  // u = t^2 + x^2 and u = t^2 at (0, 0)
  EXPECT_EQ(wave_residual(Jet2{0, 0, 0, 2, 0, 2}), 0.0);
  EXPECT_EQ(wave_residual(Jet2{0, 0, 0, 2, 0, 0}), 2.0);
}

TEST(BornInfeld, TravellingWavesOfCubic) {
  // u = g(t+x) - g(t-x), g(s) = s^3, at (0.3, 0.2)
  const double a = 0.5, b = 0.1;
  const Jet2 j{a * a * a - b * b * b, 3 * a * a - 3 * b * b, 3 * a * a + 3 * b * b,
               6 * a - 6 * b,         6 * a + 6 * b,         6 * a - 6 * b};
  EXPECT_NEAR(wave_residual(j), 0.0, 1e-15);
  EXPECT_NEAR(bi_residual(j), oracle::bi_gminus, 1e-13);
  // F(t+x) + G(t-x): residual 4 (F'' G'^2 + G'' F'^2), with F = g, G = -g
  EXPECT_NEAR(bi_residual(j), 4 * (6 * a * 9 * b * b * b * b + (-6 * b) * 9 * a * a * a * a), 1e-13);
  // a single wave g(t+x) solves both
  const Jet2 one{a * a * a, 3 * a * a, 3 * a * a, 6 * a, 6 * a, 6 * a};
  EXPECT_NEAR(bi_residual(one), 0.0, 1e-14);
}

TEST(Timelike, ClassificationAndClosedForm) {
  const Jet2 j = eval_uk({1, 1}, 0, 0.5);
  EXPECT_NEAR(timelike_q(j), oracle::uk_a_q, 1e-13);
  EXPECT_EQ(classify_singularity(j), SingularityType::Timelike);
  EXPECT_NEAR(timelike_q(eval_uk({-2, 0.5}, 0.1, -0.2)), oracle::uk_b_q, 1e-11);
  EXPECT_EQ(timelike_q(Jet2{}), 1.0);
  EXPECT_EQ(classify_singularity(Jet2{}), SingularityType::Timelike);
  EXPECT_EQ(classify_singularity(Jet2{0, 1, 0, 0, 0, 0}), SingularityType::Lightlike);
  EXPECT_EQ(classify_singularity(Jet2{0, 2, 0, 0, 0, 0}), SingularityType::Spacelike);
}

TEST(Timelike, QMatchesFormulaEverywhere) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int m = 0; m < 1000; ++m) {
    const double k = 4 * U(rng) - 2, T = 0.3 + U(rng), t = 0.99 * T * U(rng), s = T - t, x = (2 * U(rng) - 1) * 0.99 * s;
    const double q = timelike_q(eval_uk({k, T}, t, x));
    EXPECT_GT(q, 0);
    EXPECT_NEAR(q, 1 + 4 * k * k / (s * s - x * x), 1e-10 * q);
  }
}

TEST(SteadyProfile, OdeIdentity) {
  EXPECT_EQ(steady_ode_residual(2, 0), 0.0);
  const double h = 1e-6;
  EXPECT_NEAR((steady_profile(2, h) - steady_profile(2, -h)) / (2 * h), 4.0, 1e-8);
  EXPECT_NEAR(steady_ode_residual(1, 0.7), 0.0, 1e-12);
  EXPECT_NEAR(steady_ode_residual(-3, -0.9), 0.0, 1e-12);
  for (int i = 0; i <= 198; ++i) EXPECT_NEAR(steady_ode_residual(1, -0.99 + 0.01 * i), 0.0, 1e-12);
  EXPECT_THROW(steady_ode_residual(1, 1.0), DomainError);
}

TEST(SteadyProfile, ComovingSliceIsStationary) {
  const SelfSimilarParams p(1.5, 2);
  for (double xi : {0.1, 0.5, 0.9})
    for (double t : {0.0, 1.0, 1.9}) EXPECT_NEAR(eval_uk(p, t, xi * (p.T - t)).u, steady_profile(1.5, xi), 1e-13);
}

TEST(ScalingOrbit, IdentityAndHomogeneity) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int m = 0; m < 100; ++m) {
    const Jet2 j{U(rng), U(rng), U(rng), U(rng), U(rng), U(rng)};
    const Jet2 id = scaling_orbit(j, 1);
    EXPECT_EQ(id.u, j.u);
    EXPECT_EQ(id.u_tx, j.u_tx);
    for (double lam : {0.5, 2.0}) EXPECT_NEAR(bi_residual(scaling_orbit(j, lam)), lam * bi_residual(j), 1e-14);
  }
}

TEST(ScalingOrbit, MapsFamilyMembersToFamilyMembers) {
  const SelfSimilarParams p(1.2, 1);
  for (double lam : {0.5, 1.5, 3.0})
    for (double t : {0.0, 0.1})
      for (double x : {-0.1, 0.05, 0.1}) {
        const Jet2 a = scaling_orbit(eval_uk(p, lam * t, lam * x), lam);
        const Jet2 b = eval_uk({p.k / lam, p.T / lam}, t, x);
        EXPECT_NEAR(a.u, b.u, 1e-10 * (1 + std::abs(b.u)));
        EXPECT_NEAR(a.u_x, b.u_x, 1e-10 * (1 + std::abs(b.u_x)));
        EXPECT_NEAR(a.u_tt, b.u_tt, 1e-10 * (1 + std::abs(b.u_tt)));
      }
}
