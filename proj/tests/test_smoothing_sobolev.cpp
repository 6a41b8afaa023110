#include <gtest/gtest.h>

#include <random>

#include <bornlab/harness/experiments.hpp>
#include <bornlab/smoothing_sobolev.hpp>

#include "oracle_values.hpp"

using namespace bornlab;

namespace {
std::vector<double> sample(const Grid1D& g, const std::function<double(double)>& f) {
  std::vector<double> v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = f(g.node(i));
  return v;
}
}  // namespace

TEST(SobolevNorm, ZeroAndSine) {
  const Grid1D g(0, 1, 512);
  for (int s = 0; s <= 3; ++s) EXPECT_EQ(h_norm(std::vector<double>(513, 0.0), g, s), 0.0);
  const auto f = sample(g, [](double x) { return std::sin(M_PI * x); });
  EXPECT_NEAR(h_norm(f, g, 0), oracle::h0_sin, 1e-4);
  EXPECT_NEAR(h_norm(f, g, 1), oracle::h1_sin, 1e-3);
  EXPECT_NEAR(h_norm(f, g, 2), oracle::h2_sin, 1e-2);
}

TEST(SobolevNorm, MonotoneInOrder) {
  const Grid1D g(0, 1, 128);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N;
  for (int r = 0; r < 20; ++r) {
    std::vector<double> f(129);
    for (double& v : f) v = N(rng);
    for (int s = 0; s < 3; ++s) EXPECT_GE(h_norm(f, g, s + 1), h_norm(f, g, s));
  }
  EXPECT_THROW(h_norm(std::vector<double>(129, 0.0), g, 33), ResolutionError);
}

TEST(C2sNorm, TimesSine) {
  const Grid1D g(0, 1, 512);
  const int nt = 64;
  const double dt = 1.0 / nt;
  GridFunction2D u(nt, 512);
  for (int n = 0; n <= nt; ++n)
    for (int i = 0; i <= 512; ++i) u(n, i) = n * dt * std::sin(M_PI * g.node(i));
  EXPECT_NEAR(c2s_norm(u, dt, g, 2), oracle::c2s_tsin, 1e-2 * oracle::c2s_tsin);
  EXPECT_NEAR(c2s_norm(2.5 * u, dt, g, 2), 2.5 * c2s_norm(u, dt, g, 2), 1e-12 * c2s_norm(u, dt, g, 2));
  EXPECT_EQ(c2s_norm(GridFunction2D(nt, 512), dt, g, 2), 0.0);
}

TEST(Smoothing, IdentityWhenAllModesKept) {
  const Grid1D g(0, 0.9, 64);
  const auto f = sample(g, [](double x) { return std::exp(x) * std::sin(7 * x); });
  const auto p = SmoothingOperator(64 * M_PI / 0.9 + 1, g).apply(f);
  for (int i = 0; i <= 64; ++i) EXPECT_NEAR(p[i], f[i], 1e-12);
}

TEST(Smoothing, RemovesHighMode) {
  const Grid1D g(0, 1, 256);
  const auto f = sample(g, [](double x) { return std::cos(M_PI * x) + std::cos(20 * M_PI * x); });
  const auto p = SmoothingOperator(10 * M_PI, g).apply(f);
  for (int i = 0; i <= 256; ++i) EXPECT_NEAR(p[i], std::cos(M_PI * g.node(i)), 1e-10);
}

TEST(Smoothing, IsAProjection) {
  const Grid1D g(0, 0.9, 128);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N;
  std::vector<double> f(129);
  for (double& v : f) v = N(rng);
  for (double th : {2.0, 8.0, 32.0}) {
    const SmoothingOperator P(th, g);
    const auto a = P.apply(f), b = P.apply(a);
    for (int i = 0; i <= 128; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Smoothing, CutoffRule) {
  EXPECT_EQ(cutoff_mode(2, 0.9), 0);
  EXPECT_EQ(cutoff_mode(4, 0.9), 1);
  EXPECT_EQ(cutoff_mode(32, 0.9), 9);
}

TEST(Smoothing, AxiomsOnBandLimitedCorpus) {
  const Grid1D g(0, 0.9, 256);
  const auto corpus = harness::band_limited_corpus(g, 32, 4, 42);
  const AxiomReport r = smoothing_axiom_sweep(corpus, g, {2, 4, 8, 16, 32}, 3);
  EXPECT_LE(r.fitted_C(), 10.0);
  EXPECT_LE(r.max_projection_defect, 1e-12);
}
