#include <gtest/gtest.h>

#include <bornlab/harness/config.hpp>
#include <bornlab/harness/experiments.hpp>
#include <bornlab/harness/io.hpp>

using namespace bornlab;
using namespace bornlab::harness;

TEST(Config, SectionsAndFallback) {
  const auto c = parse_config("[common]\nseed = 5\nk = 2\n[blowup]\nk = -1\nresolutions = 128 256\n", "blowup");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.k, -1.0);
  EXPECT_EQ(c.resolutions, (std::vector<int>{128, 256}));
  EXPECT_EQ(parse_config("[common]\nk = 2\n", "coeffs").k, 2.0);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_config("[common]\nk = 0\n", "blowup"), PreconditionError);
  EXPECT_THROW(parse_config("[common]\nT = abc\n", "blowup"), PreconditionError);
  EXPECT_THROW(parse_config("[common]\ndelta = 1.5\n", "blowup"), PreconditionError);
  EXPECT_THROW(parse_config("[common\n", "blowup"), PreconditionError);
}

TEST(Config, ExperimentDefaults) {
  EXPECT_EQ(default_config("nash").epsilons, std::vector<double>{1e-4});
  EXPECT_EQ(default_config("stability").n, 512);
}

TEST(Csv, SeventeenDigitsAndHeader) {
  const Table t{"x", {"a", "b"}, {{0.1, 1.0 / 3}}};
  EXPECT_EQ(to_csv(t), "a,b\n0.10000000000000001,0.33333333333333331\n");
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(VerifyExact, DefaultPassesAndZeroTolFails) {
  auto cfg = default_config("verify-exact");
  cfg.samples = 200;
  EXPECT_TRUE(run_verify_exact(cfg).passed());
  cfg.tol = 0;
  EXPECT_FALSE(run_verify_exact(cfg).passed());
}

TEST(VerifyExact, OtherFamilyMember) {
  auto cfg = parse_config("[common]\nk = -2\nT = 0.5\nT_bar = 0.45\nsamples = 200\n", "verify-exact");
  EXPECT_TRUE(run_verify_exact(cfg).passed());
}

TEST(Determinism, SameSeedSameBytes) {
  auto cfg = default_config("verify-exact");
  cfg.samples = 100;
  const auto a = run_verify_exact(cfg), b = run_verify_exact(cfg);
  ASSERT_EQ(a.tables.size(), b.tables.size());
  for (std::size_t i = 0; i < a.tables.size(); ++i) EXPECT_EQ(to_csv(a.tables[i]), to_csv(b.tables[i]));
  cfg.seed += 1;
  EXPECT_NE(to_csv(run_verify_exact(cfg).tables[0]), to_csv(a.tables[0]));
}

TEST(Determinism, WorkerCountDoesNotChangeOutput) {
  auto cfg = default_config("stability");
  cfg.n = 64;
  cfg.T_bar = 0.5;
  const auto a = run_stability(cfg);
  cfg.jobs = 3;
  const auto b = run_stability(cfg);
  EXPECT_EQ(to_csv(a.tables[0]), to_csv(b.tables[0]));
  EXPECT_EQ(to_svg(a.plots[0]), to_svg(b.plots[0]));
}

TEST(Artifacts, ManifestListsHashes) {
  const fs::path dir = fs::temp_directory_path() / "bornlab_artifacts_test";
  fs::remove_all(dir);
  ExperimentResult r;
  r.name = "demo";
  r.check("c", 1, 2, true);
  r.tables.push_back({"t", {"x"}, {{1.5}}});
  r.plots.push_back({"p", "title", "x", "y", {{"s", {0, 1}, {1, 2}}}, false});
  write_artifacts(r, dir, {{"seed", "1"}});
  const std::string man = read_file(dir / "manifest.txt");
  EXPECT_NE(man.find(sha256_hex(read_file(dir / "t.csv")) + "  t.csv"), std::string::npos);
  EXPECT_NE(man.find("seed = 1"), std::string::npos);
  EXPECT_NE(man.find("pass"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "p.svg"));
  fs::remove_all(dir);
}

TEST(ParallelMap, OrderAndExceptions) {
  const auto v = parallel_map<int>(10, 4, [](int i) { return i * i; });
  for (int i = 0; i < 10; ++i) EXPECT_EQ(v[i], i * i);
  EXPECT_THROW(parallel_map<int>(5, 2, [](int i) -> int { if (i == 3) throw std::runtime_error("x"); return i; }),
               std::runtime_error);
}
