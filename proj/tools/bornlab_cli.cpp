#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include <bornlab/harness/config.hpp>
#include <bornlab/harness/experiments.hpp>
#include <bornlab/harness/io.hpp>

using namespace bornlab::harness;

int main(int argc, char** argv) {
  CLI::App app{"Born-Infeld self-similar blow-up experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  app.add_option("--config", config_path, "INI file with [common] and per-experiment sections")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "overrides the configured seed");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  for (const char* name : {"verify-exact", "blowup", "coeffs", "linsolve", "smooth", "nash", "stability"})
    app.add_subcommand(name, std::string("run the ") + name + " experiment")->fallthrough();
  CLI11_PARSE(app, argc, argv);

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig cfg = config_path.empty() ? default_config(experiment) : parse_config(read_file(config_path), experiment);
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--jobs")) cfg.jobs = jobs;
    if (app.count("--out")) cfg.out_dir = out_dir;
    const ExperimentResult res = run_experiment(cfg);
    write_artifacts(res, cfg.out_dir, cfg.echo());
    for (const Check& c : res.checks)
      std::printf("%-40s %-4s value=%s limit=%s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", fmt17(c.value).c_str(),
                  fmt17(c.limit).c_str());
    return res.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << experiment << ": " << e.what() << "\n";
    return 2;
  }
}
