// Benchmark driver: runs config-driven experiments, validates configs and
// generates matrix completion instances.
//
// Exit codes: 0 success, 1 config or file error, 2 a solver diverged
// (traces are still written).

#include "altlin/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

namespace {

int do_validate(const std::string& path) {
  const altlin::ParseResult pr = altlin::parse_experiment_config(path);
  std::vector<std::string> errors = pr.errors;
  if (pr.ok()) {
    const auto sem = altlin::validate_config(pr.config);
    errors.insert(errors.end(), sem.begin(), sem.end());
  }
  if (errors.empty()) {
    std::printf("ok: %s\n", path.c_str());
    return 0;
  }
  for (const std::string& e : errors) {
    std::fprintf(stderr, "%s\n", e.c_str());
  }
  return 1;
}

int do_run(const std::string& path, const std::string& out_dir) {
  const altlin::ParseResult pr = altlin::parse_experiment_config(path);
  if (!pr.ok()) {
    for (const std::string& e : pr.errors) {
      std::fprintf(stderr, "%s\n", e.c_str());
    }
    return 1;
  }
  const altlin::ExperimentResult res =
      altlin::run_experiment(pr.config, out_dir);
  for (const altlin::SolverResult& r : res.runs) {
    std::printf("%s (%s): %d iters, status %s, obj %.10g\n", r.label.c_str(),
                r.method.c_str(), r.trace.iterations(),
                altlin::to_string(r.trace.status), r.trace.final_obj());
  }
  std::printf("wrote %s\n", res.out_dir.c_str());
  return res.any_diverged ? 2 : 0;
}

int do_gen(const std::string& path, const std::string& out_dir) {
  const altlin::ParseResult pr = altlin::parse_experiment_config(path);
  if (!pr.ok()) {
    for (const std::string& e : pr.errors) {
      std::fprintf(stderr, "%s\n", e.c_str());
    }
    return 1;
  }
  altlin::generate_instance_files(pr.config, out_dir);
  std::printf("wrote instance files to %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alternating linearization benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  CLI::App* run = app.add_subcommand("run", "run the experiment in a config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out-dir", out_dir, "override the output directory");

  std::string val_path;
  CLI::App* validate =
      app.add_subcommand("validate", "check a config and list every error");
  validate->add_option("config", val_path, "experiment config file")
      ->required();

  std::string gen_spec, gen_out;
  CLI::App* gen = app.add_subcommand(
      "gen-instance", "generate matrix completion instance files");
  gen->add_option("spec", gen_spec, "config with a completion problem section")
      ->required();
  gen->add_option("out", gen_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return do_run(config_path, out_dir);
    if (validate->parsed()) return do_validate(val_path);
    if (gen->parsed()) return do_gen(gen_spec, gen_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
