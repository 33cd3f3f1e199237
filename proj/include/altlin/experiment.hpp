#pragma once

// Config-driven benchmark runs: parse a flat key-value config with
// [section] headers, build the problem, run each configured solver and write
// per-solver trace CSVs plus a summary CSV.
//
// Config grammar (one "key = value" per line, '#' starts a comment):
//
//   [problem]
//   kind = lasso | deblur | rpca | completion
//   ... kind-specific keys (see README) ...
//
//   [solver <label>]          # one section per run; labels unique
//   method = adal | sadal | alm | alm_s | alm_s_equiv | falm | falm_s |
//            ista | fista     # defaults to the label
//   mu = auto | <positive real>
//   max_iter = <positive int>
//   infeas_tol = <non-negative real>
//   obj_target = <real>
//   continuation_mu0 = auto | <positive real>   # presence enables continuation
//   continuation_mu_bar = <positive real>       # default 1e-6
//   continuation_eta = <real in (0,1)>          # default 2/3
//
//   [output]
//   checkpoints = <strictly increasing positive ints>
//   dir = <path>

#include "altlin/problems.hpp"
#include "altlin/solvers.hpp"

#include <string>
#include <vector>

namespace altlin {

struct ProblemConfig {
  std::string kind;
  std::optional<long> m, n, rank, height, width, kernel_size, levels;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho, sigma, spr, sr, noise_std;
  std::optional<std::string> matrix_path, mask_path;
  std::optional<bool> smooth_f, smooth_g;
};

struct SolverEntry {
  std::string label;
  std::string method;
  SolverConfig config;
  bool mu0_auto = false;  // continuation_mu0 = auto
  bool mu_auto = true;    // mu = auto (or unset)
};

struct ExperimentConfig {
  ProblemConfig problem;
  std::vector<SolverEntry> solvers;
  std::vector<int> checkpoints;
  std::string out_dir = "out";
};

struct ParseResult {
  ExperimentConfig config;
  std::vector<std::string> errors;  // "line N: message"
  bool ok() const { return errors.empty(); }
};

ParseResult parse_experiment_config(const std::string& path);
ParseResult parse_experiment_config_text(const std::string& text);

// Semantic checks on a parsed config (required keys per problem kind, label
// uniqueness, value ranges). Returns an empty list when valid.
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

// Problem plus the solver wiring that depends on it.
struct BuiltProblem {
  SplitObjective obj;
  SolverInit init;
  double infeas_ref = 1.0;
  Index rows = 0, cols = 0;
  bool matrix_shaped = false;
  std::optional<IndexMask> mask;
  std::optional<Mat> truth_low_rank, truth_sparse;
  Mat observed;       // matrix-shaped problems only
  double auto_mu0 = 0.0;  // ||observed||_F / 1.25; 0 when not matrix-shaped
};

BuiltProblem build_problem(const ProblemConfig& pc);

struct SolverResult {
  std::string label;
  std::string method;
  RunTrace trace;
  std::optional<RelErrors> errors;
};

struct ExperimentResult {
  std::vector<SolverResult> runs;
  std::string out_dir;
  bool any_diverged = false;
};

// Runs every solver sequentially, writes <dir>/trace_<label>.csv and
// <dir>/summary.csv. out_dir_override replaces the config's output dir when
// non-empty. Throws on config/file problems; divergence is reported in the
// result, not thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir_override = "");

// Summary CSV: label,method,iters,status,final_obj,final_infeas,
// obj_at_<k>...,rel_x,rel_y,wall_ms (rel columns only when ground truth is
// known; wall_ms is the only nondeterministic column).
void write_summary_csv(std::ostream& out, const ExperimentResult& result,
                       const std::vector<int>& checkpoints);

// Generates a completion instance from a config containing a completion
// [problem] section and writes matrix.txt, mask.txt (when sampled),
// truth_low_rank.txt and truth_sparse.txt into out_dir.
void generate_instance_files(const ExperimentConfig& cfg,
                             const std::string& out_dir);

}  // namespace altlin
