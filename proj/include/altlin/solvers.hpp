#pragma once

// Alternating direction and alternating linearization solvers for
// min f(x) + g(y) s.t. x = y, plus proximal gradient baselines. All solvers
// share SolverConfig and produce a RunTrace with one record per iteration
// (1-based: record k holds the objective at the k-th primary iterate, y^k for
// the alternating methods and x^k for ista / fista).
//
//   adal         two prox steps on the augmented Lagrangian, one multiplier
//                update
//   sadal        symmetric variant with a half-step multiplier update
//   alm          alternating linearization, both sides smooth
//   alm_s        alternating linearization with a skip test on the x step;
//                handles nonsmooth g
//   alm_s_equiv  algebraically identical iterates to alm_s, but the non-skip
//                branch reuses the multiplier instead of re-evaluating grad f
//   falm         accelerated alm (momentum weights t_k)
//   falm_s       accelerated alm_s; on a skipped step the current t_k is
//                recomputed retroactively and the momentum point rebuilt
//   ista, fista  proximal gradient baselines on f + g
//
// Multiplier defaults: adal starts from 0; sadal, alm_s, alm_s_equiv and
// falm_s start from -(subgradient of g at the start point), which is the
// choice that makes the equivalence results hold exactly.

#include "altlin/objective.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace altlin {

enum class RunStatus { max_iterations, infeasibility_tol, objective_target, diverged };

const char* to_string(RunStatus s);

struct IterateRecord {
  int k = 0;            // 1-based iteration number
  double obj = 0.0;     // F at the primary iterate
  double infeas = 0.0;  // ||x^k - y^k|| / infeas_ref; 0 for ista / fista
  bool skipped = false;
  double t_k = 0.0;     // momentum weight; NaN when the method has none
  double elapsed_ms = 0.0;  // cumulative wall time since solver start
};

struct ContinuationConfig {
  double mu0 = 0.0;
  double mu_bar = 0.0;
  double eta = 0.0;  // in (0, 1)
};

// mu_{k+1} = max(mu_bar, eta * mu_k)
double continuation_next_mu(double mu, const ContinuationConfig& c);

struct SolverConfig {
  std::optional<double> mu;  // empty = 1 / max available lipschitz_hint
  int max_iter = 1000;
  double infeas_tol = 0.0;   // relative to infeas_ref; 0 disables
  std::optional<double> obj_target;
  std::optional<ContinuationConfig> continuation;  // overrides mu
  double infeas_ref = 1.0;
};

struct RunTrace {
  std::vector<IterateRecord> records;
  RunStatus status = RunStatus::max_iterations;
  int skip_count = 0;
  long grad_evals_f = 0;
  long grad_evals_g = 0;
  double mu_used = 0.0;  // mu of the last iteration
  Point x_final;
  Point y_final;
  Point lambda_final;  // size 0 when the method carries no multiplier

  int iterations() const { return static_cast<int>(records.size()); }
  double final_obj() const {
    return records.empty() ? 0.0 : records.back().obj;
  }
};

// Momentum weight recursion. The realized transition t_{k-1} -> t_k depends
// on whether steps k-1 and k were skipped:
//   regular -> regular   t(t-1) = t_prev^2        (plain fista rule)
//   regular -> skip      t(t-1) = 2 t_prev^2
//   skip    -> skip      t(t-1) = t_prev^2
//   skip    -> regular   t(t-1) = t_prev^2 / 2
struct TkState {
  double t = 1.0;
  bool prev_skipped = false;
  int k = 1;
};

TkState update_tk(const TkState& st, bool skipped);

// Optional overrides for the start point (default: zeros) and the initial
// multiplier (default: per-solver rule above).
struct SolverInit {
  std::optional<Point> start;
  std::optional<Point> lambda0;
};

RunTrace run_adal(const SplitObjective& obj, const SolverConfig& cfg,
                  const SolverInit& init = {});
RunTrace run_sadal(const SplitObjective& obj, const SolverConfig& cfg,
                   const SolverInit& init = {});
RunTrace run_alm(const SplitObjective& obj, const SolverConfig& cfg,
                 const SolverInit& init = {});
RunTrace run_alm_s(const SplitObjective& obj, const SolverConfig& cfg,
                   const SolverInit& init = {});
RunTrace run_alm_s_equiv(const SplitObjective& obj, const SolverConfig& cfg,
                         const SolverInit& init = {});
RunTrace run_falm(const SplitObjective& obj, const SolverConfig& cfg,
                  const SolverInit& init = {});
RunTrace run_falm_s(const SplitObjective& obj, const SolverConfig& cfg,
                    const SolverInit& init = {});
RunTrace run_ista(const SplitObjective& obj, const SolverConfig& cfg,
                  const SolverInit& init = {});
RunTrace run_fista(const SplitObjective& obj, const SolverConfig& cfg,
                   const SolverInit& init = {});

// Dispatch by method name ("adal", "sadal", "alm", "alm_s", "alm_s_equiv",
// "falm", "falm_s", "ista", "fista").
RunTrace run_solver(const std::string& method, const SplitObjective& obj,
                    const SolverConfig& cfg, const SolverInit& init = {});
bool is_known_method(const std::string& method);

// CSV with header iter,obj,infeas,skipped,t_k,elapsed_ms; reals at 17
// significant digits, t_k empty when the method has no momentum weight.
void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_trace_csv(const std::string& path, const RunTrace& trace);

}  // namespace altlin
