#include "altlin/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace altlin {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

bool parse_long(const std::string& s, long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

struct Parser {
  ParseResult res;
  enum class Section { none, problem, solver, output } section = Section::none;
  SolverEntry* cur_solver = nullptr;
  bool cur_solver_continuation = false;

  void err(int line, const std::string& msg) {
    res.errors.push_back("line " + std::to_string(line) + ": " + msg);
  }

  void finish_solver() {
    if (cur_solver != nullptr && cur_solver_continuation) {
      ContinuationConfig& c = cur_solver->config.continuation.emplace(
          pending_continuation);
      if (c.mu_bar <= 0.0) c.mu_bar = 1e-6;
      if (c.eta <= 0.0) c.eta = 2.0 / 3.0;
    }
    cur_solver = nullptr;
    cur_solver_continuation = false;
    pending_continuation = {};
  }

  ContinuationConfig pending_continuation{};

  void header(int line, const std::string& name) {
    finish_solver();
    if (name == "problem") {
      section = Section::problem;
    } else if (name == "output") {
      section = Section::output;
    } else if (name.rfind("solver", 0) == 0) {
      std::string label = trim(name.substr(6));
      if (label.empty()) {
        err(line, "solver section needs a label: [solver <label>]");
        section = Section::none;
        return;
      }
      res.config.solvers.push_back(SolverEntry{label, label, {}, false, true});
      cur_solver = &res.config.solvers.back();
      section = Section::solver;
    } else {
      err(line, "unknown section [" + name + "]");
      section = Section::none;
    }
  }

  void problem_kv(int line, const std::string& key, const std::string& value) {
    ProblemConfig& p = res.config.problem;
    auto want_long = [&](std::optional<long>& slot) {
      long v = 0;
      if (!parse_long(value, v)) {
        err(line, "bad integer for " + key + ": '" + value + "'");
      } else {
        slot = v;
      }
    };
    auto want_double = [&](std::optional<double>& slot) {
      double v = 0;
      if (!parse_double(value, v)) {
        err(line, "bad number for " + key + ": '" + value + "'");
      } else {
        slot = v;
      }
    };
    auto want_bool = [&](std::optional<bool>& slot) {
      bool v = false;
      if (!parse_bool(value, v)) {
        err(line, "bad boolean for " + key + ": '" + value + "'");
      } else {
        slot = v;
      }
    };
    if (key == "kind") {
      p.kind = value;
    } else if (key == "m") {
      want_long(p.m);
    } else if (key == "n") {
      want_long(p.n);
    } else if (key == "rank") {
      want_long(p.rank);
    } else if (key == "height") {
      want_long(p.height);
    } else if (key == "width") {
      want_long(p.width);
    } else if (key == "kernel_size") {
      want_long(p.kernel_size);
    } else if (key == "levels") {
      want_long(p.levels);
    } else if (key == "seed") {
      std::uint64_t v = 0;
      if (!parse_u64(value, v)) {
        err(line, "bad seed: '" + value + "'");
      } else {
        p.seed = v;
      }
    } else if (key == "rho") {
      want_double(p.rho);
    } else if (key == "sigma") {
      want_double(p.sigma);
    } else if (key == "spr") {
      want_double(p.spr);
    } else if (key == "sr") {
      want_double(p.sr);
    } else if (key == "noise_std") {
      want_double(p.noise_std);
    } else if (key == "matrix") {
      p.matrix_path = value;
    } else if (key == "mask") {
      p.mask_path = value;
    } else if (key == "smooth_f") {
      want_bool(p.smooth_f);
    } else if (key == "smooth_g") {
      want_bool(p.smooth_g);
    } else {
      err(line, "unknown problem key '" + key + "'");
    }
  }

  void solver_kv(int line, const std::string& key, const std::string& value) {
    SolverEntry& s = *cur_solver;
    if (key == "method") {
      s.method = value;
    } else if (key == "mu") {
      if (value == "auto") {
        s.mu_auto = true;
        s.config.mu.reset();
      } else {
        double v = 0;
        if (!parse_double(value, v)) {
          err(line, "bad mu: '" + value + "'");
        } else {
          s.config.mu = v;
          s.mu_auto = false;
        }
      }
    } else if (key == "max_iter") {
      long v = 0;
      if (!parse_long(value, v)) {
        err(line, "bad max_iter: '" + value + "'");
      } else {
        s.config.max_iter = static_cast<int>(v);
      }
    } else if (key == "infeas_tol") {
      double v = 0;
      if (!parse_double(value, v)) {
        err(line, "bad infeas_tol: '" + value + "'");
      } else {
        s.config.infeas_tol = v;
      }
    } else if (key == "obj_target") {
      double v = 0;
      if (!parse_double(value, v)) {
        err(line, "bad obj_target: '" + value + "'");
      } else {
        s.config.obj_target = v;
      }
    } else if (key == "continuation_mu0") {
      cur_solver_continuation = true;
      if (value == "auto") {
        s.mu0_auto = true;
      } else {
        double v = 0;
        if (!parse_double(value, v)) {
          err(line, "bad continuation_mu0: '" + value + "'");
        } else {
          pending_continuation.mu0 = v;
        }
      }
    } else if (key == "continuation_mu_bar") {
      cur_solver_continuation = true;
      double v = 0;
      if (!parse_double(value, v)) {
        err(line, "bad continuation_mu_bar: '" + value + "'");
      } else {
        pending_continuation.mu_bar = v;
      }
    } else if (key == "continuation_eta") {
      cur_solver_continuation = true;
      double v = 0;
      if (!parse_double(value, v)) {
        err(line, "bad continuation_eta: '" + value + "'");
      } else {
        pending_continuation.eta = v;
      }
    } else {
      err(line, "unknown solver key '" + key + "'");
    }
  }

  void output_kv(int line, const std::string& key, const std::string& value) {
    if (key == "checkpoints") {
      std::istringstream ss(value);
      std::string tok;
      std::vector<int> cps;
      bool bad = false;
      while (ss >> tok) {
        long v = 0;
        if (!parse_long(tok, v) || v <= 0) {
          bad = true;
          break;
        }
        cps.push_back(static_cast<int>(v));
      }
      if (bad) {
        err(line, "bad checkpoints list: '" + value + "'");
      } else {
        res.config.checkpoints = std::move(cps);
      }
    } else if (key == "dir") {
      res.config.out_dir = value;
    } else {
      err(line, "unknown output key '" + key + "'");
    }
  }

  void line_in(int line_no, const std::string& raw) {
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) return;
    if (line.front() == '[') {
      if (line.back() != ']') {
        err(line_no, "unterminated section header");
        return;
      }
      header(line_no, trim(line.substr(1, line.size() - 2)));
      return;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      err(line_no, "expected 'key = value'");
      return;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      err(line_no, "empty key");
      return;
    }
    switch (section) {
      case Section::problem:
        problem_kv(line_no, key, value);
        break;
      case Section::solver:
        solver_kv(line_no, key, value);
        break;
      case Section::output:
        output_kv(line_no, key, value);
        break;
      case Section::none:
        err(line_no, "key outside of any section");
        break;
    }
  }
};

}  // namespace

ParseResult parse_experiment_config_text(const std::string& text) {
  Parser p;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    p.line_in(line_no, line);
  }
  p.finish_solver();
  return std::move(p.res);
}

ParseResult parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult r;
    r.errors.push_back("cannot open config file: " + path);
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config_text(ss.str());
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> errs;
  const ProblemConfig& p = cfg.problem;
  auto need = [&](bool present, const char* key) {
    if (!present) {
      errs.push_back(std::string("problem: missing required key '") + key +
                     "' for kind " + p.kind);
    }
  };
  if (p.kind.empty()) {
    errs.push_back("problem: missing 'kind'");
  } else if (p.kind == "lasso") {
    need(p.m.has_value(), "m");
    need(p.n.has_value(), "n");
    need(p.rho.has_value(), "rho");
    need(p.seed.has_value(), "seed");
    if (p.m && *p.m <= 0) errs.push_back("problem: m must be positive");
    if (p.n && *p.n <= 0) errs.push_back("problem: n must be positive");
    if (p.rho && *p.rho <= 0) errs.push_back("problem: rho must be positive");
  } else if (p.kind == "deblur") {
    need(p.height.has_value(), "height");
    need(p.width.has_value(), "width");
    need(p.kernel_size.has_value(), "kernel_size");
    need(p.levels.has_value(), "levels");
    need(p.rho.has_value(), "rho");
    need(p.seed.has_value(), "seed");
    if (p.kernel_size && (*p.kernel_size < 1 || *p.kernel_size % 2 == 0)) {
      errs.push_back("problem: kernel_size must be odd and positive");
    }
    if (p.height && p.levels &&
        (*p.height % (1L << *p.levels) != 0)) {
      errs.push_back("problem: height not divisible by 2^levels");
    }
    if (p.width && p.levels && (*p.width % (1L << *p.levels) != 0)) {
      errs.push_back("problem: width not divisible by 2^levels");
    }
  } else if (p.kind == "rpca") {
    need(p.matrix_path.has_value(), "matrix");
    if (p.sigma && *p.sigma <= 0) {
      errs.push_back("problem: sigma must be positive");
    }
  } else if (p.kind == "completion") {
    need(p.n.has_value(), "n");
    need(p.rank.has_value(), "rank");
    need(p.spr.has_value(), "spr");
    need(p.sr.has_value(), "sr");
    need(p.seed.has_value(), "seed");
    if (p.spr && (*p.spr < 0.0 || *p.spr >= 1.0)) {
      errs.push_back("problem: spr must be in [0, 1)");
    }
    if (p.sr && (*p.sr <= 0.0 || *p.sr > 1.0)) {
      errs.push_back("problem: sr must be in (0, 1]");
    }
    if (p.spr && p.sr && *p.spr > *p.sr) {
      errs.push_back("problem: spr must not exceed sr");
    }
  } else {
    errs.push_back("problem: unknown kind '" + p.kind + "'");
  }

  if (cfg.solvers.empty()) {
    errs.push_back("config: at least one [solver <label>] section required");
  }
  std::set<std::string> labels;
  for (const SolverEntry& s : cfg.solvers) {
    if (!labels.insert(s.label).second) {
      errs.push_back("solver '" + s.label + "': duplicate label");
    }
    if (!is_known_method(s.method)) {
      errs.push_back("solver '" + s.label + "': unknown method '" + s.method +
                     "'");
    }
    if (s.config.max_iter < 1) {
      errs.push_back("solver '" + s.label + "': max_iter must be >= 1");
    }
    if (s.config.mu && *s.config.mu <= 0.0) {
      errs.push_back("solver '" + s.label + "': mu must be positive");
    }
    if (s.config.infeas_tol < 0.0) {
      errs.push_back("solver '" + s.label + "': infeas_tol must be >= 0");
    }
    if (s.config.continuation) {
      const ContinuationConfig& c = *s.config.continuation;
      if (!s.mu0_auto && c.mu0 <= 0.0) {
        errs.push_back("solver '" + s.label +
                       "': continuation_mu0 must be positive or auto");
      }
      if (s.mu0_auto && p.kind != "rpca" && p.kind != "completion") {
        errs.push_back("solver '" + s.label +
                       "': continuation_mu0 = auto requires a matrix problem");
      }
      if (c.mu_bar <= 0.0) {
        errs.push_back("solver '" + s.label +
                       "': continuation_mu_bar must be positive");
      }
      if (c.eta <= 0.0 || c.eta >= 1.0) {
        errs.push_back("solver '" + s.label +
                       "': continuation_eta must be in (0, 1)");
      }
    }
  }
  for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i) {
    if (cfg.checkpoints[i] <= 0 ||
        (i > 0 && cfg.checkpoints[i] <= cfg.checkpoints[i - 1])) {
      errs.push_back("output: checkpoints must be strictly increasing and positive");
      break;
    }
  }
  return errs;
}

BuiltProblem build_problem(const ProblemConfig& pc) {
  BuiltProblem bp;
  if (pc.kind == "lasso") {
    const LassoInstance inst = random_lasso(
        static_cast<Index>(*pc.m), static_cast<Index>(*pc.n), *pc.rho,
        *pc.seed);
    bp.obj = lasso_handles(inst, pc.sigma);
    return bp;
  }
  if (pc.kind == "deblur") {
    const DeblurInstance inst = make_synthetic_deblur(
        static_cast<Index>(*pc.height), static_cast<Index>(*pc.width),
        static_cast<int>(*pc.kernel_size), static_cast<int>(*pc.levels),
        *pc.rho, pc.noise_std.value_or(0.0), *pc.seed);
    bp.obj = deblur_handles(inst, pc.sigma);
    return bp;
  }
  if (pc.kind == "rpca") {
    Mat m = load_matrix(*pc.matrix_path);
    std::optional<IndexMask> mask;
    if (pc.mask_path) mask = load_mask(*pc.mask_path);
    const RpcaInstance inst =
        make_rpca(std::move(m), std::move(mask), pc.rho.value_or(0.0),
                  pc.sigma.value_or(1e-6));
    bp.obj = rpca_handles(inst, pc.smooth_f.value_or(true),
                          pc.smooth_g.value_or(true));
    bp.init.start = rpca_start(inst);
    bp.infeas_ref = rpca_infeas_ref(inst);
    bp.rows = inst.m.rows();
    bp.cols = inst.m.cols();
    bp.matrix_shaped = true;
    bp.mask = inst.mask;
    bp.observed = inst.m;
    bp.auto_mu0 = inst.m.norm() / 1.25;
    return bp;
  }
  if (pc.kind == "completion") {
    CompletionSpec spec;
    spec.n = static_cast<Index>(*pc.n);
    spec.rank = static_cast<Index>(*pc.rank);
    spec.spr = *pc.spr;
    spec.sr = *pc.sr;
    spec.rho = pc.rho.value_or(0.0);
    spec.sigma = pc.sigma.value_or(1e-6);
    spec.seed = *pc.seed;
    CompletionInstance inst = generate_completion(spec);
    const RpcaInstance& prob = inst.problem;
    bp.obj = rpca_handles(prob, pc.smooth_f.value_or(true),
                          pc.smooth_g.value_or(true));
    bp.init.start = rpca_start(prob);
    bp.infeas_ref = rpca_infeas_ref(prob);
    bp.rows = prob.m.rows();
    bp.cols = prob.m.cols();
    bp.matrix_shaped = true;
    bp.mask = prob.mask;
    bp.observed = prob.m;
    bp.auto_mu0 = prob.m.norm() / 1.25;
    bp.truth_low_rank = std::move(inst.truth_low_rank);
    bp.truth_sparse = std::move(inst.truth_sparse);
    return bp;
  }
  throw std::invalid_argument("build_problem: unknown kind '" + pc.kind + "'");
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double obj_at_checkpoint(const RunTrace& t, int k) {
  if (t.records.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t i =
      std::min(t.records.size(), static_cast<std::size_t>(k)) - 1;
  return t.records[i].obj;
}

}  // namespace

void write_summary_csv(std::ostream& out, const ExperimentResult& result,
                       const std::vector<int>& checkpoints) {
  const bool have_errors =
      std::any_of(result.runs.begin(), result.runs.end(),
                  [](const SolverResult& r) { return r.errors.has_value(); });
  out << "label,method,iters,status,final_obj,final_infeas";
  for (int cp : checkpoints) out << ",obj_at_" << cp;
  if (have_errors) out << ",rel_x,rel_y";
  out << ",wall_ms\n";
  for (const SolverResult& r : result.runs) {
    const RunTrace& t = r.trace;
    const double final_infeas =
        t.records.empty() ? 0.0 : t.records.back().infeas;
    out << r.label << ',' << r.method << ',' << t.iterations() << ','
        << to_string(t.status) << ',' << fmt17(t.final_obj()) << ','
        << fmt17(final_infeas);
    for (int cp : checkpoints) out << ',' << fmt17(obj_at_checkpoint(t, cp));
    if (have_errors) {
      if (r.errors) {
        out << ',' << fmt17(r.errors->rel_x) << ',' << fmt17(r.errors->rel_y);
      } else {
        out << ",,";
      }
    }
    const double wall =
        t.records.empty() ? 0.0 : t.records.back().elapsed_ms;
    out << ',' << fmt17(wall) << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir_override) {
  const std::vector<std::string> errs = validate_config(cfg);
  if (!errs.empty()) {
    std::string msg = "invalid config:";
    for (const std::string& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  BuiltProblem bp = build_problem(cfg.problem);
  ExperimentResult result;
  result.out_dir = out_dir_override.empty() ? cfg.out_dir : out_dir_override;
  std::filesystem::create_directories(result.out_dir);
  for (const SolverEntry& entry : cfg.solvers) {
    SolverConfig sc = entry.config;
    sc.infeas_ref = bp.infeas_ref;
    if (sc.continuation && entry.mu0_auto) {
      if (bp.auto_mu0 <= 0.0) {
        throw std::invalid_argument(
            "solver '" + entry.label +
            "': continuation_mu0 = auto needs a matrix problem");
      }
      sc.continuation->mu0 = bp.auto_mu0;
    }
    SolverResult sr;
    sr.label = entry.label;
    sr.method = entry.method;
    sr.trace = run_solver(entry.method, bp.obj, sc, bp.init);
    if (sr.trace.status == RunStatus::diverged) result.any_diverged = true;
    if (bp.matrix_shaped && bp.truth_low_rank && bp.truth_sparse) {
      const Mat x = unflatten(sr.trace.x_final, bp.rows, bp.cols);
      Mat y = bp.observed - unflatten(sr.trace.y_final, bp.rows, bp.cols);
      if (bp.mask) y = project_mask(y, *bp.mask);
      sr.errors = relative_errors(x, y, *bp.truth_low_rank, *bp.truth_sparse);
    }
    write_trace_csv(
        (std::filesystem::path(result.out_dir) / ("trace_" + entry.label + ".csv"))
            .string(),
        sr.trace);
    result.runs.push_back(std::move(sr));
  }
  std::ofstream out(std::filesystem::path(result.out_dir) / "summary.csv");
  if (!out) throw IoError("cannot write summary.csv in " + result.out_dir);
  write_summary_csv(out, result, cfg.checkpoints);
  return result;
}

void generate_instance_files(const ExperimentConfig& cfg,
                             const std::string& out_dir) {
  const ProblemConfig& p = cfg.problem;
  if (p.kind != "completion") {
    throw std::invalid_argument(
        "gen-instance: config problem kind must be 'completion'");
  }
  const std::vector<std::string> errs = validate_config(cfg);
  for (const std::string& e : errs) {
    // Solver/output sections are irrelevant here; only problem errors matter.
    if (e.rfind("problem:", 0) == 0) {
      throw std::invalid_argument("invalid instance spec: " + e);
    }
  }
  CompletionSpec spec;
  spec.n = static_cast<Index>(*p.n);
  spec.rank = static_cast<Index>(*p.rank);
  spec.spr = *p.spr;
  spec.sr = *p.sr;
  spec.rho = p.rho.value_or(0.0);
  spec.sigma = p.sigma.value_or(1e-6);
  spec.seed = *p.seed;
  const CompletionInstance inst = generate_completion(spec);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  // The full (unprojected) matrix goes to disk; loading with the mask file
  // re-applies the projection.
  save_matrix((dir / "matrix.txt").string(),
              inst.truth_low_rank + inst.truth_sparse);
  if (inst.problem.mask) {
    save_mask((dir / "mask.txt").string(), *inst.problem.mask);
  }
  save_matrix((dir / "truth_low_rank.txt").string(), inst.truth_low_rank);
  save_matrix((dir / "truth_sparse.txt").string(), inst.truth_sparse);
}

}  // namespace altlin
