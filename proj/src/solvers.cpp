#include "altlin/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

namespace altlin {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kDivergeCap = 1e300;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double resolve_mu(const SolverConfig& cfg,
                  std::initializer_list<const FunctionHandle*> hinted,
                  const char* who) {
  if (cfg.continuation) {
    const auto& c = *cfg.continuation;
    require(c.mu0 > 0.0 && c.mu_bar > 0.0 && c.eta > 0.0 && c.eta < 1.0,
            std::string(who) + ": bad continuation parameters");
    return c.mu0;
  }
  if (cfg.mu) {
    require(*cfg.mu > 0.0, std::string(who) + ": mu must be positive");
    return *cfg.mu;
  }
  double lip = 0.0;
  for (const FunctionHandle* h : hinted) {
    if (h->lipschitz_hint) lip = std::max(lip, *h->lipschitz_hint);
  }
  require(lip > 0.0,
          std::string(who) + ": mu auto requires a positive lipschitz_hint");
  return 1.0 / lip;
}

// Shared record keeping and stopping logic.
struct Loop {
  const SolverConfig& cfg;
  RunTrace trace;
  double mu;
  bool done = false;
  std::chrono::steady_clock::time_point start_time;

  Loop(const SolverConfig& c, double mu0) : cfg(c), mu(mu0) {
    require(cfg.max_iter >= 1, "solver: max_iter must be >= 1");
    require(cfg.infeas_ref > 0.0, "solver: infeas_ref must be positive");
    trace.records.reserve(static_cast<std::size_t>(cfg.max_iter));
    start_time = std::chrono::steady_clock::now();
  }

  void record(int k, double obj, double infeas_abs, bool infeas_applicable,
              bool skipped, double tk) {
    trace.mu_used = mu;  // before advance_mu, so it reflects this iteration
    IterateRecord r;
    r.k = k;
    r.obj = obj;
    r.infeas = infeas_applicable ? infeas_abs / cfg.infeas_ref : 0.0;
    r.skipped = skipped;
    r.t_k = tk;
    r.elapsed_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start_time)
            .count();
    trace.records.push_back(r);
    if (skipped) ++trace.skip_count;
    if (!std::isfinite(obj) || std::abs(obj) > kDivergeCap) {
      trace.status = RunStatus::diverged;
      done = true;
      return;
    }
    if (cfg.obj_target && obj <= *cfg.obj_target) {
      trace.status = RunStatus::objective_target;
      done = true;
      return;
    }
    if (infeas_applicable && cfg.infeas_tol > 0.0 &&
        r.infeas < cfg.infeas_tol) {
      trace.status = RunStatus::infeasibility_tol;
      done = true;
    }
  }

  void advance_mu() {
    if (cfg.continuation) mu = continuation_next_mu(mu, *cfg.continuation);
  }

  RunTrace finish(Point x, Point y, Point lambda) {
    if (trace.records.empty()) trace.mu_used = mu;
    trace.x_final = std::move(x);
    trace.y_final = std::move(y);
    trace.lambda_final = std::move(lambda);
    return std::move(trace);
  }
};

Point start_point(const SplitObjective& obj, const SolverInit& init,
                  const char* who) {
  require(obj.dim > 0, std::string(who) + ": objective dim must be set");
  if (init.start) {
    require(init.start->size() == obj.dim,
            std::string(who) + ": start point has wrong dimension");
    return *init.start;
  }
  return Point::Zero(obj.dim);
}

void need(const std::function<double(const Point&)>& fn, const char* who,
          const char* what) {
  require(static_cast<bool>(fn), std::string(who) + ": missing " + what);
}
void need(const std::function<Point(const Point&)>& fn, const char* who,
          const char* what) {
  require(static_cast<bool>(fn), std::string(who) + ": missing " + what);
}
void need(const std::function<Point(const Point&, double)>& fn,
          const char* who, const char* what) {
  require(static_cast<bool>(fn), std::string(who) + ": missing " + what);
}

double fista_next_t(double t) {
  return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
}

}  // namespace

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::max_iterations: return "max_iterations";
    case RunStatus::infeasibility_tol: return "infeasibility_tol";
    case RunStatus::objective_target: return "objective_target";
    case RunStatus::diverged: return "diverged";
  }
  return "unknown";
}

double continuation_next_mu(double mu, const ContinuationConfig& c) {
  return std::max(c.mu_bar, c.eta * mu);
}

TkState update_tk(const TkState& st, bool skipped) {
  // t(t-1) = factor * t_prev^2 with factor 1 (reg->reg), 2 (reg->skip),
  // 1 (skip->skip), 1/2 (skip->reg); c = 4 * factor under the radical.
  double c = 4.0;
  if (!st.prev_skipped && skipped) c = 8.0;
  if (st.prev_skipped && !skipped) c = 2.0;
  TkState out;
  out.t = (1.0 + std::sqrt(1.0 + c * st.t * st.t)) / 2.0;
  out.prev_skipped = skipped;
  out.k = st.k + 1;
  return out;
}

RunTrace run_adal(const SplitObjective& obj, const SolverConfig& cfg,
                  const SolverInit& init) {
  const char* who = "adal";
  need(obj.f.eval, who, "f.eval");
  need(obj.g.eval, who, "g.eval");
  need(obj.f.prox, who, "f.prox");
  need(obj.g.prox, who, "g.prox");
  Point y = start_point(obj, init, who);
  Point x = y;
  Point lambda = init.lambda0 ? *init.lambda0 : Point::Zero(obj.dim);
  require(lambda.size() == obj.dim, "adal: lambda0 has wrong dimension");
  Loop loop(cfg, resolve_mu(cfg, {&obj.f, &obj.g}, who));
  for (int k = 1; k <= cfg.max_iter && !loop.done; ++k) {
    const double mu = loop.mu;
    x = obj.f.prox(y + mu * lambda, mu);
    y = obj.g.prox(x - mu * lambda, mu);
    lambda -= (x - y) / mu;
    loop.record(k, obj.f.eval(y) + obj.g.eval(y), (x - y).norm(), true, false,
                kNan);
    loop.advance_mu();
  }
  return loop.finish(std::move(x), std::move(y), std::move(lambda));
}

RunTrace run_sadal(const SplitObjective& obj, const SolverConfig& cfg,
                   const SolverInit& init) {
  const char* who = "sadal";
  need(obj.f.eval, who, "f.eval");
  need(obj.g.eval, who, "g.eval");
  need(obj.f.prox, who, "f.prox");
  need(obj.g.prox, who, "g.prox");
  Point y = start_point(obj, init, who);
  Point x = y;
  Loop loop(cfg, resolve_mu(cfg, {&obj.f, &obj.g}, who));
  Point lambda;
  if (init.lambda0) {
    lambda = *init.lambda0;
    require(lambda.size() == obj.dim, "sadal: lambda0 has wrong dimension");
  } else {
    need(obj.g.grad_or_subgrad, who, "g.grad_or_subgrad (for default lambda0)");
    ++loop.trace.grad_evals_g;
    lambda = -obj.g.grad_or_subgrad(y);
  }
  for (int k = 1; k <= cfg.max_iter && !loop.done; ++k) {
    const double mu = loop.mu;
    x = obj.f.prox(y + mu * lambda, mu);
    lambda -= (x - y) / mu;  // half step
    y = obj.g.prox(x - mu * lambda, mu);
    lambda -= (x - y) / mu;
    loop.record(k, obj.f.eval(y) + obj.g.eval(y), (x - y).norm(), true, false,
                kNan);
    loop.advance_mu();
  }
  return loop.finish(std::move(x), std::move(y), std::move(lambda));
}

RunTrace run_alm(const SplitObjective& obj, const SolverConfig& cfg,
                 const SolverInit& init) {
  const char* who = "alm";
  require(obj.f.smooth && obj.g.smooth,
          "alm: both sides must be smooth (use alm_s for nonsmooth g)");
  need(obj.f.eval, who, "f.eval");
  need(obj.g.eval, who, "g.eval");
  need(obj.f.prox, who, "f.prox");
  need(obj.g.prox, who, "g.prox");
  need(obj.f.grad_or_subgrad, who, "f.grad_or_subgrad");
  need(obj.g.grad_or_subgrad, who, "g.grad_or_subgrad");
  Point y = start_point(obj, init, who);
  Point x = y;
  Loop loop(cfg, resolve_mu(cfg, {&obj.f, &obj.g}, who));
  for (int k = 1; k <= cfg.max_iter && !loop.done; ++k) {
    const double mu = loop.mu;
    ++loop.trace.grad_evals_g;
    x = obj.f.prox(y - mu * obj.g.grad_or_subgrad(y), mu);
    ++loop.trace.grad_evals_f;
    y = obj.g.prox(x - mu * obj.f.grad_or_subgrad(x), mu);
    loop.record(k, obj.f.eval(y) + obj.g.eval(y), (x - y).norm(), true, false,
                kNan);
    loop.advance_mu();
  }
  return loop.finish(std::move(x), std::move(y), Point());
}

namespace {

// Shared implementation of alm_s and its equivalent reformulation; `reuse`
// selects the branch structure that avoids fresh grad f evaluations on
// non-skipped steps.
RunTrace run_alm_s_impl(const SplitObjective& obj, const SolverConfig& cfg,
                        const SolverInit& init, bool reuse, const char* who) {
  require(obj.f.smooth, std::string(who) + ": f must be smooth");
  need(obj.f.eval, who, "f.eval");
  need(obj.g.eval, who, "g.eval");
  need(obj.f.prox, who, "f.prox");
  need(obj.g.prox, who, "g.prox");
  need(obj.f.grad_or_subgrad, who, "f.grad_or_subgrad");
  Point y = start_point(obj, init, who);
  Point x = y;
  Loop loop(cfg, resolve_mu(cfg, {&obj.f}, who));
  Point lambda;
  if (init.lambda0) {
    lambda = *init.lambda0;
    require(lambda.size() == obj.dim,
            std::string(who) + ": lambda0 has wrong dimension");
  } else {
    need(obj.g.grad_or_subgrad, who, "g.grad_or_subgrad (for default lambda0)");
    ++loop.trace.grad_evals_g;
    lambda = -obj.g.grad_or_subgrad(y);
  }
  for (int k = 1; k <= cfg.max_iter && !loop.done; ++k) {
    const double mu = loop.mu;
    Point xc = obj.f.prox(y + mu * lambda, mu);
    const double f_of_xc = obj.f.eval(xc) + obj.g.eval(xc);
    const bool skipped =
        f_of_xc > eval_aug_lagrangian(obj, xc, y, lambda, mu);
    Point ynew;
    if (skipped) {
      xc = y;
      ++loop.trace.grad_evals_f;
      const Point gf = obj.f.grad_or_subgrad(xc);
      ynew = obj.g.prox(xc - mu * gf, mu);
      lambda = gf - (xc - ynew) / mu;
    } else if (reuse) {
      // x-step optimality gives grad f(xc) = lambda - (xc - y)/mu, so the
      // symmetric multiplier updates reproduce the gradient-based ones.
      lambda -= (xc - y) / mu;
      ynew = obj.g.prox(xc - mu * lambda, mu);
      lambda -= (xc - ynew) / mu;
    } else {
      ++loop.trace.grad_evals_f;
      const Point gf = obj.f.grad_or_subgrad(xc);
      ynew = obj.g.prox(xc - mu * gf, mu);
      lambda = gf - (xc - ynew) / mu;
    }
    x = std::move(xc);
    y = std::move(ynew);
    loop.record(k, obj.f.eval(y) + obj.g.eval(y), (x - y).norm(), true,
                skipped, kNan);
    loop.advance_mu();
  }
  return loop.finish(std::move(x), std::move(y), std::move(lambda));
}

}  // namespace

RunTrace run_alm_s(const SplitObjective& obj, const SolverConfig& cfg,
                   const SolverInit& init) {
  return run_alm_s_impl(obj, cfg, init, false, "alm_s");
}

RunTrace run_alm_s_equiv(const SplitObjective& obj, const SolverConfig& cfg,
                         const SolverInit& init) {
  return run_alm_s_impl(obj, cfg, init, true, "alm_s_equiv");
}

RunTrace run_falm(const SplitObjective& obj, const SolverConfig& cfg,
                  const SolverInit& init) {
  const char* who = "falm";
  require(obj.f.smooth && obj.g.smooth,
          "falm: both sides must be smooth (use falm_s for nonsmooth g)");
  need(obj.f.eval, who, "f.eval");
  need(obj.g.eval, who, "g.eval");
  need(obj.f.prox, who, "f.prox");
  need(obj.g.prox, who, "g.prox");
  need(obj.f.grad_or_subgrad, who, "f.grad_or_subgrad");
  need(obj.g.grad_or_subgrad, who, "g.grad_or_subgrad");
  Point y_prev = start_point(obj, init, who);
  Point z = y_prev;
  Point x = y_prev, y = y_prev;
  double t = 1.0;
  Loop loop(cfg, resolve_mu(cfg, {&obj.f, &obj.g}, who));
  for (int k = 1; k <= cfg.max_iter && !loop.done; ++k) {
    const double mu = loop.mu;
    ++loop.trace.grad_evals_g;
    x = obj.f.prox(z - mu * obj.g.grad_or_subgrad(z), mu);
    ++loop.trace.grad_evals_f;
    y = obj.g.prox(x - mu * obj.f.grad_or_subgrad(x), mu);
    loop.record(k, obj.f.eval(y) + obj.g.eval(y), (x - y).norm(), true, false,
                t);
    const double t_next = fista_next_t(t);
    z = y + ((t - 1.0) / t_next) * (y - y_prev);
    y_prev = y;
    t = t_next;
    loop.advance_mu();
  }
  return loop.finish(std::move(x), std::move(y), Point());
}

RunTrace run_falm_s(const SplitObjective& obj, const SolverConfig& cfg,
                    const SolverInit& init) {
  const char* who = "falm_s";
  require(obj.f.smooth, "falm_s: f must be smooth");
  need(obj.f.eval, who, "f.eval");
  need(obj.g.eval, who, "g.eval");
  need(obj.f.prox, who, "f.prox");
  need(obj.g.prox, who, "g.prox");
  need(obj.f.grad_or_subgrad, who, "f.grad_or_subgrad");
  need(obj.g.grad_or_subgrad, who, "g.grad_or_subgrad");
  Point y_prev = start_point(obj, init, who);  // y^{k-1}
  Point y_prev2 = y_prev;                      // y^{k-2}
  Point z = y_prev;
  Point x = y_prev, y = y_prev;
  Loop loop(cfg, resolve_mu(cfg, {&obj.f}, who));
  Point lambda;
  if (init.lambda0) {
    lambda = *init.lambda0;
    require(lambda.size() == obj.dim, "falm_s: lambda0 has wrong dimension");
  } else {
    ++loop.trace.grad_evals_g;
    lambda = -obj.g.grad_or_subgrad(z);
  }
  double t_prev = 1.0;      // realized t_{k-1} (t_0 = 1 by convention)
  double t_prov = 1.0;      // provisional t_k from the forward rule
  bool prev_skipped = false;
  for (int k = 1; k <= cfg.max_iter && !loop.done; ++k) {
    const double mu = loop.mu;
    x = obj.f.prox(z + mu * lambda, mu);
    const bool skipped = obj.f.eval(x) + obj.g.eval(x) >
                         eval_aug_lagrangian(obj, x, z, lambda, mu);
    double t_real = t_prov;
    if (skipped) {
      // The provisional weight assumed a regular step; recompute t_k from
      // t_{k-1} and rebuild the momentum point, then take the prox-gradient
      // step from it (z and x coincide on skipped steps).
      if (k == 1) {
        t_real = 1.0;  // no step 0 to correct against
      } else {
        t_real = update_tk({t_prev, prev_skipped, k - 1}, true).t;
      }
      z = y_prev + ((t_prev - 1.0) / t_real) * (y_prev - y_prev2);
      x = z;
    }
    ++loop.trace.grad_evals_f;
    const Point gf = obj.f.grad_or_subgrad(x);
    y = obj.g.prox(x - mu * gf, mu);
    loop.record(k, obj.f.eval(y) + obj.g.eval(y), (x - y).norm(), true,
                skipped, t_real);
    const double c = skipped ? 2.0 : 4.0;
    const double t_next = (1.0 + std::sqrt(1.0 + c * t_real * t_real)) / 2.0;
    z = y + ((t_real - 1.0) / t_next) * (y - y_prev);
    ++loop.trace.grad_evals_g;
    lambda = -obj.g.grad_or_subgrad(z);
    y_prev2 = y_prev;
    y_prev = y;
    t_prev = t_real;
    t_prov = t_next;
    prev_skipped = skipped;
    loop.advance_mu();
  }
  return loop.finish(std::move(x), std::move(y), std::move(lambda));
}

RunTrace run_ista(const SplitObjective& obj, const SolverConfig& cfg,
                  const SolverInit& init) {
  const char* who = "ista";
  require(obj.f.smooth, "ista: f must be smooth");
  need(obj.f.eval, who, "f.eval");
  need(obj.g.eval, who, "g.eval");
  need(obj.f.grad_or_subgrad, who, "f.grad_or_subgrad");
  need(obj.g.prox, who, "g.prox");
  Point x = start_point(obj, init, who);
  Loop loop(cfg, resolve_mu(cfg, {&obj.f}, who));
  for (int k = 1; k <= cfg.max_iter && !loop.done; ++k) {
    const double mu = loop.mu;
    ++loop.trace.grad_evals_f;
    x = obj.g.prox(x - mu * obj.f.grad_or_subgrad(x), mu);
    loop.record(k, obj.f.eval(x) + obj.g.eval(x), 0.0, false, false, kNan);
    loop.advance_mu();
  }
  Point y = x;
  return loop.finish(std::move(x), std::move(y), Point());
}

RunTrace run_fista(const SplitObjective& obj, const SolverConfig& cfg,
                   const SolverInit& init) {
  const char* who = "fista";
  require(obj.f.smooth, "fista: f must be smooth");
  need(obj.f.eval, who, "f.eval");
  need(obj.g.eval, who, "g.eval");
  need(obj.f.grad_or_subgrad, who, "f.grad_or_subgrad");
  need(obj.g.prox, who, "g.prox");
  Point x_prev = start_point(obj, init, who);
  Point yk = x_prev;
  Point x = x_prev;
  double t = 1.0;
  Loop loop(cfg, resolve_mu(cfg, {&obj.f}, who));
  for (int k = 1; k <= cfg.max_iter && !loop.done; ++k) {
    const double mu = loop.mu;
    ++loop.trace.grad_evals_f;
    x = obj.g.prox(yk - mu * obj.f.grad_or_subgrad(yk), mu);
    loop.record(k, obj.f.eval(x) + obj.g.eval(x), 0.0, false, false, t);
    const double t_next = fista_next_t(t);
    yk = x + ((t - 1.0) / t_next) * (x - x_prev);
    x_prev = x;
    t = t_next;
    loop.advance_mu();
  }
  Point y = x;
  return loop.finish(std::move(x), std::move(y), Point());
}

RunTrace run_solver(const std::string& method, const SplitObjective& obj,
                    const SolverConfig& cfg, const SolverInit& init) {
  if (method == "adal") return run_adal(obj, cfg, init);
  if (method == "sadal") return run_sadal(obj, cfg, init);
  if (method == "alm") return run_alm(obj, cfg, init);
  if (method == "alm_s") return run_alm_s(obj, cfg, init);
  if (method == "alm_s_equiv") return run_alm_s_equiv(obj, cfg, init);
  if (method == "falm") return run_falm(obj, cfg, init);
  if (method == "falm_s") return run_falm_s(obj, cfg, init);
  if (method == "ista") return run_ista(obj, cfg, init);
  if (method == "fista") return run_fista(obj, cfg, init);
  throw std::invalid_argument("unknown solver method: " + method);
}

bool is_known_method(const std::string& method) {
  static const char* names[] = {"adal",  "sadal",  "alm",   "alm_s",
                                "alm_s_equiv", "falm", "falm_s", "ista",
                                "fista"};
  for (const char* n : names) {
    if (method == n) return true;
  }
  return false;
}

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "iter,obj,infeas,skipped,t_k,elapsed_ms\n";
  for (const IterateRecord& r : trace.records) {
    out << r.k << ',' << fmt17(r.obj) << ',' << fmt17(r.infeas) << ','
        << (r.skipped ? 1 : 0) << ',';
    if (!std::isnan(r.t_k)) out << fmt17(r.t_k);
    out << ',' << fmt17(r.elapsed_ms) << '\n';
  }
}

void write_trace_csv(const std::string& path, const RunTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file: " + path);
  write_trace_csv(out, trace);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace altlin
