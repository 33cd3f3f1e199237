#include "altlin/oracle.hpp"

#include <cmath>
#include <limits>

namespace altlin {

OracleResult reference_optimum(const SplitObjective& obj, double tol, long cap,
                               const std::optional<Point>& start) {
  if (!obj.f.smooth || !obj.f.lipschitz_hint || *obj.f.lipschitz_hint <= 0.0) {
    throw std::invalid_argument(
        "reference_optimum: f must be smooth with a positive lipschitz_hint");
  }
  if (!obj.g.prox || !obj.f.grad_or_subgrad || !obj.f.eval || !obj.g.eval) {
    throw std::invalid_argument("reference_optimum: missing handle members");
  }
  if (tol <= 0.0) {
    throw std::invalid_argument("reference_optimum: tol must be positive");
  }
  const double mu = 1.0 / *obj.f.lipschitz_hint;
  Point x_prev = start ? *start : Point::Zero(obj.dim);
  Point y = x_prev;
  double t = 1.0;
  OracleResult res;
  res.x_star = x_prev;
  res.residual = std::numeric_limits<double>::infinity();
  for (long k = 1; k <= cap; ++k) {
    const Point x = obj.g.prox(y - mu * obj.f.grad_or_subgrad(y), mu);
    const Point px = obj.g.prox(x - mu * obj.f.grad_or_subgrad(x), mu);
    const double r = (x - px).norm();
    res.iterations = k;
    if (r < res.residual) {
      res.residual = r;
      res.x_star = x;
    }
    if (r <= tol) break;
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    y = x + ((t - 1.0) / t_next) * (x - x_prev);
    x_prev = x;
    t = t_next;
  }
  res.certified = res.residual <= tol;
  res.f_star = obj.f.eval(res.x_star) + obj.g.eval(res.x_star);
  return res;
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& fn, const Vec& x,
                     double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be positive");
  Vec g(x.size());
  Vec p = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    p[i] = xi + h;
    const double fp = fn(p);
    p[i] = xi - h;
    const double fm = fn(p);
    p[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double scalar_prox_bruteforce(const std::function<double(double)>& phi,
                              double z, double tau) {
  if (tau <= 0.0) {
    throw std::invalid_argument("scalar_prox_bruteforce: tau must be positive");
  }
  const auto psi = [&](double u) {
    return tau * phi(u) + 0.5 * (u - z) * (u - z);
  };
  // Expand until psi increases outward on both sides; convexity then places
  // the minimizer inside [z - w, z + w].
  double w = 1.0;
  int guard = 0;
  while (psi(z - w) <= psi(z - w / 2.0) || psi(z + w) <= psi(z + w / 2.0)) {
    w *= 2.0;
    if (++guard > 200) {
      throw NumericError("scalar_prox_bruteforce: bracket expansion failed");
    }
  }
  double a = z - w, b = z + w;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double pc = psi(c), pd = psi(d);
  while (b - a > 1e-10) {
    if (pc < pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - gr * (b - a);
      pc = psi(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + gr * (b - a);
      pd = psi(d);
    }
  }
  return (a + b) / 2.0;
}

BoundReport check_bound(const RunTrace& trace, BoundKind kind, double mu,
                        double d0sq, double f_star, double slack) {
  if (mu <= 0.0) throw std::invalid_argument("check_bound: mu must be positive");
  const double alpha = std::sqrt(2.0) - 1.0;
  BoundReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  long non_skipped = 0;
  long regular = 0;
  bool first_regular = false;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const IterateRecord& r = trace.records[i];
    const double k = static_cast<double>(i + 1);
    if (i == 0) first_regular = !r.skipped;
    if (!r.skipped) {
      ++non_skipped;
      ++regular;
    }
    double rhs = 0.0;
    switch (kind) {
      case BoundKind::alm:
        rhs = d0sq / (4.0 * mu * k);
        break;
      case BoundKind::alm_s:
        rhs = d0sq / (2.0 * mu * (k + static_cast<double>(non_skipped)));
        break;
      case BoundKind::falm: {
        const double kk = k + 1.0;
        rhs = d0sq / (mu * kk * kk);
        break;
      }
      case BoundKind::falm_s: {
        const double r_hat =
            static_cast<double>(regular) + (first_regular ? 1.0 : 0.0);
        const double kk = k + 1.0 + alpha * r_hat;
        rhs = 2.0 * d0sq / (mu * kk * kk);
        break;
      }
      case BoundKind::ista:
        rhs = d0sq / (2.0 * mu * k);
        break;
      case BoundKind::fista: {
        const double kk = k + 1.0;
        rhs = 2.0 * d0sq / (mu * kk * kk);
        break;
      }
    }
    const double violation = (r.obj - f_star) - rhs;
    if (violation > rep.max_violation) rep.max_violation = violation;
    if (violation > slack && rep.passed) {
      rep.passed = false;
      rep.first_violation_k = r.k;
    }
  }
  if (trace.records.empty()) rep.max_violation = 0.0;
  return rep;
}

}  // namespace altlin
