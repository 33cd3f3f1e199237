#pragma once

// Independent reference machinery for the tests: a proximal-gradient oracle
// for optimal values, finite-difference gradients, a derivative-free scalar
// prox, and the complexity-bound checker.

#include "altlin/solvers.hpp"

#include <functional>

namespace altlin {

struct OracleResult {
  Point x_star;
  double f_star = 0.0;
  double residual = 0.0;  // ||x - prox_g(x - mu grad f(x), mu)|| at x_star
  long iterations = 0;
  bool certified = false;  // residual <= tol within the iteration cap
};

// Plain accelerated proximal gradient with mu = 1/L(f), run until the
// fixed-point residual drops below tol (cap 1e6 iterations); keeps the
// best-residual iterate. f must be smooth with a lipschitz_hint; g needs a
// prox. f_star = F(x_star) >= F*, so consumers comparing against f_star get
// conservative bound checks.
OracleResult reference_optimum(const SplitObjective& obj, double tol,
                               long cap = 1000000,
                               const std::optional<Point>& start = std::nullopt);

// Central differences, O(h^2).
Vec finite_diff_grad(const std::function<double(const Vec&)>& fn, const Vec& x,
                     double h);

// argmin_u tau * phi(u) + 1/2 (u - z)^2 for convex phi, by expanding a
// bracket around z and golden-section search to interval width 1e-10.
double scalar_prox_bruteforce(const std::function<double(double)>& phi,
                              double z, double tau);

enum class BoundKind { alm, alm_s, falm, falm_s, ista, fista };

struct BoundReport {
  bool passed = true;
  int first_violation_k = -1;
  double max_violation = 0.0;  // max over k of lhs - rhs (negative = slack)
};

// Checks obj_k - f_star <= bound(k) + slack along the whole trace, with
// d0sq = ||x^0 - x*||^2 and the per-method rates
//   alm     d0sq / (4 mu k)
//   alm_s   d0sq / (2 mu (k + k_n)),   k_n = non-skipped steps among 1..k
//   falm    d0sq / (mu (k+1)^2)
//   falm_s  2 d0sq / (mu (k+1+alpha r)^2), alpha = sqrt2 - 1, r = regular
//           steps among 1..k, plus 1 when the first step was regular
//   ista    d0sq / (2 mu k)
//   fista   2 d0sq / (mu (k+1)^2)
// Assumes a fixed mu (no continuation).
BoundReport check_bound(const RunTrace& trace, BoundKind kind, double mu,
                        double d0sq, double f_star, double slack = 1e-9);

}  // namespace altlin
