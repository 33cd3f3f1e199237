#pragma once

// Split objective F(x) = f(x) + g(x) for the variable-splitting formulation
//   min f(x) + g(y)  subject to  x - y = 0,
// with the augmented Lagrangian and the partial linearizations (model
// functions) the solvers minimize. Points are flat vectors; matrix-shaped
// problems view them through Eigen::Map.

#include "altlin/linalg.hpp"

#include <functional>
#include <optional>

namespace altlin {

using Point = Vec;

// One side of the objective. grad_or_subgrad returns the gradient when
// `smooth`, otherwise a minimal-norm subgradient. prox(z, tau) solves
// argmin_x tau * fn(x) + 1/2 ||x - z||^2. Any member may be left empty;
// solvers check for what they need and throw std::invalid_argument.
struct FunctionHandle {
  std::function<double(const Point&)> eval;
  std::function<Point(const Point&)> grad_or_subgrad;
  std::function<Point(const Point&, double)> prox;
  bool smooth = false;
  std::optional<double> lipschitz_hint;
};

struct SplitObjective {
  FunctionHandle f;
  FunctionHandle g;
  Index dim = 0;
};

// Multiplier for the coupling constraint x - y = 0; same shape as a point.
using MultiplierState = Point;

enum class Side { f, g };

double eval_F(const SplitObjective& obj, const Point& x);

// Model value with `linearized` replaced by its linearization at v plus the
// proximal quadratic:
//   linearized == f:  Q_f(u, v) = g(u) + f(v) + <grad f(v), u-v>
//                                 + ||u-v||^2 / (2 mu)
// and symmetrically for g.
double eval_Q(const SplitObjective& obj, Side linearized, const Point& u,
              const Point& v, double mu);

// f(x) + g(y) - <lambda, x - y> + ||x - y||^2 / (2 mu)
double eval_aug_lagrangian(const SplitObjective& obj, const Point& x,
                           const Point& y, const MultiplierState& lambda,
                           double mu);

// Minimizer of the model that keeps `keep` and linearizes the other side:
//   prox_keep(v - mu * grad_other(v), mu).
// subgrad_override substitutes for grad_other(v) when given (used by solvers
// that carry an explicit multiplier in place of a fresh subgradient).
Point prox_step(const SplitObjective& obj, Side keep, const Point& v,
                double mu, const Point* subgrad_override = nullptr);

}  // namespace altlin
