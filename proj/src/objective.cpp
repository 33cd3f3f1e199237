#include "altlin/objective.hpp"

namespace altlin {

namespace {

const FunctionHandle& side(const SplitObjective& obj, Side s) {
  return s == Side::f ? obj.f : obj.g;
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double eval_F(const SplitObjective& obj, const Point& x) {
  require(static_cast<bool>(obj.f.eval) && static_cast<bool>(obj.g.eval),
          "eval_F: both sides need eval");
  return obj.f.eval(x) + obj.g.eval(x);
}

double eval_Q(const SplitObjective& obj, Side linearized, const Point& u,
              const Point& v, double mu) {
  require(mu > 0.0, "eval_Q: mu must be positive");
  const FunctionHandle& lin = side(obj, linearized);
  const FunctionHandle& kept =
      side(obj, linearized == Side::f ? Side::g : Side::f);
  require(static_cast<bool>(lin.eval) && static_cast<bool>(lin.grad_or_subgrad),
          "eval_Q: linearized side needs eval and grad");
  require(static_cast<bool>(kept.eval), "eval_Q: kept side needs eval");
  const Point d = u - v;
  return kept.eval(u) + lin.eval(v) + lin.grad_or_subgrad(v).dot(d) +
         d.squaredNorm() / (2.0 * mu);
}

double eval_aug_lagrangian(const SplitObjective& obj, const Point& x,
                           const Point& y, const MultiplierState& lambda,
                           double mu) {
  require(mu > 0.0, "eval_aug_lagrangian: mu must be positive");
  const Point d = x - y;
  return obj.f.eval(x) + obj.g.eval(y) - lambda.dot(d) +
         d.squaredNorm() / (2.0 * mu);
}

Point prox_step(const SplitObjective& obj, Side keep, const Point& v,
                double mu, const Point* subgrad_override) {
  require(mu > 0.0, "prox_step: mu must be positive");
  const FunctionHandle& kept = side(obj, keep);
  const FunctionHandle& lin = side(obj, keep == Side::f ? Side::g : Side::f);
  require(static_cast<bool>(kept.prox), "prox_step: kept side needs prox");
  Point step;
  if (subgrad_override != nullptr) {
    step = v - mu * (*subgrad_override);
  } else {
    require(static_cast<bool>(lin.grad_or_subgrad),
            "prox_step: linearized side needs grad or subgrad");
    step = v - mu * lin.grad_or_subgrad(v);
  }
  return kept.prox(step, mu);
}

}  // namespace altlin
