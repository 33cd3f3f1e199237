#pragma once

// Benchmark problem families and their split-objective wiring.
//
// lasso    f(x) = 1/2 ||Ax - b||^2,  g = rho ||x||_1 (exact or smoothed)
// deblur   f(x) = 1/2 ||R W x - b||^2 with R a circular uniform blur and W
//          the inverse orthonormal Haar transform; x holds wavelet
//          coefficients, g as in lasso
// rpca     min ||X||_* + rho ||Y||_1  s.t.  X + Y = M (optionally observed
//          only on a mask). Mapped onto the splitting framework through the
//          change of variable y = M - Y, so the coupling constraint is again
//          x - y = 0 and every solver applies unchanged. Both sides can be
//          smoothed; the subproblems then have the closed forms below.
//
// Matrix-shaped problems flatten column-major into Point.

#include "altlin/objective.hpp"
#include "altlin/smoothing.hpp"

#include <cstdint>
#include <optional>

namespace altlin {

Vec flatten(const Mat& a);
Mat unflatten(const Vec& v, Index rows, Index cols);

struct LassoInstance {
  Mat a;
  Vec b;
  double rho = 0.0;
  double lip_f = 0.0;  // largest eigenvalue of a^T a
};

LassoInstance make_lasso(Mat a, Vec b, double rho);

// A has iid N(0,1)/sqrt(m) entries, b = A x_true + 0.01 * noise where x_true
// has ceil(n/10) entries equal to +-1 on a random support. Draw order: A
// column-major, support, signs, noise.
LassoInstance random_lasso(Index m, Index n, double rho, std::uint64_t seed);

// Exact l1 regularizer when sigma is absent, smoothed otherwise.
SplitObjective lasso_handles(const LassoInstance& inst,
                             std::optional<double> sigma = std::nullopt);

struct DeblurInstance {
  Index height = 0;
  Index width = 0;
  int kernel_size = 0;
  int levels = 0;
  double rho = 0.0;
  Vec observed;  // blurred image, flattened column-major
};

// Piecewise-constant synthetic scene, blurred and perturbed with
// noise_std * N(0,1) pixel noise.
DeblurInstance make_synthetic_deblur(Index height, Index width,
                                     int kernel_size, int levels, double rho,
                                     double noise_std, std::uint64_t seed);

// The data operator A = blur o inverse-haar has unit spectral norm, so
// lipschitz_hint for f is 1. The prox of f solves (I + tau A^T A) x = rhs by
// conjugate gradients to relative residual 1e-10.
SplitObjective deblur_handles(const DeblurInstance& inst,
                              std::optional<double> sigma = std::nullopt);

// Image-space forward operator and its adjoint (exposed for tests).
Vec deblur_apply(const DeblurInstance& inst, const Vec& x);
Vec deblur_apply_adjoint(const DeblurInstance& inst, const Vec& r);

struct RpcaInstance {
  Mat m;  // observed matrix; already projected onto the mask when present
  std::optional<IndexMask> mask;
  double rho = 0.0;
  double sigma = 0.0;
};

// rho <= 0 selects 1/sqrt(max(rows, cols)).
RpcaInstance make_rpca(Mat m, std::optional<IndexMask> mask, double rho,
                       double sigma);

// smooth_f: nuclear norm -> SmoothedNuclear(sigma); smooth_g: l1 ->
// SmoothedL1 / SmoothedMaskedL1(rho, sigma). Exact sides use
// matrix_shrink / vector_shrink proxes and minimal-norm subgradients.
SplitObjective rpca_handles(const RpcaInstance& inst, bool smooth_f,
                            bool smooth_g);

// Natural start point x = y = observed matrix (so Y starts at zero).
Point rpca_start(const RpcaInstance& inst);
// Frobenius norm of the observed matrix, used as the relative
// infeasibility reference.
double rpca_infeas_ref(const RpcaInstance& inst);

// Closed-form subproblem solutions for the smoothed formulation.
// x step: C = mu * grad g_sigma(Y) - Y + M, then the prox of the smoothed
// nuclear norm at C with parameter mu.
Mat rpca_x_subproblem(const Mat& y, const RpcaInstance& inst, double mu);
// y step: B = mu * grad f_sigma(X) - X + M, then the smoothed l1 prox of B
// with parameter mu. With a mask, only the shrinkage operand is projected;
// entries off the mask carry no penalty and keep Y = B exactly.
Mat rpca_y_subproblem(const Mat& x, const RpcaInstance& inst, double mu);

struct CompletionSpec {
  Index n = 0;
  Index rank = 0;
  double spr = 0.0;  // corruption density, in [0, 1)
  double sr = 1.0;   // sampling ratio, in (0, 1]
  double rho = 0.0;  // <= 0 selects 1/sqrt(n)
  double sigma = 1e-6;
  std::uint64_t seed = 0;
};

struct CompletionInstance {
  RpcaInstance problem;
  Mat truth_low_rank;
  Mat truth_sparse;
};

// Low-rank A = A_L A_R^T with n x rank iid N(0,1) factors; observed set of
// round(sr n^2) entries drawn uniformly; round(spr n^2) corrupted entries
// drawn uniformly inside the observed set with values uniform in
// [-500, 500]; M = A + E. Draw order: A_L, A_R (column-major), observed
// set, corruption support, corruption values.
CompletionInstance generate_completion(const CompletionSpec& spec);

struct RelErrors {
  double rel_x = 0.0;
  double rel_y = 0.0;
  bool absolute_x = false;  // set when the reference norm is zero
  bool absolute_y = false;
};

RelErrors relative_errors(const Mat& x, const Mat& y, const Mat& truth_a,
                          const Mat& truth_e);

}  // namespace altlin
