#include "altlin/problems.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace altlin {

Vec flatten(const Mat& a) {
  return Eigen::Map<const Vec>(a.data(), a.size());
}

Mat unflatten(const Vec& v, Index rows, Index cols) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

LassoInstance make_lasso(Mat a, Vec b, double rho) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("make_lasso: A rows must match b size");
  }
  if (rho <= 0.0) throw std::invalid_argument("make_lasso: rho must be positive");
  LassoInstance inst;
  const Mat ata = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Mat> eig(ata, Eigen::EigenvaluesOnly);
  inst.lip_f = eig.eigenvalues().maxCoeff();
  inst.a = std::move(a);
  inst.b = std::move(b);
  inst.rho = rho;
  return inst;
}

LassoInstance random_lasso(Index m, Index n, double rho, std::uint64_t seed) {
  if (m <= 0 || n <= 0) {
    throw std::invalid_argument("random_lasso: m and n must be positive");
  }
  Rng rng(seed);
  Mat a(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) a(i, j) = rng.normal() * scale;
  }
  const Index nnz = (n + 9) / 10;
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index t = 0; t < nnz; ++t) {
    const Index j = t + rng.below(n - t);
    std::swap(perm[static_cast<std::size_t>(t)],
              perm[static_cast<std::size_t>(j)]);
  }
  Vec x_true = Vec::Zero(n);
  for (Index t = 0; t < nnz; ++t) {
    x_true[perm[static_cast<std::size_t>(t)]] =
        rng.uniform01() < 0.5 ? 1.0 : -1.0;
  }
  Vec b = a * x_true;
  for (Index i = 0; i < m; ++i) b[i] += 0.01 * rng.normal();
  return make_lasso(std::move(a), std::move(b), rho);
}

namespace {

// Caches the Cholesky factor of (I + tau A^T A) for the last tau seen.
struct LassoProxCache {
  double tau = -1.0;
  Eigen::LLT<Mat> llt;
};

FunctionHandle lasso_f(const LassoInstance& inst) {
  auto a = std::make_shared<Mat>(inst.a);
  auto b = std::make_shared<Vec>(inst.b);
  auto ata = std::make_shared<Mat>(inst.a.transpose() * inst.a);
  auto atb = std::make_shared<Vec>(inst.a.transpose() * inst.b);
  auto cache = std::make_shared<LassoProxCache>();
  FunctionHandle f;
  f.smooth = true;
  f.lipschitz_hint = inst.lip_f;
  f.eval = [a, b](const Point& x) { return 0.5 * (*a * x - *b).squaredNorm(); };
  f.grad_or_subgrad = [a, b](const Point& x) -> Point {
    return a->transpose() * (*a * x - *b);
  };
  f.prox = [ata, atb, cache](const Point& z, double tau) -> Point {
    if (cache->tau != tau) {
      Mat sys = tau * *ata;
      sys.diagonal().array() += 1.0;
      cache->llt.compute(sys);
      if (cache->llt.info() != Eigen::Success) {
        throw NumericError("lasso prox: Cholesky factorization failed");
      }
      cache->tau = tau;
    }
    return cache->llt.solve((z + tau * *atb).eval());
  };
  return f;
}

FunctionHandle exact_l1(double rho) {
  FunctionHandle g;
  g.smooth = false;
  g.eval = [rho](const Point& x) { return rho * x.cwiseAbs().sum(); };
  g.grad_or_subgrad = [rho](const Point& x) -> Point {
    return x.unaryExpr(
        [rho](double v) { return v > 0.0 ? rho : (v < 0.0 ? -rho : 0.0); });
  };
  g.prox = [rho](const Point& z, double tau) -> Point {
    return vector_shrink(z, tau * rho);
  };
  return g;
}

FunctionHandle smoothed_l1(double rho, double sigma) {
  SmoothedL1 s{rho, sigma};
  FunctionHandle g;
  g.smooth = true;
  g.lipschitz_hint = s.lipschitz();
  g.eval = [s](const Point& x) { return s.eval(x); };
  g.grad_or_subgrad = [s](const Point& x) -> Point { return s.grad(x); };
  g.prox = [s](const Point& z, double tau) -> Point { return s.prox(z, tau); };
  return g;
}

}  // namespace

SplitObjective lasso_handles(const LassoInstance& inst,
                             std::optional<double> sigma) {
  SplitObjective obj;
  obj.dim = inst.a.cols();
  obj.f = lasso_f(inst);
  obj.g = sigma ? smoothed_l1(inst.rho, *sigma) : exact_l1(inst.rho);
  return obj;
}

DeblurInstance make_synthetic_deblur(Index height, Index width,
                                     int kernel_size, int levels, double rho,
                                     double noise_std, std::uint64_t seed) {
  DeblurInstance inst;
  inst.height = height;
  inst.width = width;
  inst.kernel_size = kernel_size;
  inst.levels = levels;
  inst.rho = rho;
  // Piecewise-constant scene: bright rectangle plus a dimmer off-center
  // square, on a dark background.
  Mat scene = Mat::Zero(height, width);
  for (Index i = height / 4; i < (5 * height) / 8; ++i) {
    for (Index j = width / 4; j < (5 * width) / 8; ++j) scene(i, j) = 1.0;
  }
  for (Index i = (5 * height) / 8; i < (7 * height) / 8; ++i) {
    for (Index j = (5 * width) / 8; j < (7 * width) / 8; ++j) {
      scene(i, j) = 0.5;
    }
  }
  Mat blurred = uniform_blur_apply(scene, kernel_size);
  if (noise_std > 0.0) {
    Rng rng(seed);
    for (Index j = 0; j < width; ++j) {
      for (Index i = 0; i < height; ++i) {
        blurred(i, j) += noise_std * rng.normal();
      }
    }
  }
  inst.observed = flatten(blurred);
  return inst;
}

Vec deblur_apply(const DeblurInstance& inst, const Vec& x) {
  const Mat img =
      haar_2d(unflatten(x, inst.height, inst.width), inst.levels,
              HaarDir::inverse);
  return flatten(uniform_blur_apply(img, inst.kernel_size));
}

Vec deblur_apply_adjoint(const DeblurInstance& inst, const Vec& r) {
  const Mat img = uniform_blur_apply(unflatten(r, inst.height, inst.width),
                                     inst.kernel_size, /*adjoint=*/true);
  return flatten(haar_2d(img, inst.levels, HaarDir::forward));
}

namespace {

// Conjugate gradients for (I + tau A^T A) x = rhs; the operator is SPD with
// spectrum in [1, 1 + tau].
Vec deblur_prox_solve(const DeblurInstance& inst, const Vec& rhs, double tau) {
  const auto apply = [&](const Vec& v) -> Vec {
    return v + tau * deblur_apply_adjoint(inst, deblur_apply(inst, v));
  };
  Vec x = Vec::Zero(rhs.size());
  Vec r = rhs;  // rhs - apply(0)
  Vec p = r;
  double rs = r.squaredNorm();
  const double stop = 1e-10 * rhs.norm();
  const long cap = 10 * rhs.size() + 50;
  for (long it = 0; it < cap; ++it) {
    if (std::sqrt(rs) <= stop) return x;
    const Vec ap = apply(p);
    const double alpha = rs / p.dot(ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  if (std::sqrt(rs) <= stop) return x;
  throw NumericError("deblur prox: conjugate gradients did not converge");
}

}  // namespace

SplitObjective deblur_handles(const DeblurInstance& inst,
                              std::optional<double> sigma) {
  if (inst.kernel_size < 1 || inst.kernel_size % 2 == 0) {
    throw std::invalid_argument("deblur_handles: kernel size must be odd");
  }
  auto shared = std::make_shared<DeblurInstance>(inst);
  SplitObjective obj;
  obj.dim = inst.height * inst.width;
  obj.f.smooth = true;
  obj.f.lipschitz_hint = 1.0;  // ||blur o inverse-haar||_2 = 1
  obj.f.eval = [shared](const Point& x) {
    return 0.5 * (deblur_apply(*shared, x) - shared->observed).squaredNorm();
  };
  obj.f.grad_or_subgrad = [shared](const Point& x) -> Point {
    return deblur_apply_adjoint(
        *shared, deblur_apply(*shared, x) - shared->observed);
  };
  obj.f.prox = [shared](const Point& z, double tau) -> Point {
    const Vec rhs =
        z + tau * deblur_apply_adjoint(*shared, shared->observed);
    return deblur_prox_solve(*shared, rhs, tau);
  };
  obj.g = sigma ? smoothed_l1(inst.rho, *sigma) : exact_l1(inst.rho);
  return obj;
}

RpcaInstance make_rpca(Mat m, std::optional<IndexMask> mask, double rho,
                       double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("make_rpca: sigma must be positive");
  RpcaInstance inst;
  if (rho <= 0.0) {
    rho = 1.0 / std::sqrt(static_cast<double>(std::max(m.rows(), m.cols())));
  }
  inst.rho = rho;
  inst.sigma = sigma;
  if (mask) {
    mask->validate();
    if (mask->rows != m.rows() || mask->cols != m.cols()) {
      throw std::invalid_argument("make_rpca: mask shape mismatch");
    }
    inst.m = project_mask(m, *mask);
    inst.mask = std::move(mask);
  } else {
    inst.m = std::move(m);
  }
  return inst;
}

namespace {

FunctionHandle rpca_f_handle(const RpcaInstance& inst, bool smooth_f) {
  const Index rows = inst.m.rows(), cols = inst.m.cols();
  FunctionHandle f;
  if (smooth_f) {
    SmoothedNuclear sn{inst.sigma};
    f.smooth = true;
    f.lipschitz_hint = sn.lipschitz();
    f.eval = [sn, rows, cols](const Point& x) {
      return sn.eval(unflatten(x, rows, cols));
    };
    f.grad_or_subgrad = [sn, rows, cols](const Point& x) -> Point {
      return flatten(sn.grad(unflatten(x, rows, cols)));
    };
    f.prox = [sn, rows, cols](const Point& z, double tau) -> Point {
      return flatten(sn.prox(unflatten(z, rows, cols), tau));
    };
  } else {
    f.smooth = false;
    f.eval = [rows, cols](const Point& x) {
      return svd(unflatten(x, rows, cols)).s.sum();
    };
    f.grad_or_subgrad = [rows, cols](const Point& x) -> Point {
      const SvdFactors d = svd(unflatten(x, rows, cols));
      const double tol = 1e-12 * std::max(1.0, d.s.size() ? d.s[0] : 0.0);
      Mat sub = Mat::Zero(rows, cols);
      for (Index i = 0; i < d.s.size(); ++i) {
        if (d.s[i] > tol) sub += d.u.col(i) * d.v.col(i).transpose();
      }
      return flatten(sub);
    };
    f.prox = [rows, cols](const Point& z, double tau) -> Point {
      return flatten(matrix_shrink(unflatten(z, rows, cols), tau));
    };
  }
  return f;
}

// g in the split variable y = M - Y: g(y) = penalty(M - y). The prox maps
// through the same change of variable, with B = M - z recovering exactly the
// closed-form y-step operand.
template <class Penalty>
FunctionHandle rpca_g_from(const Mat& m_obs, Penalty pen, bool smooth) {
  auto mhat = std::make_shared<Mat>(m_obs);
  const Index rows = m_obs.rows(), cols = m_obs.cols();
  FunctionHandle g;
  g.smooth = smooth;
  g.eval = [mhat, pen, rows, cols](const Point& v) {
    return pen.eval((*mhat - unflatten(v, rows, cols)).eval());
  };
  g.grad_or_subgrad = [mhat, pen, rows, cols](const Point& v) -> Point {
    return flatten((-pen.grad((*mhat - unflatten(v, rows, cols)).eval())).eval());
  };
  g.prox = [mhat, pen, rows, cols](const Point& z, double tau) -> Point {
    const Mat b = *mhat - unflatten(z, rows, cols);
    return flatten((*mhat - pen.prox(b, tau)).eval());
  };
  return g;
}

// Exact penalties in matrix form, mirroring the smoothed interface.
struct ExactL1Penalty {
  double rho;
  double eval(const Mat& y) const { return rho * y.cwiseAbs().sum(); }
  Mat grad(const Mat& y) const {
    const double r = rho;
    return y.unaryExpr(
        [r](double v) { return v > 0.0 ? r : (v < 0.0 ? -r : 0.0); });
  }
  Mat prox(const Mat& b, double tau) const {
    return vector_shrink(b, tau * rho);
  }
};

struct ExactMaskedL1Penalty {
  double rho;
  IndexMask mask;
  double eval(const Mat& y) const {
    const double* p = y.data();
    double acc = 0.0;
    for (Index k : mask.idx) acc += std::abs(p[k]);
    return rho * acc;
  }
  Mat grad(const Mat& y) const {
    Mat out = Mat::Zero(y.rows(), y.cols());
    const double* src = y.data();
    double* dst = out.data();
    for (Index k : mask.idx) {
      dst[k] = src[k] > 0.0 ? rho : (src[k] < 0.0 ? -rho : 0.0);
    }
    return out;
  }
  Mat prox(const Mat& b, double tau) const {
    Mat out = b;
    double* p = out.data();
    const double kappa = tau * rho;
    for (Index k : mask.idx) {
      const double m = std::abs(p[k]) - kappa;
      p[k] = m > 0.0 ? (p[k] > 0.0 ? m : -m) : 0.0;
    }
    return out;
  }
};

}  // namespace

SplitObjective rpca_handles(const RpcaInstance& inst, bool smooth_f,
                            bool smooth_g) {
  SplitObjective obj;
  obj.dim = inst.m.size();
  obj.f = rpca_f_handle(inst, smooth_f);
  if (smooth_g) {
    if (inst.mask) {
      obj.g = rpca_g_from(inst.m,
                          SmoothedMaskedL1{inst.rho, inst.sigma, *inst.mask},
                          true);
    } else {
      obj.g = rpca_g_from(inst.m, SmoothedL1{inst.rho, inst.sigma}, true);
    }
    obj.g.lipschitz_hint = 1.0 / inst.sigma;
  } else {
    if (inst.mask) {
      obj.g = rpca_g_from(inst.m, ExactMaskedL1Penalty{inst.rho, *inst.mask},
                          false);
    } else {
      obj.g = rpca_g_from(inst.m, ExactL1Penalty{inst.rho}, false);
    }
  }
  return obj;
}

Point rpca_start(const RpcaInstance& inst) { return flatten(inst.m); }

double rpca_infeas_ref(const RpcaInstance& inst) {
  const double n = inst.m.norm();
  return n > 0.0 ? n : 1.0;
}

Mat rpca_x_subproblem(const Mat& y, const RpcaInstance& inst, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("rpca_x_subproblem: mu must be positive");
  Mat zgrad;
  if (inst.mask) {
    zgrad = SmoothedMaskedL1{inst.rho, inst.sigma, *inst.mask}.grad(y);
  } else {
    zgrad = SmoothedL1{inst.rho, inst.sigma}.grad(y);
  }
  const Mat c = mu * zgrad - y + inst.m;
  return SmoothedNuclear{inst.sigma}.prox(c, mu);
}

Mat rpca_y_subproblem(const Mat& x, const RpcaInstance& inst, double mu) {
  if (mu <= 0.0) throw std::invalid_argument("rpca_y_subproblem: mu must be positive");
  const Mat b = mu * SmoothedNuclear{inst.sigma}.grad(x) - x + inst.m;
  if (inst.mask) {
    return SmoothedMaskedL1{inst.rho, inst.sigma, *inst.mask}.prox(b, mu);
  }
  return SmoothedL1{inst.rho, inst.sigma}.prox(b, mu);
}

CompletionInstance generate_completion(const CompletionSpec& spec) {
  const Index n = spec.n;
  if (n <= 0) throw std::invalid_argument("generate_completion: n must be positive");
  if (spec.rank <= 0 || spec.rank > n) {
    throw std::invalid_argument("generate_completion: rank out of range");
  }
  if (spec.spr < 0.0 || spec.spr >= 1.0) {
    throw std::invalid_argument("generate_completion: spr must be in [0, 1)");
  }
  if (spec.sr <= 0.0 || spec.sr > 1.0) {
    throw std::invalid_argument("generate_completion: sr must be in (0, 1]");
  }
  const Index total = n * n;
  const auto k_obs = static_cast<Index>(std::llround(spec.sr * total));
  const auto k_err = static_cast<Index>(std::llround(spec.spr * total));
  if (k_err > k_obs) {
    throw std::invalid_argument(
        "generate_completion: corruption density exceeds sampling ratio");
  }
  Rng rng(spec.seed);
  Mat al(n, spec.rank), ar(n, spec.rank);
  for (Index j = 0; j < spec.rank; ++j) {
    for (Index i = 0; i < n; ++i) al(i, j) = rng.normal();
  }
  for (Index j = 0; j < spec.rank; ++j) {
    for (Index i = 0; i < n; ++i) ar(i, j) = rng.normal();
  }
  Mat a = al * ar.transpose();

  const bool masked = k_obs < total;
  std::vector<Index> obs;
  if (masked) {
    std::vector<Index> perm(static_cast<std::size_t>(total));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index t = 0; t < k_obs; ++t) {
      const Index j = t + rng.below(total - t);
      std::swap(perm[static_cast<std::size_t>(t)],
                perm[static_cast<std::size_t>(j)]);
    }
    obs.assign(perm.begin(), perm.begin() + k_obs);
    std::sort(obs.begin(), obs.end());
  } else {
    obs.resize(static_cast<std::size_t>(total));
    std::iota(obs.begin(), obs.end(), Index{0});
  }

  // Corruption support is drawn inside the observed set so the sparse part
  // stays identifiable from the observations.
  Mat e = Mat::Zero(n, n);
  if (k_err > 0) {
    std::vector<Index> pool = obs;
    for (Index t = 0; t < k_err; ++t) {
      const Index j = t + rng.below(static_cast<Index>(pool.size()) - t);
      std::swap(pool[static_cast<std::size_t>(t)],
                pool[static_cast<std::size_t>(j)]);
      e.data()[pool[static_cast<std::size_t>(t)]] =
          -500.0 + 1000.0 * rng.uniform01();
    }
  }

  CompletionInstance out;
  out.truth_low_rank = a;
  out.truth_sparse = e;
  std::optional<IndexMask> mask;
  if (masked) {
    IndexMask im;
    im.rows = n;
    im.cols = n;
    im.idx = std::move(obs);
    mask = std::move(im);
  }
  const double rho =
      spec.rho > 0.0 ? spec.rho : 1.0 / std::sqrt(static_cast<double>(n));
  out.problem = make_rpca(a + e, std::move(mask), rho, spec.sigma);
  return out;
}

RelErrors relative_errors(const Mat& x, const Mat& y, const Mat& truth_a,
                          const Mat& truth_e) {
  RelErrors r;
  const double na = truth_a.norm();
  const double ne = truth_e.norm();
  const double dx = (x - truth_a).norm();
  const double dy = (y - truth_e).norm();
  if (na > 0.0) {
    r.rel_x = dx / na;
  } else {
    r.rel_x = dx;
    r.absolute_x = true;
  }
  if (ne > 0.0) {
    r.rel_y = dy / ne;
  } else {
    r.rel_y = dy;
    r.absolute_y = true;
  }
  return r;
}

}  // namespace altlin
