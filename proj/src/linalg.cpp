#include "altlin/linalg.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace altlin {

SvdFactors svd(const Mat& a) {
  Eigen::JacobiSVD<Mat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw NumericError("svd: decomposition did not converge");
  }
  SvdFactors f{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  // Fix signs: first nonzero entry of each left singular vector >= 0.
  for (Index j = 0; j < f.u.cols(); ++j) {
    for (Index i = 0; i < f.u.rows(); ++i) {
      const double e = f.u(i, j);
      if (e != 0.0) {
        if (e < 0.0) {
          f.u.col(j) = -f.u.col(j);
          f.v.col(j) = -f.v.col(j);
        }
        break;
      }
    }
  }
  return f;
}

Mat svd_reconstruct(const SvdFactors& f) {
  return f.u * f.s.asDiagonal() * f.v.transpose();
}

IndexMask IndexMask::from_pairs(
    Index rows, Index cols, const std::vector<std::pair<Index, Index>>& ij) {
  IndexMask m;
  m.rows = rows;
  m.cols = cols;
  m.idx.reserve(ij.size());
  for (const auto& [i, j] : ij) {
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw std::invalid_argument("IndexMask: entry out of bounds");
    }
    m.idx.push_back(i + j * rows);
  }
  std::sort(m.idx.begin(), m.idx.end());
  m.idx.erase(std::unique(m.idx.begin(), m.idx.end()), m.idx.end());
  return m;
}

void IndexMask::validate() const {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("IndexMask: negative shape");
  }
  Index prev = -1;
  for (Index k : idx) {
    if (k < 0 || k >= rows * cols) {
      throw std::invalid_argument("IndexMask: linear index out of bounds");
    }
    if (k <= prev) {
      throw std::invalid_argument("IndexMask: indices not sorted unique");
    }
    prev = k;
  }
}

namespace {
inline double shrink1(double z, double kappa) {
  const double m = std::abs(z) - kappa;
  return m > 0.0 ? (z > 0.0 ? m : -m) : 0.0;
}
}  // namespace

Vec vector_shrink(const Vec& z, double kappa) {
  return z.unaryExpr([kappa](double v) { return shrink1(v, kappa); });
}

Mat vector_shrink(const Mat& z, double kappa) {
  return z.unaryExpr([kappa](double v) { return shrink1(v, kappa); });
}

Mat matrix_shrink(const Mat& z, double kappa) {
  SvdFactors f = svd(z);
  Vec s = vector_shrink(f.s, kappa);
  return f.u * s.asDiagonal() * f.v.transpose();
}

Mat project_mask(const Mat& a, const IndexMask& mask) {
  if (a.rows() != mask.rows || a.cols() != mask.cols) {
    throw std::invalid_argument("project_mask: shape mismatch");
  }
  Mat out = Mat::Zero(a.rows(), a.cols());
  const double* src = a.data();
  double* dst = out.data();
  for (Index k : mask.idx) dst[k] = src[k];
  return out;
}

namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

// One analysis step on the leading h x w block, columns then rows.
void haar_step_forward(Mat& a, Index h, Index w) {
  Mat tmp(h, w);
  for (Index j = 0; j < w; ++j) {
    for (Index i = 0; i < h / 2; ++i) {
      const double lo = a(2 * i, j), hi = a(2 * i + 1, j);
      tmp(i, j) = (lo + hi) * kInvSqrt2;
      tmp(h / 2 + i, j) = (lo - hi) * kInvSqrt2;
    }
  }
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w / 2; ++j) {
      const double lo = tmp(i, 2 * j), hi = tmp(i, 2 * j + 1);
      a(i, j) = (lo + hi) * kInvSqrt2;
      a(i, w / 2 + j) = (lo - hi) * kInvSqrt2;
    }
  }
}

void haar_step_inverse(Mat& a, Index h, Index w) {
  Mat tmp(h, w);
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w / 2; ++j) {
      const double av = a(i, j), dt = a(i, w / 2 + j);
      tmp(i, 2 * j) = (av + dt) * kInvSqrt2;
      tmp(i, 2 * j + 1) = (av - dt) * kInvSqrt2;
    }
  }
  for (Index j = 0; j < w; ++j) {
    for (Index i = 0; i < h / 2; ++i) {
      const double av = tmp(i, j), dt = tmp(h / 2 + i, j);
      a(2 * i, j) = (av + dt) * kInvSqrt2;
      a(2 * i + 1, j) = (av - dt) * kInvSqrt2;
    }
  }
}

}  // namespace

Mat haar_2d(const Mat& image, int levels, HaarDir dir) {
  const Index m = image.rows(), n = image.cols();
  if (levels < 0) throw std::invalid_argument("haar_2d: negative levels");
  const Index div = Index{1} << levels;
  if (m % div != 0 || n % div != 0) {
    throw std::invalid_argument(
        "haar_2d: shape not divisible by 2^levels");
  }
  Mat a = image;
  if (dir == HaarDir::forward) {
    for (int l = 0; l < levels; ++l) {
      haar_step_forward(a, m >> l, n >> l);
    }
  } else {
    for (int l = levels - 1; l >= 0; --l) {
      haar_step_inverse(a, m >> l, n >> l);
    }
  }
  return a;
}

Mat uniform_blur_apply(const Mat& image, int kernel_size, bool adjoint) {
  const Index m = image.rows(), n = image.cols();
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw std::invalid_argument("uniform_blur_apply: kernel size must be odd");
  }
  if (kernel_size > m || kernel_size > n) {
    throw std::invalid_argument("uniform_blur_apply: kernel larger than image");
  }
  const int r = kernel_size / 2;
  const double w = 1.0 / kernel_size;
  const int sign = adjoint ? 1 : -1;
  // Separable: 1-D circular mean along rows, then along columns.
  Mat pass1 = Mat::Zero(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int d = -r; d <= r; ++d) {
        const Index ii = ((i + sign * d) % m + m) % m;
        acc += image(ii, j);
      }
      pass1(i, j) = acc * w;
    }
  }
  Mat out = Mat::Zero(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int d = -r; d <= r; ++d) {
        const Index jj = ((j + sign * d) % n + n) % n;
        acc += pass1(i, jj);
      }
      out(i, j) = acc * w;
    }
  }
  return out;
}

Mat load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file: " + path);
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw IoError("bad matrix header in " + path);
  }
  Mat a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!(in >> a(i, j))) {
        throw IoError("matrix file truncated: " + path);
      }
    }
  }
  return a;
}

void save_matrix(const std::string& path, const Mat& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write matrix file: " + path);
  out << a.rows() << ' ' << a.cols() << '\n';
  out.precision(17);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out << a(i, j) << (j + 1 == a.cols() ? '\n' : ' ');
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

IndexMask load_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mask file: " + path);
  Index rows = 0, cols = 0, k = 0;
  if (!(in >> rows >> cols >> k) || rows < 0 || cols < 0 || k < 0) {
    throw IoError("bad mask header in " + path);
  }
  std::vector<std::pair<Index, Index>> ij;
  ij.reserve(static_cast<std::size_t>(k));
  for (Index t = 0; t < k; ++t) {
    Index i = 0, j = 0;
    if (!(in >> i >> j)) throw IoError("mask file truncated: " + path);
    ij.emplace_back(i, j);
  }
  try {
    return IndexMask::from_pairs(rows, cols, ij);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string(e.what()) + " in " + path);
  }
}

void save_mask(const std::string& path, const IndexMask& mask) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mask file: " + path);
  out << mask.rows << ' ' << mask.cols << ' ' << mask.count() << '\n';
  for (Index k : mask.idx) {
    out << (k % mask.rows) << ' ' << (k / mask.rows) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

double Rng::uniform01() {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  // Box-Muller; draws exactly two uniforms per call.
  double u1 = uniform01();
  const double u2 = uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t Rng::below(std::int64_t n) {
  const auto v = static_cast<std::int64_t>(uniform01() * static_cast<double>(n));
  return v >= n ? n - 1 : v;
}

}  // namespace altlin
