#pragma once

// Dense linear algebra kernels shared by the solvers: thin SVD with a fixed
// sign convention, shrinkage operators, masked projection, an orthonormal 2-D
// Haar transform and a circular uniform blur, plus the small text file formats
// used by the benchmark tool.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace altlin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;  // column-major
using Index = Eigen::Index;

// Numeric failure inside a kernel (e.g. SVD did not converge).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File format / IO problem.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thin SVD a = u * diag(s) * v^T with r = min(rows, cols) columns.
// s is non-negative and non-increasing. Sign convention: the first nonzero
// entry of every column of u is non-negative (v columns flip together with u),
// which makes the factorization deterministic for a given input.
struct SvdFactors {
  Mat u;  // m x r
  Vec s;  // r
  Mat v;  // n x r
};

SvdFactors svd(const Mat& a);

// Reassemble u * diag(s) * v^T.
Mat svd_reconstruct(const SvdFactors& f);

// Set of observed entries of a rows x cols matrix. Stored as sorted unique
// column-major linear indices.
struct IndexMask {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> idx;

  static IndexMask from_pairs(Index rows, Index cols,
                              const std::vector<std::pair<Index, Index>>& ij);
  Index count() const { return static_cast<Index>(idx.size()); }
  // Throws std::invalid_argument if indices are out of bounds, unsorted or
  // duplicated.
  void validate() const;
};

// Entrywise soft-thresholding: sign(z) * max(|z| - kappa, 0).
Vec vector_shrink(const Vec& z, double kappa);
Mat vector_shrink(const Mat& z, double kappa);

// Singular value soft-thresholding: u * diag(max(s - kappa, 0)) * v^T.
Mat matrix_shrink(const Mat& z, double kappa);

// Zero all entries outside the mask.
Mat project_mask(const Mat& a, const IndexMask& mask);

enum class HaarDir { forward, inverse };

// Orthonormal separable 2-D Haar transform with `levels` decomposition
// levels; pairs map to ((a+b)/sqrt2, (a-b)/sqrt2), averages stored first,
// and deeper levels recurse on the average block. rows and cols must be
// divisible by 2^levels. The inverse composed with the forward is the
// identity (orthonormal).
Mat haar_2d(const Mat& image, int levels, HaarDir dir);

// Circular (periodic) convolution with a uniform kernel_size x kernel_size
// kernel of total weight 1. kernel_size must be odd and at most
// min(rows, cols). The operator is symmetric, so the adjoint equals a
// convolution with the reflected (identical) kernel; `adjoint` is kept for
// interface clarity and flips the offset sign.
Mat uniform_blur_apply(const Mat& image, int kernel_size, bool adjoint = false);

// Text formats:
//   matrix: "rows cols" then rows*cols values in row-major order
//   mask:   "rows cols k" then k lines "i j" (0-based)
Mat load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Mat& a);
IndexMask load_mask(const std::string& path);
void save_mask(const std::string& path, const IndexMask& mask);

// Seedable generator with a portable, documented mapping from the raw
// mt19937_64 stream to values:
//   uniform01: (x >> 11) * 2^-53, in [0,1)
//   normal:    Box-Muller from two uniform01 draws (both drawn even when the
//              cosine branch alone would do, so draw counts stay fixed)
//   below(n):  floor(uniform01() * n), in [0, n)
struct Rng {
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform01();
  double normal();
  std::int64_t below(std::int64_t n);

 private:
  std::mt19937_64 eng;
};

}  // namespace altlin
