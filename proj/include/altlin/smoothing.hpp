#pragma once

// Smooth approximations of the l1 and nuclear norms obtained by subtracting a
// strongly convex term from the conjugate representation
//   h_sigma(x) = max { <x, z> - sigma/2 ||z||^2 : z in dual ball }.
// Each approximation satisfies h_sigma <= h <= h_sigma + gap_bound() and has a
// 1/sigma Lipschitz gradient. The proximal operators below are exact closed
// forms.

#include "altlin/linalg.hpp"

namespace altlin {

// rho * ||x||_1 smoothed; per-entry Huber function with knee at rho*sigma.
struct SmoothedL1 {
  double rho;
  double sigma;

  double eval(const Vec& x) const;
  double eval(const Mat& x) const;
  Vec grad(const Vec& x) const;   // entrywise clip(x/sigma, +-rho)
  Mat grad(const Mat& x) const;
  // argmin_x tau * smoothed(x) + 1/2 ||x - z||^2
  //   = z - tau * clip(z / (tau + sigma), +-rho)
  Vec prox(const Vec& z, double tau) const;
  Mat prox(const Mat& z, double tau) const;
  double lipschitz() const { return 1.0 / sigma; }
  double gap_bound(Index n) const { return sigma * n * rho * rho / 2.0; }
};

// ||x||_* smoothed; acts on singular values like SmoothedL1 with rho = 1.
struct SmoothedNuclear {
  double sigma;

  double eval(const Mat& x) const;
  // u * diag(min(s/sigma, 1)) * v^T
  Mat grad(const Mat& x) const;
  // argmin_x tau * smoothed(x) + 1/2 ||x - z||^2; shares singular vectors
  // with z, singular values s -> s - tau * s / max(s, sigma + tau).
  Mat prox(const Mat& z, double tau) const;
  double lipschitz() const { return 1.0 / sigma; }
  double gap_bound(Index rows, Index cols) const {
    return sigma * static_cast<double>(std::min(rows, cols)) / 2.0;
  }
};

// rho * ||P_mask(x)||_1 smoothed; entries off the mask contribute nothing and
// have zero gradient, so the prox leaves them untouched.
struct SmoothedMaskedL1 {
  double rho;
  double sigma;
  IndexMask mask;

  double eval(const Mat& x) const;
  Mat grad(const Mat& x) const;
  Mat prox(const Mat& z, double tau) const;
  double lipschitz() const { return 1.0 / sigma; }
  double gap_bound() const {
    return sigma * static_cast<double>(mask.count()) * rho * rho / 2.0;
  }
};

// Smoothing level that makes the approximation gap at most eps for the given
// problem family.
double sigma_for_epsilon_l1(double eps, Index n, double rho);
double sigma_for_epsilon_rpca(double eps, Index rows, Index cols, double rho);

}  // namespace altlin
