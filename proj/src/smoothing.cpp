#include "altlin/smoothing.hpp"

#include <algorithm>
#include <cmath>

namespace altlin {

namespace {

// max { x*z - sigma/2 z^2 : |z| <= rho } for scalar x.
inline double huber1(double x, double rho, double sigma) {
  const double ax = std::abs(x);
  if (ax <= rho * sigma) return ax * ax / (2.0 * sigma);
  return rho * ax - sigma * rho * rho / 2.0;
}

inline double clip1(double x, double bound) {
  return std::min(bound, std::max(-bound, x));
}

inline double prox1(double z, double tau, double rho, double sigma) {
  return z - tau * clip1(z / (tau + sigma), rho);
}

}  // namespace

double SmoothedL1::eval(const Vec& x) const {
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) acc += huber1(x[i], rho, sigma);
  return acc;
}

double SmoothedL1::eval(const Mat& x) const {
  double acc = 0.0;
  const double* p = x.data();
  for (Index i = 0; i < x.size(); ++i) acc += huber1(p[i], rho, sigma);
  return acc;
}

Vec SmoothedL1::grad(const Vec& x) const {
  const double r = rho, s = sigma;
  return x.unaryExpr([r, s](double v) { return clip1(v / s, r); });
}

Mat SmoothedL1::grad(const Mat& x) const {
  const double r = rho, s = sigma;
  return x.unaryExpr([r, s](double v) { return clip1(v / s, r); });
}

Vec SmoothedL1::prox(const Vec& z, double tau) const {
  const double r = rho, s = sigma;
  return z.unaryExpr([r, s, tau](double v) { return prox1(v, tau, r, s); });
}

Mat SmoothedL1::prox(const Mat& z, double tau) const {
  const double r = rho, s = sigma;
  return z.unaryExpr([r, s, tau](double v) { return prox1(v, tau, r, s); });
}

double SmoothedNuclear::eval(const Mat& x) const {
  const Vec s = svd(x).s;
  double acc = 0.0;
  for (Index i = 0; i < s.size(); ++i) acc += huber1(s[i], 1.0, sigma);
  return acc;
}

Mat SmoothedNuclear::grad(const Mat& x) const {
  SvdFactors f = svd(x);
  Vec w = f.s / sigma;
  for (Index i = 0; i < w.size(); ++i) w[i] = std::min(w[i], 1.0);
  return f.u * w.asDiagonal() * f.v.transpose();
}

Mat SmoothedNuclear::prox(const Mat& z, double tau) const {
  SvdFactors f = svd(z);
  Vec s = f.s;
  for (Index i = 0; i < s.size(); ++i) {
    s[i] -= tau * s[i] / std::max(s[i], sigma + tau);
  }
  return f.u * s.asDiagonal() * f.v.transpose();
}

double SmoothedMaskedL1::eval(const Mat& x) const {
  if (x.rows() != mask.rows || x.cols() != mask.cols) {
    throw std::invalid_argument("SmoothedMaskedL1::eval: shape mismatch");
  }
  const double* p = x.data();
  double acc = 0.0;
  for (Index k : mask.idx) acc += huber1(p[k], rho, sigma);
  return acc;
}

Mat SmoothedMaskedL1::grad(const Mat& x) const {
  if (x.rows() != mask.rows || x.cols() != mask.cols) {
    throw std::invalid_argument("SmoothedMaskedL1::grad: shape mismatch");
  }
  Mat out = Mat::Zero(x.rows(), x.cols());
  const double* src = x.data();
  double* dst = out.data();
  for (Index k : mask.idx) dst[k] = clip1(src[k] / sigma, rho);
  return out;
}

Mat SmoothedMaskedL1::prox(const Mat& z, double tau) const {
  if (z.rows() != mask.rows || z.cols() != mask.cols) {
    throw std::invalid_argument("SmoothedMaskedL1::prox: shape mismatch");
  }
  Mat out = z;
  double* p = out.data();
  for (Index k : mask.idx) p[k] = prox1(p[k], tau, rho, sigma);
  return out;
}

double sigma_for_epsilon_l1(double eps, Index n, double rho) {
  if (eps <= 0.0 || n <= 0 || rho <= 0.0) {
    throw std::invalid_argument("sigma_for_epsilon_l1: positive inputs required");
  }
  return eps / (static_cast<double>(n) * rho * rho);
}

double sigma_for_epsilon_rpca(double eps, Index rows, Index cols, double rho) {
  if (eps <= 0.0 || rows <= 0 || cols <= 0 || rho <= 0.0) {
    throw std::invalid_argument(
        "sigma_for_epsilon_rpca: positive inputs required");
  }
  const double d_f = static_cast<double>(std::min(rows, cols));
  const double d_g = static_cast<double>(rows) * static_cast<double>(cols) *
                     rho * rho;
  return eps / (2.0 * std::max(d_f, d_g));
}

}  // namespace altlin
