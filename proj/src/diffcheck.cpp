#include "matroot/diffcheck.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace matroot {

namespace {

void require_same_dim(const Mat& x, const Mat& y, const char* who) {
  if (x.dim() != y.dim()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
}

// <upstream, f(m)> with an explicit positive-definiteness check; returns
// nullopt when the perturbed matrix is no longer PD.
std::optional<double> spectral_loss(Target target, const Mat& m, const Mat& upstream) {
  SpectralDecomp d = sym_eig(SymMatrix(m));
  if (!(d.eigenvalues.front() > 0.0)) return std::nullopt;
  const int dim = m.dim();
  Mat scaled = d.eigenvectors;
  for (int j = 0; j < dim; ++j) {
    double lam = d.eigenvalues[static_cast<size_t>(j)];
    double f = target == Target::Sqrt ? std::sqrt(lam) : 1.0 / std::sqrt(lam);
    for (int i = 0; i < dim; ++i) scaled.at(i, j) *= f;
  }
  Mat value = matmul(scaled, transpose(d.eigenvectors));
  double acc = 0.0;
  for (int i = 0; i < dim * dim; ++i) acc += upstream.data()[i] * value.data()[i];
  return acc;
}

std::optional<Mat> fd_sweep(Target target, const SymMatrix& a, const Mat& upstream, double h) {
  const int dim = a.mat().dim();
  Mat grad(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      double step = i == j ? h : 0.5 * h;
      Mat plus = a.mat();
      Mat minus = a.mat();
      plus.at(i, j) += step;
      minus.at(i, j) -= step;
      if (i != j) {
        plus.at(j, i) += step;
        minus.at(j, i) -= step;
      }
      auto lp = spectral_loss(target, plus, upstream);
      auto lm = spectral_loss(target, minus, upstream);
      if (!lp || !lm) return std::nullopt;
      double d = (*lp - *lm) / (2.0 * h);
      grad.at(i, j) = d;
      grad.at(j, i) = d;
    }
  }
  return grad;
}

}  // namespace

double mae(const Mat& approx, const Mat& exact) {
  require_same_dim(approx, exact, "mae");
  double acc = 0.0;
  const int n = approx.dim() * approx.dim();
  for (int i = 0; i < n; ++i) acc += std::fabs(approx.data()[i] - exact.data()[i]);
  return acc / n;
}

double nrmse(const Mat& approx, const Mat& exact) {
  require_same_dim(approx, exact, "nrmse");
  double num = 0.0;
  double den = 0.0;
  const int n = approx.dim() * approx.dim();
  for (int i = 0; i < n; ++i) {
    double d = approx.data()[i] - exact.data()[i];
    num += d * d;
    den += exact.data()[i] * exact.data()[i];
  }
  if (den == 0.0) throw std::invalid_argument("nrmse: exact matrix is zero");
  return std::sqrt(num / den);
}

double whitening_error(const SymMatrix& a, const SymMatrix& isqrt_approx) {
  require_same_dim(a, isqrt_approx, "whitening_error");
  Mat w = matmul(matmul(isqrt_approx, a), isqrt_approx.mat());
  for (int i = 0; i < w.dim(); ++i) w.at(i, i) -= 1.0;
  return frobenius_norm(w);
}

Mat finite_diff_grad(Target target, const SymMatrix& a, const Mat& upstream, double h) {
  require_same_dim(a, upstream, "finite_diff_grad");
  const int dim = a.mat().dim();
  if (h <= 0.0) h = 1e-5 * frobenius_norm(a) / dim;
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("finite_diff_grad: step must be positive and finite");
  }
  if (auto g = fd_sweep(target, a, upstream, h)) return *std::move(g);
  if (auto g = fd_sweep(target, a, upstream, h / 10.0)) return *std::move(g);
  throw std::runtime_error("finite_diff_grad: perturbed matrix lost positive definiteness");
}

ErrorReport make_error_report(const SymMatrix& a, const SymMatrix& approx, const Mat& exact,
                              Target target) {
  ErrorReport report;
  report.mae = mae(approx, exact);
  report.nrmse = nrmse(approx, exact);
  if (target == Target::Sqrt) {
    Mat sq = matmul(approx, approx.mat());
    sq -= a.mat();
    report.defining_residual = frobenius_norm(sq) / frobenius_norm(a);
  } else {
    double w = whitening_error(a, approx);
    report.defining_residual = w;
    report.whitening_error = w;
  }
  return report;
}

}  // namespace matroot
