#include "matroot/backward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace matroot {

namespace {

void check_iterate(const Mat& m, double start_norm, const char* who) {
  double n = frobenius_norm(m);
  if (!std::isfinite(n) || n > 1e6 * start_norm) {
    throw std::runtime_error(std::string(who) + ": iteration diverged");
  }
}

double identity_residual(const Mat& b) {
  double acc = 0.0;
  for (int i = 0; i < b.dim(); ++i) {
    for (int j = 0; j < b.dim(); ++j) {
      double d = b.at(i, j) - (i == j ? 1.0 : 0.0);
      acc += d * d;
    }
  }
  return std::sqrt(acc);
}

double inner(const Mat& x, const Mat& y) {
  double acc = 0.0;
  for (int i = 0; i < x.dim() * x.dim(); ++i) acc += x.data()[i] * y.data()[i];
  return acc;
}

}  // namespace

GradResult lyapunov_grad(const GradRequest& req) {
  const int dim = req.a.mat().dim();
  if (req.forward_value.mat().dim() != dim || req.upstream.dim() != dim) {
    throw std::invalid_argument("lyapunov_grad: dimension mismatch");
  }
  if (req.config.iterations < 1) {
    throw std::invalid_argument("lyapunov_grad: iterations must be at least 1");
  }
  if (req.config.tolerance && !(*req.config.tolerance > 0.0)) {
    throw std::invalid_argument("lyapunov_grad: tolerance must be positive when set");
  }

  OpCounters counters;
  Mat b = req.forward_value.mat();
  Mat c = req.upstream;
  double divisor;
  if (req.target == Target::Sqrt) {
    // B0^2 equals a here, so the divisor needs no extra matmul.
    divisor = std::sqrt(frobenius_norm(req.a));
  } else {
    Mat b2 = matmul(b, b, &counters);
    Mat b2c = matmul(b2, req.upstream, &counters);
    c = matmul(b2c, b2, &counters);
    for (int i = 0; i < dim * dim; ++i) c.data()[i] = -c.data()[i];
    divisor = std::sqrt(frobenius_norm(b2));
  }
  if (!(divisor > 0.0) || !std::isfinite(divisor)) {
    throw std::invalid_argument("lyapunov_grad: forward_value must be nonzero and finite");
  }
  double inv = 1.0 / divisor;
  for (int i = 0; i < dim * dim; ++i) {
    b.data()[i] *= inv;
    c.data()[i] *= inv;
  }

  const double b_start = frobenius_norm(b);
  const double c_start = std::max(frobenius_norm(c), 1.0);
  double residual = identity_residual(b);

  for (int t = 0; t < req.config.iterations; ++t) {
    Mat b2 = matmul(b, b, &counters);
    Mat b2c = matmul(b2, c, &counters);
    Mat bc = matmul(b, c, &counters);
    Mat bcb = matmul(bc, b, &counters);
    Mat cb2 = matmul(c, b2, &counters);
    Mat bb2 = matmul(b, b2, &counters);
    for (int i = 0; i < dim * dim; ++i) {
      c.data()[i] = 0.5 * (-b2c.data()[i] + bcb.data()[i] + 3.0 * c.data()[i] - cb2.data()[i]);
      b.data()[i] = 1.5 * b.data()[i] - 0.5 * bb2.data()[i];
    }
    check_iterate(b, b_start, "lyapunov_grad");
    check_iterate(c, c_start, "lyapunov_grad");
    residual = identity_residual(b);
    if (req.config.tolerance && residual < *req.config.tolerance) break;
  }

  Mat grad = 0.5 * c;
  return GradResult{std::move(grad), residual, counters};
}

Mat bartels_stewart(const SymMatrix& b, const Mat& c, OpCounters* counters) {
  const int dim = b.mat().dim();
  if (c.dim() != dim) throw std::invalid_argument("bartels_stewart: dimension mismatch");
  SpectralDecomp d = sym_eig(b, counters);
  if (!(d.eigenvalues.front() > 0.0)) {
    throw std::runtime_error("bartels_stewart: b must be positive definite");
  }
  Mat ut = transpose(d.eigenvectors);
  Mat ct = matmul(matmul(ut, c, counters), d.eigenvectors, counters);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      ct.at(i, j) /= d.eigenvalues[static_cast<size_t>(i)] + d.eigenvalues[static_cast<size_t>(j)];
    }
  }
  return matmul(matmul(d.eigenvectors, ct, counters), ut, counters);
}

Mat kron_solve(const SymMatrix& b, const Mat& c, OpCounters* counters) {
  const int dim = b.mat().dim();
  if (dim > 8) throw std::invalid_argument("kron_solve: dimension capped at 8");
  if (c.dim() != dim) throw std::invalid_argument("kron_solve: dimension mismatch");

  // Row-major vec satisfies the same Kronecker-sum system as column-major
  // because transposing the Lyapunov equation preserves its form.
  Mat sys = kron(Mat::identity(dim), b.mat());
  Mat bi = kron(b.mat(), Mat::identity(dim));
  for (int i = 0; i < sys.dim() * sys.dim(); ++i) sys.data()[i] += bi.data()[i];

  Mat rhs(dim * dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) rhs.at(i * dim + j, 0) = c.at(i, j);
  }
  Mat sol = solve_spd(SymMatrix::symmetrized(std::move(sys)), rhs, counters);
  Mat x(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) x.at(i, j) = sol.at(i * dim + j, 0);
  }
  return x;
}

GradResult ns_backward(const SymMatrix& a, const Mat& upstream, int iterations) {
  const int dim = a.mat().dim();
  if (upstream.dim() != dim) throw std::invalid_argument("ns_backward: dimension mismatch");
  if (iterations < 0) throw std::invalid_argument("ns_backward: iterations must be non-negative");

  double s = frobenius_norm(a);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("ns_backward: input must have positive finite Frobenius norm");
  }

  // Forward with stored activations; its cost belongs to the forward pass.
  OpCounters fwd;
  std::vector<Mat> ys;
  std::vector<Mat> zs;
  std::vector<Mat> ws;
  ys.reserve(static_cast<size_t>(iterations) + 1);
  zs.reserve(static_cast<size_t>(iterations) + 1);
  ws.reserve(static_cast<size_t>(iterations));
  ys.push_back((1.0 / s) * a.mat());
  zs.push_back(Mat::identity(dim));
  double last_coupling = 0.0;
  for (int t = 0; t < iterations; ++t) {
    Mat w = matmul(zs.back(), ys.back(), &fwd);
    last_coupling = identity_residual(w);
    for (int i = 0; i < dim * dim; ++i) w.data()[i] = -w.data()[i];
    for (int i = 0; i < dim; ++i) w.at(i, i) += 3.0;
    ys.push_back(0.5 * matmul(ys.back(), w, &fwd));
    zs.push_back(0.5 * matmul(w, zs.back(), &fwd));
    check_iterate(ys.back(), 1.0, "ns_backward");
    ws.push_back(std::move(w));
  }

  // Reverse sweep: 6 matmuls per iteration.
  OpCounters counters;
  double r = std::sqrt(s);
  Mat ybar = r * upstream;
  Mat zbar(dim);
  double sbar = inner(upstream, ys.back()) / (2.0 * r);

  for (int t = iterations - 1; t >= 0; --t) {
    const Mat& y = ys[static_cast<size_t>(t)];
    const Mat& z = zs[static_cast<size_t>(t)];
    const Mat& w = ws[static_cast<size_t>(t)];
    Mat wt = transpose(w);

    Mat wbar = 0.5 * matmul(transpose(y), ybar, &counters);
    Mat zw = matmul(zbar, transpose(z), &counters);
    for (int i = 0; i < dim * dim; ++i) wbar.data()[i] += 0.5 * zw.data()[i];

    Mat ynext = 0.5 * matmul(ybar, wt, &counters);
    Mat znext = 0.5 * matmul(wt, zbar, &counters);

    // W = 3I - ZY, so the product's adjoint is -wbar.
    Mat tbar(dim);
    for (int i = 0; i < dim * dim; ++i) tbar.data()[i] = -wbar.data()[i];
    Mat zterm = matmul(tbar, transpose(y), &counters);
    Mat yterm = matmul(transpose(z), tbar, &counters);

    for (int i = 0; i < dim * dim; ++i) {
      ybar.data()[i] = ynext.data()[i] + yterm.data()[i];
      zbar.data()[i] = znext.data()[i] + zterm.data()[i];
    }
  }

  // Y0 = a/s and s = ||a||_F close the chain without matmuls.
  Mat grad(dim);
  sbar -= inner(ybar, a.mat()) / (s * s);
  for (int i = 0; i < dim * dim; ++i) {
    grad.data()[i] = ybar.data()[i] / s + sbar * a.mat().data()[i] / s;
  }
  return GradResult{std::move(grad), last_coupling, counters};
}

SignResult sign_iteration(const Mat& h, int max_iters, double tol, OpCounters* counters) {
  if (max_iters < 0) throw std::invalid_argument("sign_iteration: max_iters must be non-negative");
  Mat s = h;
  const int dim = h.dim();
  const double start = std::max(frobenius_norm(h), 1.0);
  int steps = 0;
  Mat s2 = matmul(s, s, counters);
  double residual = identity_residual(s2);
  while (residual >= tol && steps < max_iters) {
    Mat ss2 = matmul(s, s2, counters);
    for (int i = 0; i < dim * dim; ++i) {
      s.data()[i] = 1.5 * s.data()[i] - 0.5 * ss2.data()[i];
    }
    check_iterate(s, start, "sign_iteration");
    ++steps;
    s2 = matmul(s, s, counters);
    residual = identity_residual(s2);
  }
  return SignResult{std::move(s), residual, steps};
}

}  // namespace matroot
