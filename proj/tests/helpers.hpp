#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "matroot/backward.hpp"
#include "matroot/bench.hpp"
#include "matroot/diffcheck.hpp"
#include "matroot/forward.hpp"
#include "matroot/matcore.hpp"

namespace testutil {

using namespace matroot;

// Reference j-inner-loop product, deliberately different from the library's
// loop order.
inline Mat naive_matmul(const Mat& a, const Mat& b) {
  const int n = a.dim();
  Mat c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += a.at(i, k) * b.at(k, j);
      c.at(i, j) = acc;
    }
  }
  return c;
}

// Power-accumulation evaluation of I + sign * sum c[k-1] Z^k, the non-Horner
// reference for poly_eval_normalized.
inline Mat naive_poly(const SymMatrix& a, const std::vector<double>& coeffs, int sign) {
  const int n = a.mat().dim();
  double s = frobenius_norm(a);
  Mat z = Mat::identity(n);
  z -= (1.0 / s) * a.mat();
  Mat acc = Mat::identity(n);
  Mat power = Mat::identity(n);
  for (double c : coeffs) {
    power = naive_matmul(power, z);
    for (int i = 0; i < n * n; ++i) acc.data()[i] += sign * c * power.data()[i];
  }
  return acc;
}

inline Mat dense_normal(int dim, std::uint64_t seed, int item) {
  CounterRng rng{seed};
  const std::uint64_t base = (3ULL << 60) + (static_cast<std::uint64_t>(item) << 32);
  Mat m(dim);
  for (int i = 0; i < dim * dim; ++i) m.data()[i] = rng.normal(base + static_cast<std::uint64_t>(i));
  return m;
}

inline double rel_err(const Mat& approx, const Mat& exact) {
  Mat d = approx;
  d -= exact;
  return frobenius_norm(d) / frobenius_norm(exact);
}

inline double asymmetry(const Mat& m) {
  double worst = 0.0;
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = i + 1; j < m.dim(); ++j) {
      worst = std::max(worst, std::fabs(m.at(i, j) - m.at(j, i)));
    }
  }
  return worst;
}

inline double inner(const Mat& x, const Mat& y) {
  double acc = 0.0;
  for (int i = 0; i < x.dim() * x.dim(); ++i) acc += x.data()[i] * y.data()[i];
  return acc;
}

// Central differences of <upstream, ns_coupled(A).sqrt> with the same
// symmetric perturbation scheme as finite_diff_grad; reference for
// ns_backward, whose gradient is of the approximation rather than of the
// exact function.
inline Mat fd_ns_grad(const SymMatrix& a, const Mat& upstream, int iterations, double h) {
  const int dim = a.mat().dim();
  ForwardConfig fc{Method::NSCoupled, Target::Sqrt, 11, iterations};
  auto loss = [&](const Mat& m) {
    auto both = ns_coupled(SymMatrix::symmetrized(m), fc);
    return inner(upstream, both.first.value.mat());
  };
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
      double d = (loss(plus) - loss(minus)) / (2.0 * h);
      grad.at(i, j) = d;
      grad.at(j, i) = d;
    }
  }
  return grad;
}

}  // namespace testutil
