#pragma once

#include <optional>

#include "matroot/coeffs.hpp"
#include "matroot/matcore.hpp"

namespace matroot {

struct BackwardConfig {
  int iterations = 8;                      // fixed step count T
  std::optional<double> tolerance = {};    // early stop on ||B_k - I||_F when set
};

struct GradRequest {
  Target target;
  SymMatrix a;              // original input, needed for the InvSqrt initialization
  SymMatrix forward_value;  // A^{1/2} or A^{-1/2}
  Mat upstream;             // loss gradient w.r.t. the forward value
  BackwardConfig config;
};

struct GradResult {
  Mat grad;            // loss gradient w.r.t. a
  double residual_b;   // ||B_T - I||_F of the solver iteration
  OpCounters counters;
};

// Coupled Newton-Schulz solver for the gradient Lyapunov equation.
// Sqrt: B0 = forward_value, C0 = upstream. InvSqrt: B0 = forward_value,
// C0 = -(B0^2) upstream (B0^2), formed with 3 matmuls. Both are divided by
// sqrt(||B0^2||_F) (computed as sqrt(||a||_F) for Sqrt, where B0^2 = a),
// which the solution is invariant to and which keeps the slowest normalized
// eigenvalue bounded away from zero as the dimension grows. Returns
// grad = C_T / 2 after T coupled steps costing 6 matmuls each.
GradResult lyapunov_grad(const GradRequest& req);

// Exact Lyapunov solve b X + X b = c through the eigendecomposition of b.
Mat bartels_stewart(const SymMatrix& b, const Mat& c, OpCounters* counters = nullptr);

// Closed-form Lyapunov solve via the Kronecker-sum linear system; tiny
// dimensions only (the system is dim^2 x dim^2).
Mat kron_solve(const SymMatrix& b, const Mat& c, OpCounters* counters = nullptr);

// Reverse-mode gradient of the coupled Newton-Schulz square root
// sqrt(||a||_F) * Y_T with respect to a, propagated through the stored
// iterates including the normalization and compensation scalars. Counters
// report the reverse sweep only (6 matmuls per iteration); the stored
// forward recomputation is accounted to the forward pass.
GradResult ns_backward(const SymMatrix& a, const Mat& upstream, int iterations);

struct SignResult {
  Mat s;            // the converged sign iterate
  double residual;  // ||S^2 - I||_F at the returned iterate
  int iterations;   // steps actually taken
};

// Plain Newton-Schulz sign iteration H <- H(3I - H^2)/2, stopping when
// ||H^2 - I||_F < tol or after max_iters steps.
SignResult sign_iteration(const Mat& h, int max_iters, double tol, OpCounters* counters = nullptr);

}  // namespace matroot
