#pragma once

#include <optional>

#include "matroot/coeffs.hpp"
#include "matroot/matcore.hpp"

namespace matroot {

struct ErrorReport {
  double mae = 0.0;
  double nrmse = 0.0;
  // Sqrt: ||approx^2 - A||_F / ||A||_F. InvSqrt: ||approx A approx - I||_F.
  double defining_residual = 0.0;
  std::optional<double> whitening_error = {};  // InvSqrt only
};

double mae(const Mat& approx, const Mat& exact);

// RMSE(approx, exact) / RMS(exact); errors on an all-zero exact matrix.
double nrmse(const Mat& approx, const Mat& exact);

// ||isqrt_approx * a * isqrt_approx - I||_F: distance of the whitened
// covariance from the identity.
double whitening_error(const SymMatrix& a, const SymMatrix& isqrt_approx);

// Central differences of l(A) = <upstream, spectral(A, target)> with
// symmetric perturbations: diagonal entries move by h, off-diagonal pairs
// (i,j),(j,i) by h/2 each, both quotients divided by 2h. h <= 0 selects the
// default 1e-5 * ||a||_F / dim. If a perturbed matrix loses positive
// definiteness the step shrinks once by 10; a second loss is an error.
Mat finite_diff_grad(Target target, const SymMatrix& a, const Mat& upstream, double h = 0.0);

// Bundles the metrics of one approximation against the exact value.
ErrorReport make_error_report(const SymMatrix& a, const SymMatrix& approx, const Mat& exact,
                              Target target);

}  // namespace matroot
