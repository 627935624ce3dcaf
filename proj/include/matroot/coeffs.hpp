#pragma once

#include <utility>
#include <vector>

namespace matroot {

enum class Target { Sqrt, InvSqrt };

const char* target_name(Target t);

// c[k-1] = |binom(+-1/2, k)| for k = 1..K; the scalar series of (1-z)^{+-1/2}
// is 1 -+ sum c_k z^k (minus signs for Sqrt, plus for InvSqrt).
struct TaylorTable {
  Target target;
  int degree_k;
  std::vector<double> c;
};

// Diagonal rational approximant of (1-z)^{+-1/2}. With s = -1 for Sqrt and
// s = +1 for InvSqrt, numerator = 1 + s*sum p[m-1] z^m and denominator =
// 1 + s*sum q[n-1] z^n; p/q store the conventional p_m/q_n (Sqrt) or
// r_m/s_n (InvSqrt) coefficient names.
struct PadeTable {
  Target target;
  int degree_m;
  int degree_n;
  std::vector<double> p;
  std::vector<double> q;
};

// |(+-1/2)(+-1/2 - 1)...(+-1/2 - k + 1) / k!| via running product; k >= 1.
double binom_abs(Target target, int k);

TaylorTable taylor_table(Target target, int degree_k);

// Coefficients matching the target's Taylor series through degree M+N,
// from the Toeplitz system in the denominator unknowns followed by forward
// substitution for the numerator. Cached per (target, M, N).
const PadeTable& pade_table(Target target, int degree_m, int degree_n);

// Scalar evaluation of the table's rational function at z.
double pade_eval_scalar(const PadeTable& table, double z);

// Max residual over degrees 1..M+N of numerator - denominator * series,
// the binding correctness check for a table.
double pade_crossmult_residual(const PadeTable& table);

// Minimum of the scalar denominator polynomial over a uniform grid on [0,1]
// (endpoints included); returns {min_value, argmin}.
std::pair<double, double> denominator_poly_min(const PadeTable& table, int grid_points);

}  // namespace matroot
