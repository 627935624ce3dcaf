#pragma once

#include <utility>
#include <vector>

#include "matroot/coeffs.hpp"
#include "matroot/matcore.hpp"

namespace matroot {

enum class Method { MTP, MPA, NSCoupled, NSOneVar, Spectral };

const char* method_name(Method m);

struct ForwardConfig {
  Method method = Method::MPA;
  Target target = Target::Sqrt;
  int degree_k = 11;   // MTP/MPA series degree; MPA uses M = N = (K-1)/2, K odd
  int iterations = 5;  // NS methods
};

struct ForwardResult {
  SymMatrix value;
  OpCounters counters;
  double pre_norm = 0.0;  // the ||A||_F used for pre-normalization, 0 when none
};

// I + sign * sum_k coeffs[k-1] * Z^k with Z = I - a/||a||_F, evaluated by
// Horner in Z; performs exactly len(coeffs)-1 matmuls.
SymMatrix poly_eval_normalized(const SymMatrix& a, const std::vector<double>& coeffs,
                               int sign, OpCounters* counters = nullptr);

// Truncated binomial series, pre-normalized and post-compensated.
ForwardResult mtp(const SymMatrix& a, const ForwardConfig& cfg);

// Diagonal Pade approximant; denominator applied through one linear solve.
ForwardResult mpa(const SymMatrix& a, const ForwardConfig& cfg);

// Coupled Newton-Schulz iteration; returns {sqrt, isqrt}. Both results carry
// the counters of the single coupled run (3 matmuls per iteration).
std::pair<ForwardResult, ForwardResult> ns_coupled(const SymMatrix& a, const ForwardConfig& cfg);

// One-variable Newton-Schulz recurrence for the inverse square root only.
ForwardResult ns_onevar(const SymMatrix& a, const ForwardConfig& cfg);

// Exact eigendecomposition oracle U diag(lambda^{+-1/2}) Ut.
ForwardResult spectral(const SymMatrix& a, Target target);

// Dispatch on cfg.method (NSCoupled picks the requested target's half).
ForwardResult run_forward(const SymMatrix& a, const ForwardConfig& cfg);

}  // namespace matroot
