#include "matroot/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace matroot {

namespace {

double checked_norm(const Mat& a, const char* who) {
  double s = frobenius_norm(a);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument(std::string(who) + ": input must have positive finite Frobenius norm");
  }
  return s;
}

Mat normalized_residual(const Mat& a, double s) {
  Mat z = Mat::identity(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    for (int j = 0; j < a.dim(); ++j) {
      z.at(i, j) -= a.at(i, j) / s;
    }
  }
  return z;
}

// I + sign * sum_k coeffs[k-1] * z^k by Horner in the matrix variable z.
// Exactly coeffs.size()-1 matmuls: the innermost degree-1 term is formed by
// scalar updates, every outer step and the final scale-up multiply by z once.
Mat poly_core(const Mat& z, const std::vector<double>& coeffs, int sign, OpCounters* counters) {
  const int dim = z.dim();
  const int k = static_cast<int>(coeffs.size());
  Mat result = Mat::identity(dim);
  if (k == 0) return result;

  Mat series(dim);
  if (k == 1) {
    series = coeffs[0] * z;
  } else {
    Mat acc = coeffs[k - 1] * z;
    for (int i = 0; i < dim; ++i) acc.at(i, i) += coeffs[k - 2];
    for (int j = k - 3; j >= 0; --j) {
      acc = matmul(z, acc, counters);
      for (int i = 0; i < dim; ++i) acc.at(i, i) += coeffs[j];
    }
    series = matmul(z, acc, counters);
  }

  double sg = sign < 0 ? -1.0 : 1.0;
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      result.at(i, j) += sg * series.at(i, j);
    }
  }
  return result;
}

void check_iterate(const Mat& y, double start_norm, const char* who) {
  double n = frobenius_norm(y);
  if (!std::isfinite(n) || n > 1e6 * start_norm) {
    throw std::runtime_error(std::string(who) + ": iteration diverged");
  }
}

void require_odd_degree(int k, int min_k, const char* who) {
  if (k < min_k || k % 2 == 0) {
    throw std::invalid_argument(std::string(who) + ": degree_k must be odd and at least " +
                                std::to_string(min_k));
  }
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::MTP: return "mtp";
    case Method::MPA: return "mpa";
    case Method::NSCoupled: return "ns";
    case Method::NSOneVar: return "ns_onevar";
    case Method::Spectral: return "spectral";
  }
  throw std::invalid_argument("method_name: unknown method");
}

SymMatrix poly_eval_normalized(const SymMatrix& a, const std::vector<double>& coeffs,
                               int sign, OpCounters* counters) {
  double s = checked_norm(a, "poly_eval_normalized");
  Mat z = normalized_residual(a, s);
  return SymMatrix::symmetrized(poly_core(z, coeffs, sign, counters));
}

ForwardResult mtp(const SymMatrix& a, const ForwardConfig& cfg) {
  require_odd_degree(cfg.degree_k, 1, "mtp");
  OpCounters counters;
  double s = checked_norm(a, "mtp");
  Mat z = normalized_residual(a, s);
  const TaylorTable table = taylor_table(cfg.target, cfg.degree_k);
  int sign = cfg.target == Target::Sqrt ? -1 : +1;
  double scale = cfg.target == Target::Sqrt ? std::sqrt(s) : 1.0 / std::sqrt(s);
  Mat value = scale * poly_core(z, table.c, sign, &counters);
  return ForwardResult{SymMatrix::symmetrized(std::move(value)), counters, s};
}

ForwardResult mpa(const SymMatrix& a, const ForwardConfig& cfg) {
  require_odd_degree(cfg.degree_k, 3, "mpa");
  OpCounters counters;
  const int dim = a.mat().dim();
  const int m = (cfg.degree_k - 1) / 2;
  double s = checked_norm(a, "mpa");
  Mat z = normalized_residual(a, s);

  // Both targets share the square-root table: the inverse square root is the
  // same rational function with numerator and denominator exchanged.
  const PadeTable& table = pade_table(Target::Sqrt, m, m);

  std::vector<Mat> zpow;
  zpow.reserve(static_cast<size_t>(m));
  zpow.push_back(z);
  for (int j = 1; j < m; ++j) {
    zpow.push_back(matmul(z, zpow.back(), &counters));
  }

  Mat num = Mat::identity(dim);
  Mat den = Mat::identity(dim);
  for (int j = 0; j < m; ++j) {
    const Mat& zj = zpow[static_cast<size_t>(j)];
    for (int i = 0; i < dim * dim; ++i) {
      num.data()[i] -= table.p[static_cast<size_t>(j)] * zj.data()[i];
      den.data()[i] -= table.q[static_cast<size_t>(j)] * zj.data()[i];
    }
  }

  // Apply the denominator as inverse-times-numerator: one solve against the
  // identity, one closing matmul, keeping the matmul count at (K-1)/2.
  const Mat& solve_poly = cfg.target == Target::Sqrt ? den : num;
  const Mat& other_poly = cfg.target == Target::Sqrt ? num : den;
  double scale = cfg.target == Target::Sqrt ? std::sqrt(s) : 1.0 / std::sqrt(s);
  Mat inv = solve_spd(SymMatrix::symmetrized(solve_poly), Mat::identity(dim), &counters);
  Mat value = scale * matmul(inv, other_poly, &counters);
  return ForwardResult{SymMatrix::symmetrized(std::move(value)), counters, s};
}

std::pair<ForwardResult, ForwardResult> ns_coupled(const SymMatrix& a, const ForwardConfig& cfg) {
  if (cfg.iterations < 0) throw std::invalid_argument("ns_coupled: iterations must be non-negative");
  OpCounters counters;
  const int dim = a.mat().dim();
  double s = checked_norm(a, "ns_coupled");
  Mat y = (1.0 / s) * a.mat();
  Mat zc = Mat::identity(dim);
  const double y_start = frobenius_norm(y);
  const double z_start = frobenius_norm(zc);

  for (int it = 0; it < cfg.iterations; ++it) {
    Mat w = matmul(zc, y, &counters);
    for (int i = 0; i < dim * dim; ++i) w.data()[i] = -w.data()[i];
    for (int i = 0; i < dim; ++i) w.at(i, i) += 3.0;
    y = 0.5 * matmul(y, w, &counters);
    zc = 0.5 * matmul(w, zc, &counters);
    check_iterate(y, y_start, "ns_coupled");
    check_iterate(zc, z_start, "ns_coupled");
  }

  double r = std::sqrt(s);
  ForwardResult sqrt_res{SymMatrix::symmetrized(r * y), counters, s};
  ForwardResult isqrt_res{SymMatrix::symmetrized((1.0 / r) * zc), counters, s};
  return {std::move(sqrt_res), std::move(isqrt_res)};
}

ForwardResult ns_onevar(const SymMatrix& a, const ForwardConfig& cfg) {
  if (cfg.target != Target::InvSqrt) {
    throw std::invalid_argument("ns_onevar: computes the inverse square root only");
  }
  if (cfg.iterations < 0) throw std::invalid_argument("ns_onevar: iterations must be non-negative");
  OpCounters counters;
  const int dim = a.mat().dim();
  double s = checked_norm(a, "ns_onevar");
  Mat an = (1.0 / s) * a.mat();
  Mat zc = Mat::identity(dim);
  const double z_start = frobenius_norm(zc);

  for (int it = 0; it < cfg.iterations; ++it) {
    Mat z2 = matmul(zc, zc, &counters);
    Mat z3 = matmul(z2, zc, &counters);
    Mat z3a = matmul(z3, an, &counters);
    for (int i = 0; i < dim * dim; ++i) {
      zc.data()[i] = 1.5 * zc.data()[i] - 0.5 * z3a.data()[i];
    }
    check_iterate(zc, z_start, "ns_onevar");
  }

  Mat value = (1.0 / std::sqrt(s)) * zc;
  return ForwardResult{SymMatrix::symmetrized(std::move(value)), counters, s};
}

ForwardResult spectral(const SymMatrix& a, Target target) {
  OpCounters counters;
  const int dim = a.mat().dim();
  SpectralDecomp d = sym_eig(a, &counters);
  Mat scaled = d.eigenvectors;
  for (int j = 0; j < dim; ++j) {
    double lam = d.eigenvalues[static_cast<size_t>(j)];
    double f;
    if (target == Target::Sqrt) {
      f = std::sqrt(lam);
    } else {
      if (!(lam > 0.0)) {
        throw std::runtime_error("spectral: non-positive eigenvalue under InvSqrt");
      }
      f = 1.0 / std::sqrt(lam);
    }
    for (int i = 0; i < dim; ++i) scaled.at(i, j) *= f;
  }
  Mat value = matmul(scaled, transpose(d.eigenvectors), &counters);
  return ForwardResult{SymMatrix::symmetrized(std::move(value)), counters, 0.0};
}

ForwardResult run_forward(const SymMatrix& a, const ForwardConfig& cfg) {
  switch (cfg.method) {
    case Method::MTP: return mtp(a, cfg);
    case Method::MPA: return mpa(a, cfg);
    case Method::NSCoupled: {
      auto both = ns_coupled(a, cfg);
      return cfg.target == Target::Sqrt ? std::move(both.first) : std::move(both.second);
    }
    case Method::NSOneVar: return ns_onevar(a, cfg);
    case Method::Spectral: return spectral(a, cfg.target);
  }
  throw std::invalid_argument("run_forward: unknown method");
}

}  // namespace matroot
