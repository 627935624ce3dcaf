#include "matroot/coeffs.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

namespace matroot {

const char* target_name(Target t) { return t == Target::Sqrt ? "sqrt" : "isqrt"; }

namespace {

// Signed scalar series of (1-z)^{+-1/2} in long double: a[0] = 1,
// a[k] = -|binom(1/2,k)| (Sqrt) or +|binom(-1/2,k)| (InvSqrt).
std::vector<long double> signed_series(Target target, int degree) {
  const long double h = target == Target::Sqrt ? 0.5L : -0.5L;
  std::vector<long double> a(degree + 1);
  a[0] = 1.0L;
  long double v = 1.0L;
  for (int k = 1; k <= degree; ++k) {
    v = v * (h - (k - 1)) / k;
    a[k] = target == Target::Sqrt ? -std::abs(v) : std::abs(v);
  }
  return a;
}

// Partial-pivot LU solve of the small dense system in long double; the
// extended precision makes the dyadic-rational coefficients of these tables
// round-trip exactly through the f64 results.
std::vector<long double> lu_solve_ld(std::vector<std::vector<long double>> m,
                                     std::vector<long double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    if (m[piv][k] == 0.0L)
      throw std::runtime_error("pade_table: singular coefficient system");
    std::swap(m[k], m[piv]);
    std::swap(b[k], b[piv]);
    for (int i = k + 1; i < n; ++i) {
      const long double f = m[i][k] / m[k][k];
      for (int j = k; j < n; ++j) m[i][j] -= f * m[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<long double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    long double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= m[i][j] * x[j];
    x[i] = s / m[i][i];
  }
  return x;
}

PadeTable compute_pade(Target target, int m_deg, int n_deg) {
  const std::vector<long double> a = signed_series(target, m_deg + n_deg);

  // Denominator unknowns v from the Toeplitz rows for degrees M+1..M+N:
  // sum_j v_j a_{k-j} = -a_k.
  std::vector<std::vector<long double>> sys(n_deg, std::vector<long double>(n_deg, 0.0L));
  std::vector<long double> rhs(n_deg);
  for (int row = 0; row < n_deg; ++row) {
    const int k = m_deg + 1 + row;
    rhs[row] = -a[k];
    for (int j = 1; j <= n_deg; ++j)
      if (k - j >= 0) sys[row][j - 1] = a[k - j];
  }
  const std::vector<long double> v = lu_solve_ld(std::move(sys), std::move(rhs));

  // Numerator by forward substitution: u_m = a_m + sum_j v_j a_{m-j}.
  std::vector<long double> u(m_deg);
  for (int m = 1; m <= m_deg; ++m) {
    long double s = a[m];
    for (int j = 1; j <= std::min(m, n_deg); ++j) s += v[j - 1] * a[m - j];
    u[m - 1] = s;
  }

  // Store p/q so that numerator = 1 + sign*sum p z^m with sign = -1 (Sqrt)
  // or +1 (InvSqrt); this makes the stored values the conventional
  // p_m/q_n and r_m/s_n names.
  const long double sign = target == Target::Sqrt ? -1.0L : 1.0L;
  PadeTable t{target, m_deg, n_deg, {}, {}};
  t.p.reserve(m_deg);
  t.q.reserve(n_deg);
  for (int m = 0; m < m_deg; ++m) t.p.push_back(static_cast<double>(sign * u[m]));
  for (int n = 0; n < n_deg; ++n) t.q.push_back(static_cast<double>(sign * v[n]));
  return t;
}

double poly_sign(Target t) { return t == Target::Sqrt ? -1.0 : 1.0; }

}  // namespace

double binom_abs(Target target, int k) {
  if (k < 1)
    throw std::invalid_argument("binom_abs: k must be >= 1 (callers handle the constant term)");
  const long double h = target == Target::Sqrt ? 0.5L : -0.5L;
  long double v = 1.0L;
  for (int j = 1; j <= k; ++j) v = v * (h - (j - 1)) / j;
  return static_cast<double>(std::abs(v));
}

TaylorTable taylor_table(Target target, int degree_k) {
  if (degree_k < 1) throw std::invalid_argument("taylor_table: degree must be >= 1");
  TaylorTable t{target, degree_k, {}};
  t.c.reserve(degree_k);
  const long double h = target == Target::Sqrt ? 0.5L : -0.5L;
  long double v = 1.0L;
  for (int k = 1; k <= degree_k; ++k) {
    v = v * (h - (k - 1)) / k;
    t.c.push_back(static_cast<double>(std::abs(v)));
  }
  return t;
}

const PadeTable& pade_table(Target target, int degree_m, int degree_n) {
  if (degree_m < 1 || degree_n < 1)
    throw std::invalid_argument("pade_table: degrees must be >= 1");
  static std::map<std::tuple<int, int, int>, PadeTable> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(static_cast<int>(target), degree_m, degree_n);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, compute_pade(target, degree_m, degree_n)).first;
  return it->second;
}

double pade_eval_scalar(const PadeTable& table, double z) {
  const double sign = poly_sign(table.target);
  double num = 0.0, den = 0.0;
  for (int m = table.degree_m - 1; m >= 0; --m) num = (num + table.p[m]) * z;
  for (int n = table.degree_n - 1; n >= 0; --n) den = (den + table.q[n]) * z;
  return (1.0 + sign * num) / (1.0 + sign * den);
}

double pade_crossmult_residual(const PadeTable& table) {
  const int total = table.degree_m + table.degree_n;
  const std::vector<long double> a = signed_series(table.target, total);
  const double sign = poly_sign(table.target);
  double worst = 0.0;
  for (int k = 1; k <= total; ++k) {
    // Coefficient of z^k in denominator * series, against the numerator.
    double conv = static_cast<double>(a[k]);
    for (int j = 1; j <= std::min(k, table.degree_n); ++j)
      conv += sign * table.q[j - 1] * static_cast<double>(a[k - j]);
    const double num_k = k <= table.degree_m ? sign * table.p[k - 1] : 0.0;
    worst = std::max(worst, std::abs(num_k - conv));
  }
  return worst;
}

std::pair<double, double> denominator_poly_min(const PadeTable& table, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("denominator_poly_min: need >= 2 grid points");
  const double sign = poly_sign(table.target);
  double best = 0.0, arg = 0.0;
  for (int g = 0; g < grid_points; ++g) {
    const double x = static_cast<double>(g) / (grid_points - 1);
    double den = 0.0;
    for (int n = table.degree_n - 1; n >= 0; --n) den = (den + table.q[n]) * x;
    const double val = 1.0 + sign * den;
    if (g == 0 || val < best) {
      best = val;
      arg = x;
    }
  }
  return {best, arg};
}

}  // namespace matroot
