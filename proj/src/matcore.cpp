#include "matroot/matcore.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace matroot {

namespace {

void require_same_dim(const Mat& a, const Mat& b, const char* what) {
  if (a.dim() != b.dim())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Mat& Mat::operator+=(const Mat& o) {
  require_same_dim(*this, o, "Mat::operator+=");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  require_same_dim(*this, o, "Mat::operator-=");
  for (std::size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : d_) v *= s;
  return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat transpose(const Mat& a) {
  Mat t(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) t.at(j, i) = a.at(i, j);
  return t;
}

double max_abs(const Mat& a) {
  double m = 0.0;
  const double* p = a.data();
  const std::size_t n = static_cast<std::size_t>(a.dim()) * a.dim();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  require_same_dim(a, b, "max_abs_diff");
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
  return m;
}

SymMatrix::SymMatrix(Mat m) : m_(std::move(m)) {
  double asym = 0.0;
  for (int i = 0; i < m_.dim(); ++i)
    for (int j = i + 1; j < m_.dim(); ++j)
      asym = std::max(asym, std::abs(m_.at(i, j) - m_.at(j, i)));
  const double scale = std::max(1.0, max_abs(m_));
  if (!(asym <= 1e-12 * scale))
    throw std::invalid_argument("SymMatrix: input is not symmetric (max asymmetry " +
                                std::to_string(asym) + "); use SymMatrix::symmetrized");
}

SymMatrix SymMatrix::symmetrized(Mat m) {
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i + 1; j < m.dim(); ++j) {
      const double v = 0.5 * (m.at(i, j) + m.at(j, i));
      m.at(i, j) = v;
      m.at(j, i) = v;
    }
  return SymMatrix(std::move(m), true);
}

MatrixBatch make_batch(std::vector<SymMatrix> items) {
  if (items.empty()) throw std::invalid_argument("make_batch: count must be >= 1");
  const int dim = items.front().dim();
  for (const SymMatrix& m : items)
    if (m.dim() != dim) throw std::invalid_argument("make_batch: items must share dim");
  return MatrixBatch{dim, std::move(items)};
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(splitmix64(key) ^ (0x9e3779b97f4a7c15ULL * counter));
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Mat matmul(const Mat& a, const Mat& b, OpCounters* counters) {
  require_same_dim(a, b, "matmul");
  if (counters) ++counters->matmul;
  const int n = a.dim();
  Mat c(n);
  // i-k-j order keeps the inner loop contiguous in both b and c.
  for (int i = 0; i < n; ++i) {
    const double* arow = a.data() + static_cast<std::size_t>(i) * n;
    double* crow = c.data() + static_cast<std::size_t>(i) * n;
    for (int k = 0; k < n; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.data() + static_cast<std::size_t>(k) * n;
      for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

double frobenius_norm(const Mat& a) {
  double s = 0.0;
  const double* p = a.data();
  const std::size_t n = static_cast<std::size_t>(a.dim()) * a.dim();
  for (std::size_t i = 0; i < n; ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

namespace {

// Lower-triangular Cholesky factor in place; false on a non-positive pivot.
bool cholesky_factor(Mat& a) {
  const int n = a.dim();
  for (int j = 0; j < n; ++j) {
    double d = a.at(j, j);
    for (int k = 0; k < j; ++k) d -= a.at(j, k) * a.at(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a.at(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= a.at(i, k) * a.at(j, k);
      a.at(i, j) = s / ljj;
    }
  }
  return true;
}

Mat cholesky_solve(const Mat& l, const Mat& rhs) {
  const int n = l.dim();
  Mat x = rhs;
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < n; ++i) {  // L y = rhs
      double s = x.at(i, c);
      for (int k = 0; k < i; ++k) s -= l.at(i, k) * x.at(k, c);
      x.at(i, c) = s / l.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {  // Lt x = y
      double s = x.at(i, c);
      for (int k = i + 1; k < n; ++k) s -= l.at(k, i) * x.at(k, c);
      x.at(i, c) = s / l.at(i, i);
    }
  }
  return x;
}

Mat lu_solve(Mat a, Mat rhs) {
  const int n = a.dim();
  const double scale = max_abs(a);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a.at(i, k)) > std::abs(a.at(piv, k))) piv = i;
    if (std::abs(a.at(piv, k)) <= 1e-300 + 1e-15 * scale)
      throw std::runtime_error("solve_spd: matrix is singular to working precision");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a.at(k, j), a.at(piv, j));
      for (int j = 0; j < n; ++j) std::swap(rhs.at(k, j), rhs.at(piv, j));
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a.at(i, k) / a.at(k, k);
      a.at(i, k) = f;
      for (int j = k + 1; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
      for (int j = 0; j < n; ++j) rhs.at(i, j) -= f * rhs.at(k, j);
    }
  }
  for (int c = 0; c < n; ++c)
    for (int i = n - 1; i >= 0; --i) {
      double s = rhs.at(i, c);
      for (int k = i + 1; k < n; ++k) s -= a.at(i, k) * rhs.at(k, c);
      rhs.at(i, c) = s / a.at(i, i);
    }
  return rhs;
}

}  // namespace

Mat solve_spd(const SymMatrix& a, const Mat& rhs, OpCounters* counters) {
  require_same_dim(a.mat(), rhs, "solve_spd");
  if (counters) ++counters->solve;
  Mat l = a.mat();
  if (cholesky_factor(l)) return cholesky_solve(l, rhs);
  return lu_solve(a.mat(), rhs);
}

SpectralDecomp sym_eig(const SymMatrix& input, OpCounters* counters) {
  if (counters) ++counters->eig;
  const int n = input.dim();
  Mat a = input.mat();
  Mat v = Mat::identity(n);
  // Off-diagonal mass tolerance is relative to the input scale so the solver
  // serves unnormalized covariance matrices as well as unit-norm ones.
  const double tol = 1e-12 * std::max(frobenius_norm(a), 1e-300);
  const int max_sweeps = 100;

  const auto off_diag = [&a, n] {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += 2.0 * a.at(i, j) * a.at(i, j);
    return std::sqrt(off);
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_diag() <= tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_diag() > tol)
    throw std::runtime_error("sym_eig: no convergence after " + std::to_string(max_sweeps) +
                             " sweeps, off-diagonal residual " + std::to_string(off_diag()));

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = 1; i < n; ++i) {  // insertion sort by eigenvalue, ascending
    const int oi = order[i];
    int j = i - 1;
    while (j >= 0 && a.at(order[j], order[j]) > a.at(oi, oi)) {
      order[j + 1] = order[j];
      --j;
    }
    order[j + 1] = oi;
  }

  SpectralDecomp out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Mat(n);
  for (int c = 0; c < n; ++c) {
    out.eigenvalues[c] = a.at(order[c], order[c]);
    for (int r = 0; r < n; ++r) out.eigenvectors.at(r, c) = v.at(r, order[c]);
  }
  return out;
}

Mat kron(const Mat& a, const Mat& b) {
  const long prod = static_cast<long>(a.dim()) * b.dim();
  if (prod > 64)
    throw std::invalid_argument("kron: product dimension " + std::to_string(prod) +
                                " exceeds the 64x64 oracle guard");
  Mat out(static_cast<int>(prod));
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      const double aij = a.at(i, j);
      for (int k = 0; k < b.dim(); ++k)
        for (int l = 0; l < b.dim(); ++l)
          out.at(i * b.dim() + k, j * b.dim() + l) = aij * b.at(k, l);
    }
  return out;
}

SymMatrix random_spd(const RandomSpdConfig& cfg) {
  if (cfg.dim < 1) throw std::invalid_argument("random_spd: dim must be >= 1");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("random_spd: epsilon must be > 0");
  const int n = cfg.dim;
  const CounterRng rng{cfg.seed};
  Mat x(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      x.at(i, j) = rng.normal(static_cast<std::uint64_t>(i) * n + j);
  Mat a(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += x.at(i, k) * x.at(j, k);
      s /= n;
      a.at(i, j) = s;
      a.at(j, i) = s;
    }
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += a.at(i, i);
  const double shift = cfg.epsilon * tr / n;
  for (int i = 0; i < n; ++i) a.at(i, i) += shift;
  return SymMatrix::symmetrized(std::move(a));
}

}  // namespace matroot
