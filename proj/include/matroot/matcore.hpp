#pragma once

#include <cstdint>
#include <vector>

namespace matroot {

// Tallies of the primitive operations a call performed. Monotonically
// non-decreasing within one call scope; merged by summation for batches.
struct OpCounters {
  long matmul = 0;
  long solve = 0;
  long inverse = 0;
  long eig = 0;

  void merge(const OpCounters& other) {
    matmul += other.matmul;
    solve += other.solve;
    inverse += other.inverse;
    eig += other.eig;
  }
};

// Dense square matrix, row-major f64.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int dim) : dim_(dim), d_(static_cast<std::size_t>(dim) * dim, 0.0) {}

  static Mat identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
  }

  int dim() const { return dim_; }
  double& at(int i, int j) { return d_[static_cast<std::size_t>(i) * dim_ + j]; }
  double at(int i, int j) const { return d_[static_cast<std::size_t>(i) * dim_ + j]; }
  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double s);

 private:
  int dim_ = 0;
  std::vector<double> d_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);

Mat transpose(const Mat& a);
double max_abs(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);

// Symmetric matrix: wraps Mat, asymmetry at most 1e-12 relative to the
// largest entry. Construction from a drifted Mat goes through symmetrized().
class SymMatrix {
 public:
  explicit SymMatrix(Mat m);

  // (M + Mt)/2, the documented re-symmetrization applied to final outputs.
  static SymMatrix symmetrized(Mat m);

  int dim() const { return m_.dim(); }
  double at(int i, int j) const { return m_.at(i, j); }
  const Mat& mat() const { return m_; }
  operator const Mat&() const { return m_; }

 private:
  explicit SymMatrix(Mat m, bool /*trusted*/) : m_(std::move(m)) {}
  Mat m_;
};

struct MatrixBatch {
  int dim = 0;
  std::vector<SymMatrix> items;  // all share dim; count = items.size()
};

MatrixBatch make_batch(std::vector<SymMatrix> items);

// Eigendecomposition A = U diag(eigenvalues) Ut, eigenvalues ascending,
// eigenvectors in columns of U.
struct SpectralDecomp {
  std::vector<double> eigenvalues;
  Mat eigenvectors;
};

struct RandomSpdConfig {
  int dim = 1;
  std::uint64_t seed = 0;
  double epsilon = 1e-5;  // diagonal regularizer, > 0
};

// Counter-based deterministic generator: value i of stream `key` is a pure
// function of (key, i), so batch parallelism cannot change the sample stream.
struct CounterRng {
  std::uint64_t key = 0;

  std::uint64_t bits(std::uint64_t counter) const;
  double uniform(std::uint64_t counter) const;  // (0, 1)
  double normal(std::uint64_t counter) const;   // standard normal, Box-Muller
};

Mat matmul(const Mat& a, const Mat& b, OpCounters* counters = nullptr);
double frobenius_norm(const Mat& a);

// Cholesky solve with LU partial-pivot fallback near the PD boundary.
// One call counts as one solve regardless of the number of RHS columns.
Mat solve_spd(const SymMatrix& a, const Mat& rhs, OpCounters* counters = nullptr);

SpectralDecomp sym_eig(const SymMatrix& a, OpCounters* counters = nullptr);

// Kronecker product, guarded to product dimension <= 64 (tiny-oracle use).
Mat kron(const Mat& a, const Mat& b);

// A = XXt/n + eps*tr(XXt/n)/dim * I with X dim-by-dim standard normal.
SymMatrix random_spd(const RandomSpdConfig& cfg);

}  // namespace matroot
