#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "matroot/backward.hpp"
#include "matroot/diffcheck.hpp"
#include "matroot/forward.hpp"

namespace matroot {

struct SweepConfig {
  int suite_size = 100;
  int dim = 64;
  int batch = 64;  // upper bound on the batch-size ladder {1,4,16,64}
  std::uint64_t seed = 0;
  int repetitions = 5;
  std::vector<std::string> methods;  // empty: each sweep's full default set
  std::vector<Target> targets;       // empty: both targets
  double epsilon = 1e-5;             // whitening-demo ridge
  std::vector<int> degrees = {7, 9, 11, 13, 15, 17};
  std::vector<int> ns_iterations = {3, 4, 5, 6, 7};
  std::vector<int> lyapunov_iterations = {5, 6, 7, 8, 9, 10};
};

struct BenchRecord {
  std::string sweep;
  std::string method;
  std::string target;
  double param = 0.0;
  double time_ns_mean = 0.0;
  double mae = 0.0;
  double nrmse = 0.0;
  double defining_residual = 0.0;
  long matmul_count = 0;
  long solve_count = 0;
};

// Runs fn(0..count-1) across worker threads capped by MATROOT_THREADS
// (0 or unset: hardware concurrency). Items are index-partitioned, so any
// output written to per-index slots is deterministic.
void parallel_for_items(int count, const std::function<void(int)>& fn);

// Sample-covariance suite: A = X Xt / cols + epsilon*(tr/dim)*I with X a
// dim x (aspect*dim) standard-normal matrix. aspect 4 keeps the condition
// number moderate, which the error and residual tolerances assume.
MatrixBatch covariance_suite(int dim, int count, std::uint64_t seed, int aspect = 4,
                             double epsilon = 1e-5);

// Whitening-demo suite: row-centered data X of shape dim x (8*dim),
// A = (X-mu)(X-mu)t + epsilon*I.
MatrixBatch whitening_suite(int dim, int count, std::uint64_t seed, double epsilon);

// Deterministic symmetric matrix with standard-normal entries, one per
// (seed, item) pair; used as the upstream gradient in backward suites.
Mat symmetric_upstream(int dim, std::uint64_t seed, int item);

// Forward accuracy/speed ladder: MTP and MPA over cfg.degrees, coupled NS
// over cfg.ns_iterations, errors against the spectral oracle.
std::vector<BenchRecord> run_fp_sweep(const SweepConfig& cfg);

// Backward ladder: Lyapunov solver over cfg.lyapunov_iterations for both
// targets plus ns_backward over cfg.ns_iterations; nrmse carries the
// relative gradient error against the exact solver and defining_residual
// carries residual_b.
std::vector<BenchRecord> run_bp_sweep(const SweepConfig& cfg);

// Wall-clock of full forward+backward over batches {1,4,16,64} (capped by
// cfg.batch) at fixed dim; error columns describe item 0 and are therefore
// identical across batch sizes.
std::vector<BenchRecord> run_batch_sweep(const SweepConfig& cfg);

// Error scaling over dims {4,8,16,32,64,128} at default degree/iterations.
std::vector<BenchRecord> run_dim_sweep(const SweepConfig& cfg);

// ZCA whitening demo: inverse square root of data covariances by each
// method; defining_residual carries the mean whitening error.
std::vector<BenchRecord> run_whiten_demo(const SweepConfig& cfg);

// CSV with the fixed header; rows are sorted by (method, param, target) and
// all floats use shortest round-trip formatting, so output is byte-stable
// for a fixed seed apart from the timing column.
std::string to_csv(const std::vector<BenchRecord>& records);

// Coefficient dump with header target,M,N,kind,index,value.
std::string coeffs_csv(Target target, int m, int n);

}  // namespace matroot
