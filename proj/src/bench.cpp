#include "matroot/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <utility>

namespace matroot {

namespace {

// Counter-block salts keep the samplers' draws disjoint under a shared seed.
constexpr std::uint64_t kWhitenSalt = 1ULL << 60;
constexpr std::uint64_t kUpstreamSalt = 2ULL << 60;

int thread_budget() {
  int n = 0;
  if (const char* env = std::getenv("MATROOT_THREADS")) {
    n = std::atoi(env);
    if (n < 0) n = 0;
  }
  if (n == 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}

template <class Fn>
double median_time_ns(int repetitions, Fn&& run) {
  const int reps = std::max(repetitions, 5);
  std::vector<double> t;
  t.reserve(static_cast<size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    run();
    auto t1 = std::chrono::steady_clock::now();
    t.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  std::sort(t.begin(), t.end());
  return std::max(t[static_cast<size_t>(reps) / 2], 1.0);
}

void validate(const SweepConfig& cfg) {
  if (cfg.suite_size < 1) throw std::invalid_argument("suite_size must be at least 1");
  if (cfg.dim < 1) throw std::invalid_argument("dim must be at least 1");
  if (cfg.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (cfg.degrees.empty() || cfg.ns_iterations.empty() || cfg.lyapunov_iterations.empty()) {
    throw std::invalid_argument("sweep ranges must be non-empty");
  }
}

bool method_enabled(const SweepConfig& cfg, const std::string& name) {
  if (cfg.methods.empty()) return true;
  return std::find(cfg.methods.begin(), cfg.methods.end(), name) != cfg.methods.end();
}

std::vector<Target> targets_of(const SweepConfig& cfg) {
  if (cfg.targets.empty()) return {Target::Sqrt, Target::InvSqrt};
  return cfg.targets;
}

std::vector<Mat> oracle_values(const MatrixBatch& suite, Target target) {
  const int n = static_cast<int>(suite.items.size());
  std::vector<Mat> out(static_cast<size_t>(n));
  parallel_for_items(n, [&](int i) {
    out[static_cast<size_t>(i)] = spectral(suite.items[static_cast<size_t>(i)], target).value.mat();
  });
  return out;
}

// One forward row: suite-mean errors against the oracle, counters and
// representative timing from item 0.
template <class Fn>
BenchRecord forward_record(const char* sweep, const char* method, Target target, double param,
                           const MatrixBatch& suite, const std::vector<Mat>& oracle,
                           int repetitions, Fn&& run) {
  const int n = static_cast<int>(suite.items.size());
  std::vector<ErrorReport> reports(static_cast<size_t>(n));
  parallel_for_items(n, [&](int i) {
    ForwardResult r = run(i);
    reports[static_cast<size_t>(i)] =
        make_error_report(suite.items[static_cast<size_t>(i)], r.value,
                          oracle[static_cast<size_t>(i)], target);
  });

  BenchRecord rec;
  rec.sweep = sweep;
  rec.method = method;
  rec.target = target_name(target);
  rec.param = param;
  for (const ErrorReport& er : reports) {
    rec.mae += er.mae;
    rec.nrmse += er.nrmse;
    rec.defining_residual += er.defining_residual;
  }
  rec.mae /= n;
  rec.nrmse /= n;
  rec.defining_residual /= n;

  ForwardResult probe = run(0);
  rec.matmul_count = probe.counters.matmul;
  rec.solve_count = probe.counters.solve;
  rec.time_ns_mean = median_time_ns(repetitions, [&] { run(0); });
  return rec;
}

void sort_records(std::vector<BenchRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.method, a.param, a.target) < std::tie(b.method, b.param, b.target);
  });
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Exact gradient oracle for one suite item: the Lyapunov solve against the
// spectral forward value, with the InvSqrt right-hand side transformed the
// same way the iterative solver's initialization is.
Mat exact_grad(Target target, const Mat& forward_value, const Mat& upstream,
               OpCounters* counters = nullptr) {
  SymMatrix b = SymMatrix::symmetrized(forward_value);
  if (target == Target::Sqrt) return bartels_stewart(b, upstream, counters);
  Mat b2 = matmul(forward_value, forward_value, counters);
  Mat c0 = matmul(matmul(b2, upstream, counters), b2, counters);
  for (int i = 0; i < c0.dim() * c0.dim(); ++i) c0.data()[i] = -c0.data()[i];
  return bartels_stewart(b, c0, counters);
}

ForwardConfig default_forward_config(const std::string& method, Target target) {
  ForwardConfig fc;
  fc.target = target;
  if (method == "mtp") {
    fc.method = Method::MTP;
  } else if (method == "mpa") {
    fc.method = Method::MPA;
  } else if (method == "ns") {
    fc.method = Method::NSCoupled;
  } else {
    fc.method = Method::Spectral;
  }
  return fc;
}

double default_param(const std::string& method) {
  if (method == "mtp" || method == "mpa") return 11;
  if (method == "ns") return 5;
  return 0;
}

}  // namespace

void parallel_for_items(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_budget(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  std::mutex mu;
  std::exception_ptr err;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

MatrixBatch covariance_suite(int dim, int count, std::uint64_t seed, int aspect, double epsilon) {
  if (dim < 1 || count < 1 || aspect < 1) {
    throw std::invalid_argument("covariance_suite: dim, count, aspect must be at least 1");
  }
  CounterRng rng{seed};
  const int cols = dim * aspect;
  std::vector<SymMatrix> items;
  items.reserve(static_cast<size_t>(count));
  std::vector<double> x(static_cast<size_t>(dim) * cols);
  for (int item = 0; item < count; ++item) {
    const std::uint64_t base = static_cast<std::uint64_t>(item) << 32;
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < cols; ++j) {
        x[static_cast<size_t>(i) * cols + j] =
            rng.normal(base + static_cast<std::uint64_t>(i) * cols + j);
      }
    }
    Mat a(dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        double acc = 0.0;
        for (int k = 0; k < cols; ++k) {
          acc += x[static_cast<size_t>(i) * cols + k] * x[static_cast<size_t>(j) * cols + k];
        }
        a.at(i, j) = acc / cols;
        a.at(j, i) = a.at(i, j);
      }
    }
    double tr = 0.0;
    for (int i = 0; i < dim; ++i) tr += a.at(i, i);
    double shift = epsilon * tr / dim;
    for (int i = 0; i < dim; ++i) a.at(i, i) += shift;
    items.push_back(SymMatrix(std::move(a)));
  }
  return make_batch(std::move(items));
}

MatrixBatch whitening_suite(int dim, int count, std::uint64_t seed, double epsilon) {
  if (dim < 1 || count < 1) {
    throw std::invalid_argument("whitening_suite: dim and count must be at least 1");
  }
  CounterRng rng{seed};
  const int cols = 8 * dim;
  std::vector<SymMatrix> items;
  items.reserve(static_cast<size_t>(count));
  std::vector<double> x(static_cast<size_t>(dim) * cols);
  for (int item = 0; item < count; ++item) {
    const std::uint64_t base = kWhitenSalt + (static_cast<std::uint64_t>(item) << 32);
    for (int i = 0; i < dim; ++i) {
      double mean = 0.0;
      for (int j = 0; j < cols; ++j) {
        double v = rng.normal(base + static_cast<std::uint64_t>(i) * cols + j);
        x[static_cast<size_t>(i) * cols + j] = v;
        mean += v;
      }
      mean /= cols;
      for (int j = 0; j < cols; ++j) x[static_cast<size_t>(i) * cols + j] -= mean;
    }
    Mat a(dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) {
        double acc = 0.0;
        for (int k = 0; k < cols; ++k) {
          acc += x[static_cast<size_t>(i) * cols + k] * x[static_cast<size_t>(j) * cols + k];
        }
        a.at(i, j) = acc;
        a.at(j, i) = acc;
      }
      a.at(i, i) += epsilon;
    }
    items.push_back(SymMatrix(std::move(a)));
  }
  return make_batch(std::move(items));
}

Mat symmetric_upstream(int dim, std::uint64_t seed, int item) {
  CounterRng rng{seed};
  const std::uint64_t base = kUpstreamSalt + (static_cast<std::uint64_t>(item) << 32);
  Mat g(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      double v = rng.normal(base + static_cast<std::uint64_t>(i) * dim + j);
      g.at(i, j) = v;
      g.at(j, i) = v;
    }
  }
  return g;
}

std::vector<BenchRecord> run_fp_sweep(const SweepConfig& cfg) {
  validate(cfg);
  MatrixBatch suite = covariance_suite(cfg.dim, cfg.suite_size, cfg.seed);
  std::vector<BenchRecord> records;
  for (Target target : targets_of(cfg)) {
    std::vector<Mat> oracle = oracle_values(suite, target);
    if (method_enabled(cfg, "mtp")) {
      for (int k : cfg.degrees) {
        ForwardConfig fc{Method::MTP, target, k, 5};
        records.push_back(forward_record("fp", "mtp", target, k, suite, oracle, cfg.repetitions,
                                         [&](int i) { return mtp(suite.items[static_cast<size_t>(i)], fc); }));
      }
    }
    if (method_enabled(cfg, "mpa")) {
      for (int k : cfg.degrees) {
        ForwardConfig fc{Method::MPA, target, k, 5};
        records.push_back(forward_record("fp", "mpa", target, k, suite, oracle, cfg.repetitions,
                                         [&](int i) { return mpa(suite.items[static_cast<size_t>(i)], fc); }));
      }
    }
    if (method_enabled(cfg, "ns")) {
      for (int iters : cfg.ns_iterations) {
        ForwardConfig fc{Method::NSCoupled, target, 11, iters};
        records.push_back(forward_record("fp", "ns", target, iters, suite, oracle, cfg.repetitions,
                                         [&](int i) { return run_forward(suite.items[static_cast<size_t>(i)], fc); }));
      }
    }
  }
  sort_records(records);
  return records;
}

std::vector<BenchRecord> run_bp_sweep(const SweepConfig& cfg) {
  validate(cfg);
  MatrixBatch suite = covariance_suite(cfg.dim, cfg.suite_size, cfg.seed);
  const int n = static_cast<int>(suite.items.size());
  std::vector<Mat> upstream(static_cast<size_t>(n));
  parallel_for_items(n, [&](int i) {
    upstream[static_cast<size_t>(i)] = symmetric_upstream(cfg.dim, cfg.seed, i);
  });

  std::vector<BenchRecord> records;
  for (Target target : targets_of(cfg)) {
    std::vector<Mat> fv = oracle_values(suite, target);
    std::vector<Mat> exact(static_cast<size_t>(n));
    parallel_for_items(n, [&](int i) {
      exact[static_cast<size_t>(i)] =
          exact_grad(target, fv[static_cast<size_t>(i)], upstream[static_cast<size_t>(i)]);
    });

    auto grad_record = [&](const char* method, double param, auto&& run) {
      std::vector<double> maes(static_cast<size_t>(n));
      std::vector<double> rels(static_cast<size_t>(n));
      std::vector<double> resids(static_cast<size_t>(n));
      parallel_for_items(n, [&](int i) {
        GradResult r = run(i);
        maes[static_cast<size_t>(i)] = mae(r.grad, exact[static_cast<size_t>(i)]);
        rels[static_cast<size_t>(i)] = nrmse(r.grad, exact[static_cast<size_t>(i)]);
        resids[static_cast<size_t>(i)] = r.residual_b;
      });
      BenchRecord rec;
      rec.sweep = "bp";
      rec.method = method;
      rec.target = target_name(target);
      rec.param = param;
      for (int i = 0; i < n; ++i) {
        rec.mae += maes[static_cast<size_t>(i)];
        rec.nrmse += rels[static_cast<size_t>(i)];
        rec.defining_residual += resids[static_cast<size_t>(i)];
      }
      rec.mae /= n;
      rec.nrmse /= n;
      rec.defining_residual /= n;
      GradResult probe = run(0);
      rec.matmul_count = probe.counters.matmul;
      rec.solve_count = probe.counters.solve;
      rec.time_ns_mean = median_time_ns(cfg.repetitions, [&] { run(0); });
      records.push_back(std::move(rec));
    };

    if (method_enabled(cfg, "lyapunov")) {
      for (int t : cfg.lyapunov_iterations) {
        grad_record("lyapunov", t, [&](int i) {
          GradRequest req{target, suite.items[static_cast<size_t>(i)],
                          SymMatrix::symmetrized(fv[static_cast<size_t>(i)]),
                          upstream[static_cast<size_t>(i)], BackwardConfig{t, {}}};
          return lyapunov_grad(req);
        });
      }
    }
    if (method_enabled(cfg, "ns_backward") && target == Target::Sqrt) {
      for (int iters : cfg.ns_iterations) {
        grad_record("ns_backward", iters, [&](int i) {
          return ns_backward(suite.items[static_cast<size_t>(i)],
                             upstream[static_cast<size_t>(i)], iters);
        });
      }
    }
  }
  sort_records(records);
  return records;
}

std::vector<BenchRecord> run_batch_sweep(const SweepConfig& cfg) {
  validate(cfg);
  if (cfg.batch < 1) throw std::invalid_argument("batch must be at least 1");
  std::vector<int> batches;
  for (int b : {1, 4, 16, 64}) {
    if (b <= cfg.batch) batches.push_back(b);
  }
  const int max_batch = batches.back();
  MatrixBatch suite = covariance_suite(cfg.dim, max_batch, cfg.seed);
  Target target = cfg.targets.empty() ? Target::Sqrt : cfg.targets.front();
  Mat oracle0 = spectral(suite.items[0], target).value.mat();
  std::vector<Mat> upstream(static_cast<size_t>(max_batch));
  parallel_for_items(max_batch, [&](int i) {
    upstream[static_cast<size_t>(i)] = symmetric_upstream(cfg.dim, cfg.seed, i);
  });

  std::vector<std::string> methods = {"mtp", "mpa", "ns", "spectral"};
  std::vector<BenchRecord> records;
  for (const std::string& method : methods) {
    if (!method_enabled(cfg, method)) continue;
    ForwardConfig fc = default_forward_config(method, target);

    auto pipeline = [&](int i) {
      const SymMatrix& a = suite.items[static_cast<size_t>(i)];
      ForwardResult f = run_forward(a, fc);
      OpCounters total = f.counters;
      if (method == "spectral") {
        exact_grad(target, f.value.mat(), upstream[static_cast<size_t>(i)], &total);
      } else {
        GradRequest req{target, a, f.value, upstream[static_cast<size_t>(i)], BackwardConfig{}};
        GradResult r = lyapunov_grad(req);
        total.merge(r.counters);
      }
      return std::make_pair(std::move(f), total);
    };

    auto item0 = pipeline(0);
    ErrorReport er0 = make_error_report(suite.items[0], item0.first.value, oracle0, target);
    for (int b : batches) {
      BenchRecord rec;
      rec.sweep = "batch";
      rec.method = method;
      rec.target = target_name(target);
      rec.param = b;
      rec.mae = er0.mae;
      rec.nrmse = er0.nrmse;
      rec.defining_residual = er0.defining_residual;
      rec.matmul_count = item0.second.matmul;
      rec.solve_count = item0.second.solve;
      rec.time_ns_mean = median_time_ns(cfg.repetitions, [&] {
        for (int i = 0; i < b; ++i) pipeline(i);
      });
      records.push_back(std::move(rec));
    }
  }
  sort_records(records);
  return records;
}

std::vector<BenchRecord> run_dim_sweep(const SweepConfig& cfg) {
  validate(cfg);
  std::vector<BenchRecord> records;
  for (int dim : {4, 8, 16, 32, 64, 128}) {
    MatrixBatch suite = covariance_suite(dim, cfg.suite_size, cfg.seed);
    for (Target target : targets_of(cfg)) {
      std::vector<Mat> oracle = oracle_values(suite, target);
      for (const char* method : {"mtp", "mpa", "ns"}) {
        if (!method_enabled(cfg, method)) continue;
        ForwardConfig fc = default_forward_config(method, target);
        records.push_back(forward_record("dim", method, target, dim, suite, oracle,
                                         cfg.repetitions, [&](int i) {
                                           return run_forward(suite.items[static_cast<size_t>(i)], fc);
                                         }));
      }
    }
  }
  sort_records(records);
  return records;
}

std::vector<BenchRecord> run_whiten_demo(const SweepConfig& cfg) {
  validate(cfg);
  if (!(cfg.epsilon > 0.0)) {
    throw std::invalid_argument("whiten: epsilon must be positive (a zero ridge risks a singular covariance)");
  }
  MatrixBatch suite = whitening_suite(cfg.dim, cfg.suite_size, cfg.seed, cfg.epsilon);
  std::vector<Mat> oracle = oracle_values(suite, Target::InvSqrt);
  std::vector<BenchRecord> records;
  for (const char* method : {"mtp", "mpa", "ns", "spectral"}) {
    if (!method_enabled(cfg, method)) continue;
    ForwardConfig fc = default_forward_config(method, Target::InvSqrt);
    records.push_back(forward_record("whiten", method, Target::InvSqrt, default_param(method),
                                     suite, oracle, cfg.repetitions, [&](int i) {
                                       return run_forward(suite.items[static_cast<size_t>(i)], fc);
                                     }));
  }
  sort_records(records);
  return records;
}

std::string to_csv(const std::vector<BenchRecord>& records) {
  std::string out = "sweep,method,target,param,time_ns_mean,mae,nrmse,defining_residual,matmul_count,solve_count\n";
  for (const BenchRecord& r : records) {
    out += r.sweep;
    out += ',';
    out += r.method;
    out += ',';
    out += r.target;
    out += ',';
    out += fmt(r.param);
    out += ',';
    out += fmt(r.time_ns_mean);
    out += ',';
    out += fmt(r.mae);
    out += ',';
    out += fmt(r.nrmse);
    out += ',';
    out += fmt(r.defining_residual);
    out += ',';
    out += std::to_string(r.matmul_count);
    out += ',';
    out += std::to_string(r.solve_count);
    out += '\n';
  }
  return out;
}

std::string coeffs_csv(Target target, int m, int n) {
  const PadeTable& table = pade_table(target, m, n);
  std::string out = "target,M,N,kind,index,value\n";
  auto emit = [&](const char* kind, const std::vector<double>& v) {
    for (size_t i = 0; i < v.size(); ++i) {
      out += target_name(target);
      out += ',';
      out += std::to_string(m);
      out += ',';
      out += std::to_string(n);
      out += ',';
      out += kind;
      out += ',';
      out += std::to_string(i + 1);
      out += ',';
      out += fmt(v[i]);
      out += '\n';
    }
  };
  emit("p", table.p);
  emit("q", table.q);
  return out;
}

}  // namespace matroot
