#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <sys/wait.h>

#include "matroot/bench.hpp"

using namespace matroot;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

// Runs the benchmark binary through the shell, capturing stdout and stderr.
RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd = env_prefix + std::string(BENCHCLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(delim, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string> lines_of(const std::string& out) {
  std::vector<std::string> lines = split(out, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

constexpr const char* kHeader =
    "sweep,method,target,param,time_ns_mean,mae,nrmse,defining_residual,matmul_count,solve_count";

// Parses a sweep CSV into field rows, requiring the exact header.
std::vector<std::vector<std::string>> parse_rows(const std::string& out) {
  std::vector<std::string> lines = lines_of(out);
  REQUIRE(!lines.empty());
  REQUIRE(lines[0] == kHeader);
  std::vector<std::vector<std::string>> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields = split(lines[i], ',');
    REQUIRE(fields.size() == 10);
    rows.push_back(fields);
  }
  return rows;
}

const std::vector<std::string>* find_row(const std::vector<std::vector<std::string>>& rows,
                                         const std::string& method, const std::string& param,
                                         const std::string& target) {
  for (const auto& r : rows) {
    if (r[1] == method && r[3] == param && r[2] == target) return &r;
  }
  return nullptr;
}

double field(const std::vector<std::string>& row, int idx) {
  return std::strtod(row[static_cast<size_t>(idx)].c_str(), nullptr);
}

// Drops the timing column so two runs can be compared byte for byte.
std::string strip_time(const std::string& out) {
  std::string result;
  for (const std::string& line : lines_of(out)) {
    std::vector<std::string> fields = split(line, ',');
    std::string rebuilt;
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i == 4) continue;
      if (!rebuilt.empty()) rebuilt += ',';
      rebuilt += fields[i];
    }
    result += rebuilt;
    result += '\n';
  }
  return result;
}

}  // namespace

TEST_CASE("fp sweep ranks the rational approximant above a short iteration") {
  RunResult r = run_cli("--sweep fp --dim 32 --suite-size 12 --reps 1 --seed 5 --target both");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_rows(r.out);
  for (std::string target : {"sqrt", "isqrt"}) {
    const auto* mpa_row = find_row(rows, "mpa", "11", target);
    const auto* ns_row = find_row(rows, "ns", "3", target);
    REQUIRE(mpa_row != nullptr);
    REQUIRE(ns_row != nullptr);
    CHECK(field(*mpa_row, 5) < field(*ns_row, 5));
  }
}

TEST_CASE("fp sweep on one-dimensional input is exact") {
  RunResult r = run_cli("--sweep fp --dim 1 --suite-size 1 --reps 1 --seed 1 --target both "
                        "--methods mtp,mpa");
  REQUIRE(r.exit_code == 0);
  for (const auto& row : parse_rows(r.out)) {
    CHECK(field(row, 5) == 0.0);
    CHECK(field(row, 6) == 0.0);
  }
}

TEST_CASE("identical seeds reproduce every non-timing byte") {
  const std::string args = "--sweep fp --dim 16 --suite-size 4 --reps 1 --seed 21 --target both";
  RunResult a = run_cli(args);
  RunResult b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(strip_time(a.out) == strip_time(b.out));
}

TEST_CASE("thread cap does not change the numbers") {
  const std::string args = "--sweep bp --dim 16 --suite-size 4 --reps 1 --seed 23 --target both";
  RunResult one = run_cli(args, "MATROOT_THREADS=1 ");
  RunResult four = run_cli(args, "MATROOT_THREADS=4 ");
  REQUIRE(one.exit_code == 0);
  REQUIRE(four.exit_code == 0);
  CHECK(strip_time(one.out) == strip_time(four.out));
}

TEST_CASE("bp sweep reports the solver's exact matmul budget") {
  RunResult r = run_cli("--sweep bp --dim 16 --suite-size 2 --reps 1 --seed 7 --target isqrt "
                        "--methods lyapunov");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_rows(r.out);
  CHECK(rows.size() == 6);  // iteration counts 5 through 10
  for (int t = 5; t <= 10; ++t) {
    const auto* row = find_row(rows, "lyapunov", std::to_string(t), "isqrt");
    REQUIRE(row != nullptr);
    CHECK(field(*row, 8) == 3 + 6 * t);
    CHECK(field(*row, 9) == 0.0);
  }
  const auto* t5 = find_row(rows, "lyapunov", "5", "isqrt");
  const auto* t8 = find_row(rows, "lyapunov", "8", "isqrt");
  CHECK(field(*t5, 7) > field(*t8, 7));
}

TEST_CASE("bp sweep covers the reverse-mode iteration for the square root") {
  RunResult r = run_cli("--sweep bp --dim 16 --suite-size 2 --reps 1 --seed 27 --target sqrt "
                        "--methods ns_backward");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_rows(r.out);
  CHECK(rows.size() == 5);  // iteration counts 3 through 7
  for (int t = 3; t <= 7; ++t) {
    const auto* row = find_row(rows, "ns_backward", std::to_string(t), "sqrt");
    REQUIRE(row != nullptr);
    CHECK(field(*row, 8) == 6 * t);
    CHECK(field(*row, 5) >= 0.0);
  }
}

TEST_CASE("batch sweep emits sixteen rows with batch-independent errors") {
  RunResult r = run_cli("--sweep batch --dim 16 --reps 1 --seed 9");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_rows(r.out);
  REQUIRE(rows.size() == 16);
  for (std::string method : {"mtp", "mpa", "ns", "spectral"}) {
    std::vector<const std::vector<std::string>*> group;
    for (const auto& row : rows) {
      if (row[1] == method) group.push_back(&row);
    }
    REQUIRE(group.size() == 4);
    for (size_t i = 1; i < group.size(); ++i) {
      // Error metrics come from item zero, so they cannot move with the
      // batch size; only the timing column may differ.
      CHECK((*group[i])[5] == (*group[0])[5]);
      CHECK((*group[i])[6] == (*group[0])[6]);
      CHECK((*group[i])[7] == (*group[0])[7]);
    }
  }
}

TEST_CASE("dim sweep orders methods consistently under both error metrics") {
  RunResult r = run_cli("--sweep dim --suite-size 3 --reps 1 --seed 11");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_rows(r.out);
  for (std::string dim : {"4", "8", "16", "32", "64", "128"}) {
    const auto* row_mtp = find_row(rows, "mtp", dim, "sqrt");
    const auto* row_mpa = find_row(rows, "mpa", dim, "sqrt");
    const auto* row_ns = find_row(rows, "ns", dim, "sqrt");
    REQUIRE(row_mtp != nullptr);
    REQUIRE(row_mpa != nullptr);
    REQUIRE(row_ns != nullptr);
    CHECK(field(*row_mpa, 5) < field(*row_ns, 5));
    // The two error metrics must agree on the ranking of the three methods.
    auto rank_of = [&](int col) {
      std::vector<std::pair<double, std::string>> order = {
          {field(*row_mtp, col), "mtp"}, {field(*row_mpa, col), "mpa"}, {field(*row_ns, col), "ns"}};
      std::sort(order.begin(), order.end());
      return std::vector<std::string>{order[0].second, order[1].second, order[2].second};
    };
    CHECK(rank_of(5) == rank_of(6));
  }
}

TEST_CASE("whiten demo separates exact, rational, and series methods") {
  RunResult r = run_cli("--sweep whiten --dim 32 --suite-size 6 --reps 1 --seed 13");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_rows(r.out);
  const auto* row_spectral = find_row(rows, "spectral", "0", "isqrt");
  const auto* row_mpa = find_row(rows, "mpa", "11", "isqrt");
  const auto* row_mtp = find_row(rows, "mtp", "11", "isqrt");
  REQUIRE(row_spectral != nullptr);
  REQUIRE(row_mpa != nullptr);
  REQUIRE(row_mtp != nullptr);
  CHECK(field(*row_spectral, 7) < 1e-8);
  CHECK(field(*row_mpa, 7) < field(*row_mtp, 7));
}

TEST_CASE("rows are sorted by method, then parameter, then target") {
  RunResult r = run_cli("--sweep fp --dim 8 --suite-size 2 --reps 1 --seed 15 --target both");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_rows(r.out);
  REQUIRE(rows.size() > 1);
  for (size_t i = 1; i < rows.size(); ++i) {
    auto key = [](const std::vector<std::string>& row) {
      return std::make_tuple(row[1], std::strtod(row[3].c_str(), nullptr), row[2]);
    };
    CHECK(key(rows[i - 1]) <= key(rows[i]));
  }
}

TEST_CASE("invalid invocations fail with a diagnostic") {
  RunResult bad_eps = run_cli("--sweep whiten --dim 8 --suite-size 1 --eps 0");
  CHECK(bad_eps.exit_code != 0);
  CHECK(bad_eps.out.find("error:") != std::string::npos);

  CHECK(run_cli("--sweep nonsense").exit_code != 0);
  CHECK(run_cli("--sweep fp --methods bogus").exit_code != 0);
  CHECK(run_cli("--sweep fp --dim 0").exit_code != 0);
}

TEST_CASE("coefficient dump exposes the cached tables") {
  RunResult r = run_cli("--sweep coeffs --pade-m 5 --pade-n 5 --target sqrt");
  REQUIRE(r.exit_code == 0);
  std::vector<std::string> lines = lines_of(r.out);
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "target,M,N,kind,index,value");
  REQUIRE(lines.size() == 11);

  auto value_of = [&](const std::string& kind, int index) {
    for (size_t i = 1; i < lines.size(); ++i) {
      std::vector<std::string> f = split(lines[i], ',');
      REQUIRE(f.size() == 6);
      if (f[3] == kind && f[4] == std::to_string(index)) {
        return std::strtod(f[5].c_str(), nullptr);
      }
    }
    REQUIRE(false);
    return 0.0;
  };

  const double q_reference[5] = {2.25, -1.75, 0.54675, -0.05859375, 0.0009765625};
  for (int i = 0; i < 5; ++i) {
    CHECK(std::fabs(value_of("q", i + 1) - q_reference[i]) < 1e-3);
  }
  CHECK(std::fabs(value_of("p", 1) - 2.75) < 1e-12);

  RunResult r11 = run_cli("--sweep coeffs --pade-m 1 --pade-n 1 --target sqrt");
  REQUIRE(r11.exit_code == 0);
  std::vector<std::string> l11 = lines_of(r11.out);
  REQUIRE(l11.size() == 3);
  CHECK(l11[1] == "sqrt,1,1,p,1,0.75");
  CHECK(l11[2] == "sqrt,1,1,q,1,0.25");

  // The inverse-root table is the square-root table with the coefficient
  // roles swapped and negated.
  RunResult ri = run_cli("--sweep coeffs --pade-m 5 --pade-n 5 --target isqrt");
  REQUIRE(ri.exit_code == 0);
  std::vector<std::string> li = lines_of(ri.out);
  REQUIRE(li.size() == 11);
  auto ivalue_of = [&](const std::string& kind, int index) {
    for (size_t i = 1; i < li.size(); ++i) {
      std::vector<std::string> f = split(li[i], ',');
      if (f[3] == kind && f[4] == std::to_string(index)) {
        return std::strtod(f[5].c_str(), nullptr);
      }
    }
    REQUIRE(false);
    return 0.0;
  };
  for (int i = 1; i <= 5; ++i) {
    CHECK(std::fabs(ivalue_of("p", i) + value_of("q", i)) < 1e-12);
    CHECK(std::fabs(ivalue_of("q", i) + value_of("p", i)) < 1e-12);
  }
}

TEST_CASE("sweep records respect basic invariants in-process") {
  SweepConfig cfg;
  cfg.dim = 16;
  cfg.suite_size = 2;
  cfg.repetitions = 1;
  cfg.seed = 33;
  std::vector<BenchRecord> records = run_whiten_demo(cfg);
  REQUIRE(!records.empty());
  for (const BenchRecord& r : records) {
    CHECK(r.time_ns_mean >= 1.0);
    CHECK(r.defining_residual >= 0.0);
    CHECK(r.matmul_count >= 0);
    CHECK(r.solve_count >= 0);
    CHECK(r.sweep == "whiten");
    CHECK(r.target == "isqrt");
  }
}
