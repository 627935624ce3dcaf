#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "matroot/bench.hpp"

namespace {

std::vector<matroot::Target> parse_targets(const std::string& spec) {
  if (spec == "sqrt") return {matroot::Target::Sqrt};
  if (spec == "isqrt") return {matroot::Target::InvSqrt};
  if (spec == "both") return {};
  throw CLI::ValidationError("--target", "expected sqrt, isqrt, or both");
}

void write_output(const std::string& csv, const std::string& out) {
  if (out.empty() || out == "stdout") {
    std::cout << csv;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + out);
  f << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix square-root benchmark harness; emits CSV"};

  std::string sweep;
  std::string out;
  std::string target_spec = "both";
  std::string methods_csv;
  matroot::SweepConfig cfg;
  int coeffs_m = 5;
  int coeffs_n = 5;

  app.add_option("--sweep", sweep, "One of fp, bp, batch, dim, whiten, coeffs")->required();
  app.add_option("--dim", cfg.dim, "Matrix dimension for fixed-dim sweeps");
  app.add_option("--batch", cfg.batch, "Upper bound for the batch-size ladder");
  app.add_option("--suite-size", cfg.suite_size, "Matrices per suite");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--reps", cfg.repetitions, "Timing repetitions (at least 5 are taken)");
  app.add_option("--out", out, "Output path, or stdout");
  app.add_option("--methods", methods_csv, "Comma-separated method filter");
  app.add_option("--target", target_spec, "sqrt, isqrt, or both");
  app.add_option("--eps", cfg.epsilon, "Whitening-demo covariance ridge");
  app.add_option("--pade-m", coeffs_m, "Numerator degree for the coeffs dump");
  app.add_option("--pade-n", coeffs_n, "Denominator degree for the coeffs dump");

  try {
    app.parse(argc, argv);
    cfg.targets = parse_targets(target_spec);
    if (!methods_csv.empty()) {
      std::string token;
      for (char c : methods_csv + ",") {
        if (c == ',') {
          if (!token.empty()) cfg.methods.push_back(token);
          token.clear();
        } else {
          token += c;
        }
      }
      for (const std::string& m : cfg.methods) {
        if (m != "mtp" && m != "mpa" && m != "ns" && m != "spectral" && m != "lyapunov" &&
            m != "ns_backward") {
          throw std::runtime_error("unknown method in --methods: " + m);
        }
      }
    }

    std::string csv;
    if (sweep == "fp") {
      csv = matroot::to_csv(matroot::run_fp_sweep(cfg));
    } else if (sweep == "bp") {
      csv = matroot::to_csv(matroot::run_bp_sweep(cfg));
    } else if (sweep == "batch") {
      csv = matroot::to_csv(matroot::run_batch_sweep(cfg));
    } else if (sweep == "dim") {
      csv = matroot::to_csv(matroot::run_dim_sweep(cfg));
    } else if (sweep == "whiten") {
      csv = matroot::to_csv(matroot::run_whiten_demo(cfg));
    } else if (sweep == "coeffs") {
      matroot::Target t = cfg.targets.size() == 1 ? cfg.targets.front() : matroot::Target::Sqrt;
      csv = matroot::coeffs_csv(t, coeffs_m, coeffs_n);
    } else {
      throw std::runtime_error("unknown sweep: " + sweep);
    }
    write_output(csv, out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
