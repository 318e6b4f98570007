// Command-line entry point: scenario runner plus direct envelope/lsc
// subcommands. Exit codes: 0 all rows pass, 1 any row fails, 2 on
// configuration errors.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oclab/oclab.hpp"

namespace {

std::uint64_t seed_from_env(std::uint64_t fallback) {
  if (const char* env = std::getenv("LAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      std::cerr << "warning: ignoring malformed LAB_SEED\n";
    }
  }
  return fallback;
}

int write_report(const oclab::RunReport& report, const std::string& out_path) {
  const std::string csv = oclab::report_to_csv(report);
  if (out_path.empty() || out_path == "-") {
    std::cout << csv;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << out_path << "'\n";
      return 2;
    }
    out << csv;
  }
  std::cerr << report.summary << "\n";
  return report.exit_code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"oclab: oscillation/concentration measure laboratory"};
  app.require_subcommand(1);

  oclab::RunOptions options;
  options.seed = seed_from_env(oclab::kDefaultSeed);

  // run: scenario-driven batch verification
  std::string scenario_path, out_path;
  auto* run = app.add_subcommand("run", "run a scenario file and emit the CSV report");
  run->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
  run->add_option("--out", out_path, "output CSV path ('-' for stdout)");
  run->add_option("--k-max", options.k_max_exp, "top schedule exponent (k = 2^4..2^EXP)")
      ->check(CLI::Range(4, 40));
  run->add_option("--quad-order", options.quad_order, "Gauss-Legendre order per subinterval")
      ->check(CLI::Range(1, 64));
  run->add_option("--jobs", options.jobs, "worker threads")->check(CLI::Range(1, 256));
  run->add_flag("--trace", options.trace, "also write per-(battery,k) rows to <out>.trace.csv");

  // envelope: direct quasiconvex envelope upper bounds
  std::string psi_name = "double_well";
  std::vector<double> s0s;
  int grid = 64, starts = 16;
  std::string env_out;
  auto* env = app.add_subcommand("envelope", "quasiconvex envelope upper bound");
  env->add_option("--psi", psi_name, "catalog psi name");
  env->add_option("--s0", s0s, "evaluation points")->expected(-1);
  env->add_option("--grid", grid, "zero-boundary hat functions per cell")->check(CLI::Range(4, 4096));
  env->add_option("--starts", starts, "multistart count")->check(CLI::Range(1, 1024));
  env->add_option("--out", env_out, "output CSV path ('-' for stdout)");
  env->add_option("--jobs", options.jobs, "worker threads")->check(CLI::Range(1, 256));

  // lsc: gap rows for catalog family/integrand pairs
  std::string lsc_family = "sawtooth", lsc_integrand = "grad_sq", lsc_out;
  auto* lsc = app.add_subcommand("lsc", "weak lower semicontinuity gap test");
  lsc->add_option("--family", lsc_family, "catalog family");
  lsc->add_option("--integrand", lsc_integrand, "catalog integrand");
  lsc->add_option("--k-max", options.k_max_exp, "top schedule exponent")->check(CLI::Range(4, 40));
  lsc->add_option("--out", lsc_out, "output CSV path ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto report = oclab::run_scenario_file(scenario_path, options);
      if (options.trace && !out_path.empty() && out_path != "-") {
        std::ofstream trace(out_path + ".trace.csv", std::ios::binary);
        trace << oclab::rows_to_csv(report.trace_rows);
      }
      return write_report(report, out_path);
    }
    if (env->parsed()) {
      nlohmann::json doc;
      doc["scenarios"] = nlohmann::json::array();
      nlohmann::json sj;
      sj["name"] = "envelope_" + psi_name;
      sj["pipeline"] = "envelope";
      sj["psi"] = psi_name;
      sj["grid"] = grid;
      sj["starts"] = starts;
      sj["s0"] = s0s.empty() ? nlohmann::json(0.0) : nlohmann::json(s0s);
      doc["scenarios"].push_back(sj);
      const auto report = oclab::run_scenarios(doc, options);
      return write_report(report, env_out.empty() ? "-" : env_out);
    }
    if (lsc->parsed()) {
      nlohmann::json doc;
      nlohmann::json sj;
      sj["name"] = lsc_family + "_" + lsc_integrand;
      sj["pipeline"] = "lsc";
      sj["family"] = lsc_family;
      sj["integrand"] = lsc_integrand;
      doc["scenarios"] = nlohmann::json::array({sj});
      const auto report = oclab::run_scenarios(doc, options);
      return write_report(report, lsc_out.empty() ? "-" : lsc_out);
    }
  } catch (const oclab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
