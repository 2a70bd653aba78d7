// hankelid_cli: identify | simulate | bench | gradcheck
//
// Exit codes: 0 ok, 1 check or numerical failure, 2 usage or I/O error.

#include "hankelid/hankelid.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check = 1;
constexpr int exit_usage = 2;

struct RunConfig {
  std::string data;
  std::string scenario = "S1";
  int runs = 20;
  std::uint64_t seed = 1;
  int lags = 0;
  double epsilon = 1e-3;
  std::string estimators = "SH,SS";
  std::string out = ".";
  std::string weights = "identity";
  std::string cv_grid;
  std::size_t samples = 500;
  int instances = 50;
  bool white_input = false;
  std::string snr;
  double sgp_tol = 1e-9;
  int sgp_max_iter = 5000;
  int threads = 0;
  bool corrupt_gradient = false;
  bool literal_acceptance = false;
};

int report(hkid_status status) {
  std::cerr << "error: " << hkid_status_string(status) << ": " << hkid_last_error() << "\n";
  return status == HKID_ERR_NUMERICAL ? exit_check : exit_usage;
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

bool ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) std::cerr << "error: cannot create output directory " << dir << ": " << ec.message() << "\n";
  return !ec;
}

bool parse_range(const std::string& text, double& lo, double& hi) {
  const auto colon = text.find(':');
  try {
    lo = std::stod(text.substr(0, colon));
    hi = colon == std::string::npos ? lo : std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    return false;
  }
  return lo > 0.0 && hi >= lo;
}

bool scenario_options(const RunConfig& cfg, hkid_scenario_options& s) {
  hkid_scenario_options_default(&s);
  s.scenario = cfg.scenario.c_str();
  s.samples = cfg.samples;
  s.seed = cfg.seed;
  s.white_input = cfg.white_input ? 1 : 0;
  if (!cfg.snr.empty() && !parse_range(cfg.snr, s.snr_lo, s.snr_hi)) {
    std::cerr << "error: --snr expects lo[:hi] with 0 < lo <= hi\n";
    return false;
  }
  return true;
}

hkid_weights weight_flag(const std::string& w) {
  return w == "empirical" ? HKID_WEIGHTS_EMPIRICAL : HKID_WEIGHTS_IDENTITY;
}

int cmd_identify(const RunConfig& cfg) {
  if (cfg.data.empty()) {
    std::cerr << "error: identify requires --data\n";
    return exit_usage;
  }
  hkid_dataset* data = nullptr;
  hkid_status st = hkid_dataset_load_csv(cfg.data.c_str(), &data);
  if (st != HKID_OK) return report(st);

  hkid_identify_options opt;
  hkid_identify_options_default(&opt);
  if (cfg.lags > 0) opt.lags = cfg.lags;
  opt.epsilon = cfg.epsilon;
  opt.weights = weight_flag(cfg.weights);
  opt.sgp_rel_tol = cfg.sgp_tol;
  opt.sgp_max_iter = cfg.sgp_max_iter;
  opt.literal_acceptance = cfg.literal_acceptance ? 1 : 0;

  hkid_result* result = nullptr;
  st = hkid_identify(data, &opt, &result);
  hkid_dataset_free(data);
  if (st != HKID_OK) {
    const int code = report(st);
    if (result) {
      if (ensure_dir(cfg.out)) hkid_result_write_trace_json(result, path_in(cfg.out, "trace.json").c_str());
      hkid_result_free(result);
    }
    return code;
  }
  int code = exit_ok;
  if (!ensure_dir(cfg.out)) {
    code = exit_usage;
  } else {
    if ((st = hkid_result_write_impulse_csv(result, path_in(cfg.out, "impulse.csv").c_str())) != HKID_OK ||
        (st = hkid_result_write_trace_json(result, path_in(cfg.out, "trace.json").c_str())) != HKID_OK ||
        (st = hkid_result_write_summary(result, path_in(cfg.out, "summary.txt").c_str())) != HKID_OK)
      code = report(st);
    else
      std::cout << hkid_result_summary(result);
  }
  hkid_result_free(result);
  return code;
}

int cmd_simulate(const RunConfig& cfg) {
  hkid_scenario_options s;
  if (!scenario_options(cfg, s)) return exit_usage;
  hkid_dataset* data = nullptr;
  hkid_status st = hkid_simulate(&s, &data);
  if (st != HKID_OK) return report(st);
  int code = exit_ok;
  if (!ensure_dir(cfg.out)) code = exit_usage;
  else if ((st = hkid_dataset_save_csv(data, path_in(cfg.out, "dataset.csv").c_str())) != HKID_OK) code = report(st);
  else std::cout << "wrote " << path_in(cfg.out, "dataset.csv") << "\n";
  hkid_dataset_free(data);
  return code;
}

int cmd_bench(const RunConfig& cfg) {
  hkid_bench_options opt;
  hkid_bench_options_default(&opt);
  if (!scenario_options(cfg, opt.scenario)) return exit_usage;
  opt.runs = cfg.runs;
  opt.estimators = cfg.estimators.c_str();
  opt.lags = cfg.lags;
  opt.epsilon = cfg.epsilon;
  opt.weights = weight_flag(cfg.weights);
  opt.threads = cfg.threads;
  if (!cfg.cv_grid.empty()) {
    std::stringstream ss(cfg.cv_grid);
    std::string lo, hi, count;
    bool ok = std::getline(ss, lo, ':') && std::getline(ss, hi, ':') && std::getline(ss, count);
    try {
      if (ok) {
        opt.cv_lo = std::stod(lo);
        opt.cv_hi = std::stod(hi);
        opt.cv_count = std::stoi(count);
      }
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok || !(opt.cv_lo > 0.0 && opt.cv_hi >= opt.cv_lo && opt.cv_count >= 1)) {
      std::cerr << "error: --cv-grid expects lo:hi:count\n";
      return exit_usage;
    }
  }
  hkid_bench* bench = nullptr;
  hkid_status st = hkid_bench_run(&opt, &bench);
  if (st != HKID_OK) return report(st);
  int code = exit_ok;
  if (!ensure_dir(cfg.out)) code = exit_usage;
  else if ((st = hkid_bench_write_csv(bench, path_in(cfg.out, "bench.csv").c_str())) != HKID_OK ||
           (st = hkid_bench_write_json(bench, path_in(cfg.out, "bench.json").c_str())) != HKID_OK ||
           (st = hkid_bench_write_fit_csv(bench, path_in(cfg.out, "fit_distribution.csv").c_str())) != HKID_OK)
    code = report(st);
  else
    std::cout << "wrote " << path_in(cfg.out, "bench.csv") << "\n";
  hkid_bench_free(bench);
  return code;
}

int cmd_gradcheck(const RunConfig& cfg) {
  double err = 0.0;
  const hkid_status st = hkid_gradcheck(cfg.instances, cfg.seed, cfg.corrupt_gradient ? 1 : 0, &err);
  if (st != HKID_OK) return report(st);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max relative gradient error: %.3e over %d instances\n", err, cfg.instances);
  std::cout << buf;
  if (!(err < 1e-5)) {
    std::cout << "gradient check FAILED (threshold 1e-5)\n";
    return exit_check;
  }
  std::cout << "gradient check passed\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable-Hankel FIR identification toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file mirroring the long flags; flags win");
  RunConfig cfg;

  app.add_option("--data", cfg.data, "dataset CSV (t,u1..um,y1..yp)");
  app.add_option("--scenario", cfg.scenario, "S1, S2 or S3")->check(CLI::IsMember({"S1", "S2", "S3"}));
  app.add_option("--runs", cfg.runs, "Monte-Carlo runs")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--T", cfg.lags, "FIR length (default: 50, or the scenario value)")->check(CLI::PositiveNumber);
  app.add_option("--epsilon", cfg.epsilon, "likelihood-ratio resolution")->check(CLI::PositiveNumber);
  app.add_option("--estimators", cfg.estimators, "comma-separated SH, SS, NN, NNW");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--weights", cfg.weights, "Hankel weights")->check(CLI::IsMember({"identity", "empirical"}));
  app.add_option("--cv-grid", cfg.cv_grid, "NN cross-validation grid lo:hi:count");
  app.add_option("--N", cfg.samples, "scenario data length")->check(CLI::PositiveNumber);
  app.add_option("--instances", cfg.instances, "gradcheck instances")->check(CLI::PositiveNumber);
  app.add_flag("--white-input", cfg.white_input, "unit-variance white input instead of the scenario input");
  app.add_option("--snr", cfg.snr, "per-channel SNR lo[:hi]");
  app.add_option("--sgp-tol", cfg.sgp_tol, "SGP relative decrease tolerance")->check(CLI::PositiveNumber);
  app.add_option("--sgp-max-iter", cfg.sgp_max_iter, "SGP iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--threads", cfg.threads, "bench worker threads (0: all cores)");
  app.add_flag("--literal-acceptance", cfg.literal_acceptance,
               "accept a step by its own baseline only (accepted likelihoods may then decrease)");
  app.add_flag("--corrupt-gradient", cfg.corrupt_gradient, "gradcheck negative control")->group("");

  auto* identify = app.add_subcommand("identify", "estimate an impulse response from --data")->fallthrough();
  auto* simulate = app.add_subcommand("simulate", "generate a scenario dataset")->fallthrough();
  auto* bench = app.add_subcommand("bench", "Monte-Carlo comparison of estimators")->fallthrough();
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  if (*identify) return cmd_identify(cfg);
  if (*simulate) return cmd_simulate(cfg);
  if (*bench) return cmd_bench(cfg);
  if (*gradcheck) return cmd_gradcheck(cfg);
  return exit_usage;
}
