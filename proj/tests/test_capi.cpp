#include <doctest.h>

#include "hankelid/hankelid.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

hkid_dataset* simulate_s1(size_t samples, uint64_t seed) {
  hkid_scenario_options s;
  hkid_scenario_options_default(&s);
  s.samples = samples;
  s.seed = seed;
  hkid_dataset* d = nullptr;
  REQUIRE(hkid_simulate(&s, &d) == HKID_OK);
  return d;
}

}  // namespace

TEST_CASE("status strings and argument errors") {
  CHECK(std::string(hkid_status_string(HKID_OK)) != "");
  CHECK(std::string(hkid_status_string(HKID_ERR_NUMERICAL)) != std::string(hkid_status_string(HKID_ERR_IO)));
  hkid_dataset* d = nullptr;
  CHECK(hkid_dataset_create(2, 1, 1, nullptr, nullptr, &d) == HKID_ERR_INVALID_ARGUMENT);
  CHECK(d == nullptr);
  CHECK(std::string(hkid_last_error()) != "");
  CHECK(hkid_dataset_load_csv("/nonexistent/x.csv", &d) == HKID_ERR_IO);
  hkid_dataset_free(nullptr);
  hkid_result_free(nullptr);
  hkid_bench_free(nullptr);
}

TEST_CASE("dataset round trip") {
  const double u[] = {1, 0, -1, 2, 0.5};
  const double y[] = {0, 1, 10, 0, 20, -1, 5, 2, 1, 1};
  hkid_dataset* d = nullptr;
  REQUIRE(hkid_dataset_create(5, 1, 2, u, y, &d) == HKID_OK);
  size_t n = 0, m = 0, p = 0;
  CHECK(hkid_dataset_dims(d, &n, &m, &p) == HKID_OK);
  CHECK(n == 5);
  CHECK(m == 1);
  CHECK(p == 2);
  REQUIRE(hkid_dataset_save_csv(d, "capi_roundtrip.csv") == HKID_OK);
  hkid_dataset* back = nullptr;
  REQUIRE(hkid_dataset_load_csv("capi_roundtrip.csv", &back) == HKID_OK);
  REQUIRE(hkid_dataset_save_csv(back, "capi_roundtrip2.csv") == HKID_OK);
  CHECK(slurp("capi_roundtrip.csv") == slurp("capi_roundtrip2.csv"));
  CHECK(slurp("capi_roundtrip.csv").rfind("t,u1,y1,y2\n", 0) == 0);
  hkid_dataset_free(d);
  hkid_dataset_free(back);

  std::ofstream("capi_bad.csv") << "t,u1,y1\n1,2\n";
  CHECK(hkid_dataset_load_csv("capi_bad.csv", &back) == HKID_ERR_PARSE);
}

TEST_CASE("identify through the C interface") {
  hkid_dataset* d = simulate_s1(300, 3);
  hkid_identify_options opt;
  hkid_identify_options_default(&opt);
  CHECK(opt.lags == 50);
  CHECK(opt.epsilon == 1e-3);
  CHECK(opt.sgp_rel_tol == 1e-9);
  CHECK(opt.sgp_max_iter == 5000);
  opt.lags = 20;
  hkid_result* r = nullptr;
  REQUIRE(hkid_identify(d, &opt, &r) == HKID_OK);
  CHECK(hkid_result_complete(r) == 1);
  size_t lags = 0, p = 0, m = 0;
  REQUIRE(hkid_result_shape(r, &lags, &p, &m) == HKID_OK);
  CHECK(lags == 20);
  CHECK(p == 3);
  CHECK(m == 1);
  std::vector<double> h(lags * p * m);
  CHECK(hkid_result_coefficients(r, h.data(), h.size()) == HKID_OK);
  CHECK(hkid_result_coefficients(r, h.data(), h.size() - 1) == HKID_ERR_INVALID_ARGUMENT);
  // h(1) of the first output is roughly CB = 3.
  CHECK(std::abs(h[0] - 3.0) < 1.0);
  double lambda[3], c = 0, beta = 0;
  CHECK(hkid_result_lambda(r, lambda) == HKID_OK);
  CHECK(lambda[0] >= 0.0);
  CHECK(hkid_result_spline(r, &c, &beta) == HKID_OK);
  CHECK(beta > 0.0);
  CHECK(beta < 1.0);
  std::vector<double> noise(3);
  CHECK(hkid_result_noise(r, noise.data(), 3) == HKID_OK);
  CHECK(noise[2] > noise[1]);
  CHECK(hkid_result_order(r) <= 3 * 5);
  CHECK(hkid_result_seconds(r) > 0.0);
  CHECK(std::string(hkid_result_summary(r)).find("order") != std::string::npos);

  REQUIRE(hkid_result_write_impulse_csv(r, "capi_impulse.csv") == HKID_OK);
  REQUIRE(hkid_result_write_trace_json(r, "capi_trace.json") == HKID_OK);
  REQUIRE(hkid_result_write_summary(r, "capi_summary.txt") == HKID_OK);
  CHECK(slurp("capi_impulse.csv").rfind("i,j,k,value\n", 0) == 0);
  CHECK(slurp("capi_trace.json").find("\"trace\"") != std::string::npos);
  CHECK(hkid_result_write_trace_json(r, "/nonexistent/dir/t.json") == HKID_ERR_IO);
  hkid_result_free(r);

  opt.lags = 400;
  r = nullptr;
  CHECK(hkid_identify(d, &opt, &r) == HKID_ERR_INSUFFICIENT_DATA);
  CHECK(r == nullptr);
  opt.lags = 20;
  opt.epsilon = -1.0;
  CHECK(hkid_identify(d, &opt, &r) == HKID_ERR_INVALID_ARGUMENT);
  hkid_dataset_free(d);
}

TEST_CASE("simulate and bench through the C interface") {
  hkid_scenario_options s;
  hkid_scenario_options_default(&s);
  s.scenario = "S9";
  hkid_dataset* d = nullptr;
  CHECK(hkid_simulate(&s, &d) == HKID_ERR_INVALID_ARGUMENT);

  hkid_dataset* a = simulate_s1(200, 8);
  hkid_dataset* b = simulate_s1(200, 8);
  REQUIRE(hkid_dataset_save_csv(a, "capi_sim_a.csv") == HKID_OK);
  REQUIRE(hkid_dataset_save_csv(b, "capi_sim_b.csv") == HKID_OK);
  CHECK(slurp("capi_sim_a.csv") == slurp("capi_sim_b.csv"));
  hkid_dataset_free(a);
  hkid_dataset_free(b);

  hkid_bench_options opt;
  hkid_bench_options_default(&opt);
  opt.scenario.samples = 200;
  opt.runs = 2;
  opt.estimators = "SS";
  opt.threads = 1;
  hkid_bench* bench = nullptr;
  REQUIRE(hkid_bench_run(&opt, &bench) == HKID_OK);
  REQUIRE(hkid_bench_write_csv(bench, "capi_bench.csv") == HKID_OK);
  REQUIRE(hkid_bench_write_json(bench, "capi_bench.json") == HKID_OK);
  REQUIRE(hkid_bench_write_fit_csv(bench, "capi_fit.csv") == HKID_OK);
  CHECK(exists("capi_bench.json"));
  CHECK(slurp("capi_bench.csv").rfind("estimator,metric,median,p5,p95,count,failures\n", 0) == 0);
  hkid_bench_free(bench);

  opt.estimators = "SS,FOO";
  bench = nullptr;
  CHECK(hkid_bench_run(&opt, &bench) == HKID_ERR_INVALID_ARGUMENT);
  CHECK(std::string(hkid_last_error()).find("SH") != std::string::npos);
}

TEST_CASE("gradient check through the C interface") {
  double err = 1.0;
  REQUIRE(hkid_gradcheck(5, 1, 0, &err) == HKID_OK);
  CHECK(err < 1e-5);
  double again = 0.0;
  REQUIRE(hkid_gradcheck(5, 1, 0, &again) == HKID_OK);
  CHECK(again == err);
  REQUIRE(hkid_gradcheck(2, 1, 1, &err) == HKID_OK);
  CHECK(err >= 1e-5);
  CHECK(hkid_gradcheck(0, 1, 0, &err) == HKID_ERR_INVALID_ARGUMENT);
}
