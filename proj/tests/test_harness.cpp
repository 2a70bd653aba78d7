#include <doctest.h>

#include "hankelid/bench.hpp"
#include "hankelid/error.hpp"
#include "hankelid/metrics.hpp"
#include "hankelid/report.hpp"
#include "hankelid/scenario.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace hankelid;

namespace {

double variance(const Vector& x) { return (x.array() - x.mean()).square().sum() / static_cast<double>(x.size()); }

// Welch estimate (Hann window, no overlap) of the power at DFT bin frequencies
// f = k / len, k = 0..len/2.
Vector welch(const Vector& x, Index len) {
  Vector psd = Vector::Zero(len / 2 + 1);
  const Index segments = x.size() / len;
  for (Index s = 0; s < segments; ++s)
    for (Index k = 0; k <= len / 2; ++k) {
      std::complex<double> acc = 0.0;
      for (Index t = 0; t < len; ++t) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * t / len);
        acc += w * x[s * len + t] * std::polar(1.0, -2.0 * std::numbers::pi * k * t / len);
      }
      psd[k] += std::norm(acc);
    }
  return psd / static_cast<double>(segments);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("S1 system") {
  const StateSpace s = s1_system();
  CHECK(s.order() == 4);
  CHECK(s.inputs() == 1);
  CHECK(s.outputs() == 3);
  const Matrix cb = s.c * s.b;
  CHECK(cb(0, 0) == 3.0);
  CHECK(cb(1, 0) == 0.0);
  CHECK(cb(2, 0) == 25.0);
  CHECK(s.impulse_response(5).markov(1) == cb);

  Vector moduli = Eigen::EigenSolver<Matrix>(s.a).eigenvalues().cwiseAbs();
  std::sort(moduli.data(), moduli.data() + moduli.size());
  CHECK(moduli[0] == doctest::Approx(std::sqrt(0.85)).epsilon(1e-12));
  CHECK(moduli[2] == doctest::Approx(std::sqrt(0.89)).epsilon(1e-12));
  CHECK(std::abs(moduli[3] - 0.943) < 5e-4);
  CHECK(std::abs(moduli[0] - 0.922) < 5e-4);

  const Scenario a = gen_scenario_s1(5, 300);
  const Scenario b = gen_scenario_s1(5, 300);
  CHECK(a.estimation.u() == b.estimation.u());
  CHECK(a.estimation.y() == b.estimation.y());
  CHECK(a.validation_clean == b.validation_clean);
  CHECK(a.band >= 0.8);
  CHECK(a.band <= 1.0);
  CHECK(gen_scenario_s1(6, 300).estimation.y() != a.estimation.y());
  for (Index i = 0; i < 3; ++i) {
    CHECK(a.snr[i] >= 1.0);
    CHECK(a.snr[i] <= 4.0);
  }
}

TEST_CASE("realized SNR matches the drawn target") {
  for (ScenarioTag tag : {ScenarioTag::s1, ScenarioTag::s2, ScenarioTag::s3}) {
    const Scenario sc = generate_scenario(ScenarioSpec::preset(tag, 400, 17));
    for (Index i = 0; i < sc.estimation.outputs(); ++i) {
      const Vector clean = sc.estimation_clean.col(i);
      const Vector noise = sc.estimation.y().col(i) - clean;
      CHECK(std::abs(variance(clean) / variance(noise) / sc.snr[i] - 1.0) < 0.01);
    }
  }
}

TEST_CASE("random systems") {
  std::vector<int> counts(11, 0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const StateSpace s = gen_random_system(2, 3, 10, 0.85, seed);
    ++counts[static_cast<std::size_t>(s.order())];
    if (seed < 100) {
      CHECK(s.spectral_radius() <= 0.85 + 1e-12);
      const ImpulseResponse h = s.impulse_response(50);
      CHECK(h.markov(50).norm() < h.markov(1).norm());
      CHECK(s.outputs() == 2);
      CHECK(s.inputs() == 3);
    }
  }
  CHECK(counts[0] == 0);
  double chi2 = 0.0;
  for (int k = 1; k <= 10; ++k) chi2 += (counts[k] - 100.0) * (counts[k] - 100.0) / 100.0;
  // 99th percentile of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 21.666);

  const StateSpace x = gen_random_system(1, 1, 6, 0.85, 3);
  const StateSpace y = gen_random_system(1, 1, 6, 0.85, 3);
  CHECK(x.a == y.a);
  CHECK(x.c == y.c);
}

TEST_CASE("Hankel rank equals the system order") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const StateSpace s = gen_random_system(2, 2, 6, 0.85, 50 + seed);
    const HankelDims dims = hankel_dims(50, 2, 2);
    const Vector sv = normalized_singular_values(s.impulse_response(50), dims, identity_weights(dims, 2, 2));
    CHECK(sv[0] == 1.0);
    if (s.order() < sv.size()) CHECK(sv[s.order()] < 1e-6);
  }
}

TEST_CASE("low-pass input") {
  CHECK(lowpass_taps(1.0).size() == 65);
  CHECK(lowpass_taps(0.5).sum() == doctest::Approx(1.0).epsilon(1e-12));
  // Band 1: near all-pass, so white noise keeps its variance.
  CHECK(std::abs(lowpass_taps(1.0).squaredNorm() - 1.0) < 0.05);
  const Matrix full = lowpass_input(1.0, 4000, 2, 3);
  CHECK(full.rows() == 4000);
  CHECK(std::abs(variance(full.col(0)) - 1.0) < 0.05);
  CHECK(lowpass_input(1.0, 100, 1, 3) == lowpass_input(1.0, 100, 1, 3));

  const Index n = 1 << 14, len = 256;
  const Vector x = lowpass_input(0.5, n, 1, 4).col(0);
  const Vector psd = welch(x, len);
  double pass = 0.0, stop = 0.0;
  int np = 0, ns = 0;
  for (Index k = 0; k <= len / 2; ++k) {
    const double f = 2.0 * static_cast<double>(k) / len;  // fraction of Nyquist
    if (f <= 0.4) pass += psd[k], ++np;
    if (f >= 0.6) stop += psd[k], ++ns;
  }
  CHECK(10.0 * std::log10((pass / np) / (stop / ns)) >= 20.0);
}

TEST_CASE("cod") {
  const Vector a = (Vector(3) << 1, 2, 3).finished();
  CHECK(cod(a, (Vector(3) << 1, 2, 4).finished()) == doctest::Approx(100.0 * (1.0 - std::sqrt(0.5))));
  CHECK(std::abs(cod(a, (Vector(3) << 1, 2, 4).finished()) - 29.2893) < 1e-4);
  CHECK(cod(a, a) == 100.0);
  CHECK(cod(a, Vector::Constant(3, 2.0)) == 0.0);
  CHECK_THROWS_AS(cod(Vector::Ones(3), a), InvalidArgument);
  CHECK_THROWS_AS(cod(Vector::Ones(1), Vector::Ones(1)), InvalidArgument);
}

TEST_CASE("fit metric") {
  const ImpulseResponse h((Vector(8) << 1, 0.5, 0.25, 0, -1, 0.3, 0.1, 0).finished(), 4, 2, 1);
  CHECK(fit_metric(h, h) == 100.0);

  const ImpulseResponse zero(4, 2, 1);
  double expect = 0.0;
  for (Index i = 0; i < 2; ++i) {
    const Vector ch = (Vector(1000) << h.stacked().segment(i * 4, 4), Vector::Zero(996)).finished();
    expect += 100.0 * (1.0 - std::sqrt(ch.squaredNorm() / (ch.array() - ch.mean()).square().sum()));
  }
  CHECK(fit_metric(h, zero) == doctest::Approx(expect / 2.0).epsilon(1e-14));

  const ImpulseResponse one((Vector(3) << 1, 2, 3).finished(), 3, 1, 1);
  const ImpulseResponse est((Vector(3) << 1, 2, 4).finished(), 3, 1, 1);
  const Vector a = (Vector(1000) << 1, 2, 3, Vector::Zero(997)).finished();
  const Vector b = (Vector(1000) << 1, 2, 4, Vector::Zero(997)).finished();
  CHECK(fit_metric(one, est) == cod(a, b));

  // State-space truth: extended beyond T by its own realization.
  const StateSpace s = s1_system();
  CHECK(fit_metric(s, s.impulse_response(200)) > 99.999);
}

TEST_CASE("singular value errors") {
  const HankelDims dims = hankel_dims(3, 1, 1);
  const WeightPair id = identity_weights(dims, 1, 1);
  const ImpulseResponse ones((Vector(3) << 1, 1, 1).finished(), 3, 1, 1);
  const ImpulseResponse est((Vector(3) << 2, 1, 0).finished(), 3, 1, 1);
  // H(ones) has singular values (2, 0); H(est) = [[2,1],[1,0]] has 1 +- sqrt 2.
  const double ratio = (std::sqrt(2.0) - 1.0) / (std::sqrt(2.0) + 1.0);
  const SvErrors e1 = sv_errors(ones, est, dims, id, 1);
  CHECK(e1.signal == doctest::Approx(0.0));
  CHECK(e1.noise == doctest::Approx(ratio).epsilon(1e-12));
  const SvErrors e2 = sv_errors(ones, est, dims, id, 2);
  CHECK(e2.signal == doctest::Approx(ratio).epsilon(1e-12));
  CHECK(e2.noise == 0.0);

  const SvErrors same = sv_errors(ones, ones, dims, id, 1);
  CHECK(same.signal == 0.0);
  CHECK(same.noise == 0.0);

  const SvErrors zero = sv_errors(ones, ImpulseResponse(3, 1, 1), dims, id, 1);
  CHECK(zero.degenerate);
  CHECK(zero.signal == 1.0);
  CHECK(zero.noise == 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  StateSpace s;
  s.a = (Matrix(2, 2) << 0.6, 0.3, -0.3, 0.6).finished();
  s.b = (Matrix(2, 1) << 1, 0.5).finished();
  s.c = (Matrix(1, 2) << 1, -1).finished();
  const HankelDims big = hankel_dims(20, 1, 1);
  Vector noisy(20);
  for (Index k = 0; k < 20; ++k) noisy[k] = n01(rng);
  const SvErrors e3 = sv_errors(s.impulse_response(20), ImpulseResponse(noisy, 20, 1, 1), big,
                                identity_weights(big, 1, 1), 2);
  CHECK(e3.noise > 0.0);
}

TEST_CASE("percentiles") {
  CHECK(percentile({4, 1, 3, 2}, 0.5) == 2.5);
  CHECK(percentile({4, 1, 3, 2}, 0.05) == doctest::Approx(1.15));
  CHECK(percentile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(percentile({7}, 0.05) == 7.0);
  CHECK(percentile({7}, 0.95) == 7.0);
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 10; ++m)
    for (std::uint64_t s = 0; s < 5; ++s) seen.insert(derive_seed(m, s));
  CHECK(seen.size() == 50);
}

TEST_CASE("Monte Carlo aggregation") {
  BenchConfig cfg = BenchConfig::preset(ScenarioTag::s1, 300, 9, 1);
  cfg.estimators = {EstimatorTag::ss, EstimatorTag::ss};
  cfg.threads = 1;
  const MonteCarloReport rep = run_monte_carlo(cfg);
  REQUIRE(rep.records.size() == 2);
  CHECK(rep.records[0].fit == rep.records[1].fit);
  CHECK(rep.records[0].cod == rep.records[1].cod);
  // fit, cod_y1..3, dsignal, dnoise for two estimators.
  REQUIRE(rep.aggregates.size() == 12);
  for (std::size_t k = 0; k < rep.aggregates.size(); k += 2) {
    const Aggregate& a = rep.aggregates[k];
    const Aggregate& b = rep.aggregates[k + 1];
    CHECK(a.metric == b.metric);
    CHECK(a.median == b.median);
    CHECK(a.p5 == a.median);
    CHECK(a.p95 == a.median);
    CHECK(a.count == 1);
  }
  CHECK(rep.aggregates[0].metric == "fit");
  CHECK(rep.aggregates[2].metric == "cod_y1");
  CHECK(rep.aggregates[10].metric == "dnoise");

  const std::vector<std::string> csv = lines(aggregate_csv(rep));
  CHECK(csv.front() == "estimator,metric,median,p5,p95,count,failures");
  CHECK(csv.size() == 13);
  CHECK(aggregate_csv(rep) == aggregate_csv(run_monte_carlo(cfg)));

  const auto js = nlohmann::json::parse(report_json(rep));
  CHECK(js["records"].size() == 2);
  CHECK(lines(fit_distribution_csv(rep)).size() == 3);
}

TEST_CASE("Monte Carlo with SH and SS") {
  BenchConfig cfg = BenchConfig::preset(ScenarioTag::s1, 300, 10, 2);
  cfg.threads = 1;
  const MonteCarloReport rep = run_monte_carlo(cfg);
  CHECK(rep.records.size() == 4);
  for (const RunRecord& r : rep.records) {
    CHECK(r.ok);
    CHECK(r.cod.size() == 3);
    CHECK((r.cod.array() <= 100.0).all());
    CHECK(r.dnoise >= 0.0);
  }
  CHECK(rep.records[0].estimator == EstimatorTag::sh);
  CHECK(rep.records[0].order >= 0);
  for (const std::string metric : {"fit", "cod_y1", "cod_y2", "cod_y3", "dsignal", "dnoise"}) {
    int rows = 0;
    for (const Aggregate& a : rep.aggregates) rows += a.metric == metric;
    CHECK(rows == 2);
  }
}

TEST_CASE("estimator tags") {
  CHECK(parse_estimators("SH,SS,NN,NNW").size() == 4);
  CHECK_THROWS_AS(parse_estimators("SH,FOO"), InvalidArgument);
  CHECK(valid_estimator_tags().find("NNW") != std::string::npos);
}

TEST_CASE("identification reports") {
  const ImpulseResponse h((Vector(4) << 1, 2, 3, 4).finished(), 2, 2, 1);
  const std::vector<std::string> csv = lines(impulse_csv(h));
  CHECK(csv.front() == "i,j,k,value");
  CHECK(csv.size() == 5);
  CHECK(csv[1] == "1,1,1,1");
  CHECK(csv[4] == "2,1,2,4");
}
