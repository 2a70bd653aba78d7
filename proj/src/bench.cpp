#include "hankelid/bench.hpp"

#include "hankelid/error.hpp"
#include "hankelid/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace hankelid {

std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::sh: return "SH";
    case EstimatorTag::ss: return "SS";
    case EstimatorTag::nn: return "NN";
    case EstimatorTag::nnw: return "NNW";
  }
  return "?";
}

std::string valid_estimator_tags() { return "SH, SS, NN, NNW"; }

std::vector<EstimatorTag> parse_estimators(const std::string& list) {
  std::vector<EstimatorTag> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "SH") out.push_back(EstimatorTag::sh);
    else if (item == "SS") out.push_back(EstimatorTag::ss);
    else if (item == "NN") out.push_back(EstimatorTag::nn);
    else if (item == "NNW") out.push_back(EstimatorTag::nnw);
    else throw InvalidArgument("unknown estimator '" + item + "' (valid: " + valid_estimator_tags() + ")");
  }
  if (out.empty()) throw InvalidArgument("no estimators given (valid: " + valid_estimator_tags() + ")");
  return out;
}

BenchConfig BenchConfig::preset(ScenarioTag tag, Index samples, std::uint64_t seed, int runs) {
  BenchConfig c;
  c.scenario = ScenarioSpec::preset(tag, samples, seed);
  c.runs = runs;
  c.ident.lags = c.scenario.lags;
  if (tag != ScenarioTag::s1) {
    c.cv.lo = 1e3;
    c.cv.train_fraction = 2.0 / 3.0;
  }
  return c;
}

void BenchConfig::validate() const {
  scenario.validate();
  if (runs < 1) throw InvalidArgument("runs must be >= 1");
  if (estimators.empty()) throw InvalidArgument("no estimators given (valid: " + valid_estimator_tags() + ")");
  if (!(cv.lo > 0.0 && cv.hi >= cv.lo) || cv.count < 1) throw InvalidArgument("invalid CV grid");
  if (!(cv.train_fraction > 0.0 && cv.train_fraction < 1.0)) throw InvalidArgument("CV train fraction must lie in (0, 1)");
  if (horizon < 2) throw InvalidArgument("FIT horizon must be >= 2");
  IdentConfig id = ident;
  id.lags = scenario.lags;
  id.validate();
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<RunRecord> run_single(const BenchConfig& config, int run) {
  ScenarioSpec spec = config.scenario;
  spec.seed = derive_seed(config.scenario.seed, static_cast<std::uint64_t>(run));
  const Scenario sc = generate_scenario(spec);
  const Dataset& data = sc.estimation;
  const Index lags = spec.lags;
  const HankelDims dims = hankel_dims(lags, data.outputs(), data.inputs());
  const WeightPair unit = identity_weights(dims, data.outputs(), data.inputs());
  const ImpulseResponse truth_window = sc.system.impulse_response(lags);
  const ImpulseResponse truth_long = sc.system.impulse_response(config.horizon);

  IdentConfig ident = config.ident;
  ident.lags = lags;

  // SS is the spline-only stage of SH; reuse it when both run.
  std::unique_ptr<ImpulseResponse> spline_only;

  std::vector<RunRecord> records;
  for (EstimatorTag tag : config.estimators) {
    RunRecord rec;
    rec.run = run;
    rec.seed = spec.seed;
    rec.estimator = tag;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ImpulseResponse est;
      switch (tag) {
        case EstimatorTag::sh: {
          const IdentResult r = identify(data, ident);
          est = r.estimate;
          rec.order = r.order;
          spline_only = std::make_unique<ImpulseResponse>(r.spline_only);
          break;
        }
        case EstimatorTag::ss:
          est = spline_only ? *spline_only : ss_estimate(data, lags).estimate;
          break;
        case EstimatorTag::nn:
        case EstimatorTag::nnw: {
          const Index n_train =
              static_cast<Index>(std::floor(config.cv.train_fraction * static_cast<double>(data.samples())));
          const CvGrid grid = make_cv_grid(config.cv.lo, config.cv.hi, config.cv.count, n_train, config.cv.train_fraction);
          est = nn_cv_estimate(data, lags, grid, tag == EstimatorTag::nnw, WeightMode::empirical, config.admm).estimate;
          break;
        }
      }
      rec.fit = fit_metric(truth_long, est, config.horizon);
      if (sc.validation_clean.rows() > 0) rec.cod = prediction_cod(est, sc.validation_input, sc.validation_clean);
      const SvErrors sv = sv_errors(truth_window, est, dims, unit, std::min(sc.system.order(), unit.w2.rows()));
      rec.dsignal = sv.signal;
      rec.dnoise = sv.noise;
      rec.sv_degenerate = sv.degenerate;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

std::vector<std::string> metric_names(const BenchConfig& config) {
  std::vector<std::string> names{"fit"};
  if (config.scenario.validation_samples > 0)
    for (Index i = 0; i < config.scenario.outputs; ++i) names.push_back("cod_y" + std::to_string(i + 1));
  names.push_back("dsignal");
  names.push_back("dnoise");
  return names;
}

double metric_value(const RunRecord& r, const std::string& name) {
  if (name == "fit") return r.fit;
  if (name == "dsignal") return r.dsignal;
  if (name == "dnoise") return r.dnoise;
  const Index i = std::stol(name.substr(5)) - 1;
  return r.cod[i];
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

MonteCarloReport run_monte_carlo(const BenchConfig& config) {
  config.validate();
  MonteCarloReport report;
  report.config = config;
  const auto runs = static_cast<std::size_t>(config.runs);
  std::vector<std::vector<RunRecord>> per_run(runs);

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, static_cast<unsigned>(runs));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t r = next++; r < runs; r = next++) per_run[r] = run_single(config, static_cast<int>(r));
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (auto& recs : per_run)
    for (auto& r : recs) report.records.push_back(std::move(r));

  for (const std::string& metric : metric_names(config)) {
    // Each run emits one record per estimator slot, in order.
    const std::size_t slots = config.estimators.size();
    for (std::size_t slot = 0; slot < slots; ++slot) {
      Aggregate a;
      a.estimator = config.estimators[slot];
      a.metric = metric;
      std::vector<double> values;
      for (std::size_t k = slot; k < report.records.size(); k += slots) {
        const RunRecord& r = report.records[k];
        if (r.ok) values.push_back(metric_value(r, metric));
        else ++a.failures;
      }
      a.count = static_cast<int>(values.size());
      if (!values.empty()) {
        a.median = percentile(values, 0.5);
        a.p5 = percentile(values, 0.05);
        a.p95 = percentile(values, 0.95);
      } else {
        a.median = a.p5 = a.p95 = std::nan("");
      }
      report.aggregates.push_back(a);
    }
  }
  return report;
}

std::string aggregate_csv(const MonteCarloReport& report) {
  std::string out = "estimator,metric,median,p5,p95,count,failures\n";
  for (const auto& a : report.aggregates)
    out += to_string(a.estimator) + "," + a.metric + "," + fmt(a.median) + "," + fmt(a.p5) + "," + fmt(a.p95) + "," +
           std::to_string(a.count) + "," + std::to_string(a.failures) + "\n";
  return out;
}

std::string fit_distribution_csv(const MonteCarloReport& report) {
  std::string out = "run,estimator,fit\n";
  for (const auto& r : report.records)
    if (r.ok) out += std::to_string(r.run) + "," + to_string(r.estimator) + "," + fmt(r.fit) + "\n";
  return out;
}

std::string report_json(const MonteCarloReport& report) {
  using nlohmann::json;
  const BenchConfig& c = report.config;
  json j;
  j["scenario"] = {{"tag", to_string(c.scenario.tag)},
                   {"samples", c.scenario.samples},
                   {"outputs", c.scenario.outputs},
                   {"inputs", c.scenario.inputs},
                   {"input", c.scenario.input == InputKind::white ? "white" : "lowpass"},
                   {"snr", {c.scenario.snr_lo, c.scenario.snr_hi}},
                   {"band", {c.scenario.band_lo, c.scenario.band_hi}},
                   {"lags", c.scenario.lags},
                   {"seed", c.scenario.seed}};
  j["runs"] = c.runs;
  json ests = json::array();
  for (auto t : c.estimators) ests.push_back(to_string(t));
  j["estimators"] = ests;
  json recs = json::array();
  for (const auto& r : report.records) {
    json x = {{"run", r.run}, {"seed", r.seed}, {"estimator", to_string(r.estimator)}, {"ok", r.ok},
              {"seconds", r.seconds}};
    if (r.ok) {
      x["fit"] = r.fit;
      x["cod"] = std::vector<double>(r.cod.data(), r.cod.data() + r.cod.size());
      x["dsignal"] = r.dsignal;
      x["dnoise"] = r.dnoise;
      x["sv_degenerate"] = r.sv_degenerate;
      if (r.order >= 0) x["order"] = r.order;
    } else {
      x["error"] = r.error;
    }
    recs.push_back(x);
  }
  j["records"] = recs;
  json aggs = json::array();
  for (const auto& a : report.aggregates) {
    json x = {{"estimator", to_string(a.estimator)}, {"metric", a.metric}, {"count", a.count},
              {"failures", a.failures}};
    if (a.count > 0) {
      x["median"] = a.median;
      x["p5"] = a.p5;
      x["p95"] = a.p95;
    }
    aggs.push_back(x);
  }
  j["aggregates"] = aggs;
  return j.dump(2) + "\n";
}

}  // namespace hankelid
