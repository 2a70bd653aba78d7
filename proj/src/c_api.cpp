#include "hankelid/hankelid.h"

#include "hankelid/bench.hpp"
#include "hankelid/error.hpp"
#include "hankelid/gradcheck.hpp"
#include "hankelid/identify.hpp"
#include "hankelid/io.hpp"
#include "hankelid/report.hpp"

#include <memory>
#include <new>
#include <sstream>
#include <string>

struct hkid_dataset {
  hankelid::Dataset data;
};

struct hkid_result {
  hankelid::IdentResult result;
  std::string summary;
};

struct hkid_bench {
  hankelid::MonteCarloReport report;
};

namespace {

thread_local std::string last_error;

hkid_status fail(hkid_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class F>
hkid_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const hankelid::IdentificationError& e) {
    return fail(HKID_ERR_NUMERICAL, e.what());
  } catch (const hankelid::InvalidArgument& e) {
    return fail(HKID_ERR_INVALID_ARGUMENT, e.what());
  } catch (const hankelid::InsufficientData& e) {
    return fail(HKID_ERR_INSUFFICIENT_DATA, e.what());
  } catch (const hankelid::NotPositiveDefinite& e) {
    return fail(HKID_ERR_NUMERICAL, e.what());
  } catch (const hankelid::ParseError& e) {
    return fail(HKID_ERR_PARSE, e.what());
  } catch (const hankelid::IoError& e) {
    return fail(HKID_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HKID_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HKID_ERR_INTERNAL, e.what());
  }
}

#define HKID_REQUIRE(cond, msg) \
  if (!(cond)) return fail(HKID_ERR_INVALID_ARGUMENT, msg)

hankelid::WeightMode weight_mode(hkid_weights w) {
  if (w == HKID_WEIGHTS_IDENTITY) return hankelid::WeightMode::identity;
  if (w == HKID_WEIGHTS_EMPIRICAL) return hankelid::WeightMode::empirical;
  throw hankelid::InvalidArgument("unknown weight mode");
}

hankelid::IdentConfig ident_config(const hkid_identify_options& o) {
  hankelid::IdentConfig c;
  c.lags = o.lags;
  c.epsilon = o.epsilon;
  c.weights = weight_mode(o.weights);
  c.max_order = o.max_order;
  c.sgp.armijo = o.sgp_armijo;
  c.sgp.backtrack = o.sgp_backtrack;
  c.sgp.rel_tol = o.sgp_rel_tol;
  c.sgp.max_iter = o.sgp_max_iter;
  c.monotone = o.literal_acceptance == 0;
  c.validate();
  return c;
}

hankelid::ScenarioSpec scenario_spec(const hkid_scenario_options& o) {
  if (!o.scenario) throw hankelid::InvalidArgument("scenario tag is required");
  const hankelid::ScenarioTag tag = hankelid::parse_scenario_tag(o.scenario);
  hankelid::ScenarioSpec s =
      hankelid::ScenarioSpec::preset(tag, o.samples > 0 ? static_cast<hankelid::Index>(o.samples) : 500, o.seed);
  if (o.white_input) s.input = hankelid::InputKind::white;
  if (o.snr_lo > 0.0) s.snr_lo = o.snr_lo;
  if (o.snr_hi > 0.0) s.snr_hi = o.snr_hi;
  s.validate();
  return s;
}

}  // namespace

extern "C" {

const char* hkid_last_error(void) { return last_error.c_str(); }

const char* hkid_status_string(hkid_status status) {
  switch (status) {
    case HKID_OK: return "ok";
    case HKID_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HKID_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case HKID_ERR_NUMERICAL: return "numerical failure";
    case HKID_ERR_PARSE: return "parse error";
    case HKID_ERR_IO: return "I/O error";
    case HKID_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

hkid_status hkid_dataset_create(size_t samples, size_t inputs, size_t outputs, const double* u, const double* y,
                                hkid_dataset** out) {
  HKID_REQUIRE(out && u && y, "null argument");
  return guarded([&] {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto n = static_cast<hankelid::Index>(samples);
    hankelid::Matrix um = Eigen::Map<const RowMajor>(u, n, static_cast<hankelid::Index>(inputs));
    hankelid::Matrix ym = Eigen::Map<const RowMajor>(y, n, static_cast<hankelid::Index>(outputs));
    *out = new hkid_dataset{hankelid::Dataset(std::move(um), std::move(ym))};
    return HKID_OK;
  });
}

hkid_status hkid_dataset_load_csv(const char* path, hkid_dataset** out) {
  HKID_REQUIRE(path && out, "null argument");
  return guarded([&] {
    *out = new hkid_dataset{hankelid::read_dataset_csv_file(path)};
    return HKID_OK;
  });
}

hkid_status hkid_dataset_save_csv(const hkid_dataset* data, const char* path) {
  HKID_REQUIRE(data && path, "null argument");
  return guarded([&] {
    std::ostringstream os;
    hankelid::write_dataset_csv(os, data->data);
    hankelid::write_file_atomic(path, os.str());
    return HKID_OK;
  });
}

hkid_status hkid_dataset_dims(const hkid_dataset* data, size_t* samples, size_t* inputs, size_t* outputs) {
  HKID_REQUIRE(data, "null dataset");
  if (samples) *samples = static_cast<size_t>(data->data.samples());
  if (inputs) *inputs = static_cast<size_t>(data->data.inputs());
  if (outputs) *outputs = static_cast<size_t>(data->data.outputs());
  return HKID_OK;
}

void hkid_dataset_free(hkid_dataset* data) { delete data; }

void hkid_identify_options_default(hkid_identify_options* o) {
  if (!o) return;
  const hankelid::IdentConfig c;
  o->lags = static_cast<int>(c.lags);
  o->epsilon = c.epsilon;
  o->weights = HKID_WEIGHTS_IDENTITY;
  o->max_order = 0;
  o->sgp_armijo = c.sgp.armijo;
  o->sgp_backtrack = c.sgp.backtrack;
  o->sgp_rel_tol = c.sgp.rel_tol;
  o->sgp_max_iter = c.sgp.max_iter;
  o->literal_acceptance = c.monotone ? 0 : 1;
}

hkid_status hkid_identify(const hkid_dataset* data, const hkid_identify_options* options, hkid_result** out) {
  HKID_REQUIRE(data && out, "null argument");
  *out = nullptr;
  hkid_identify_options defaults;
  hkid_identify_options_default(&defaults);
  const hkid_identify_options& o = options ? *options : defaults;
  return guarded([&] {
    const hankelid::IdentConfig cfg = ident_config(o);
    try {
      auto r = std::make_unique<hkid_result>();
      r->result = hankelid::identify(data->data, cfg);
      r->summary = hankelid::ident_summary(r->result);
      *out = r.release();
      return HKID_OK;
    } catch (const hankelid::IdentificationError& e) {
      if (e.partial()) {
        auto r = std::make_unique<hkid_result>();
        r->result = *e.partial();
        r->summary = hankelid::ident_summary(r->result);
        *out = r.release();
      }
      throw;
    }
  });
}

int hkid_result_complete(const hkid_result* r) { return r && r->result.complete ? 1 : 0; }

hkid_status hkid_result_shape(const hkid_result* r, size_t* lags, size_t* outputs, size_t* inputs) {
  HKID_REQUIRE(r, "null result");
  const auto& h = r->result.estimate;
  if (lags) *lags = static_cast<size_t>(h.lags());
  if (outputs) *outputs = static_cast<size_t>(h.outputs());
  if (inputs) *inputs = static_cast<size_t>(h.inputs());
  return HKID_OK;
}

hkid_status hkid_result_coefficients(const hkid_result* r, double* out, size_t len) {
  HKID_REQUIRE(r && out, "null argument");
  const auto& h = r->result.estimate.stacked();
  HKID_REQUIRE(len >= static_cast<size_t>(h.size()), "buffer too small for the impulse response");
  for (hankelid::Index i = 0; i < h.size(); ++i) out[i] = h[i];
  return HKID_OK;
}

size_t hkid_result_order(const hkid_result* r) { return r ? static_cast<size_t>(r->result.order) : 0; }

hkid_status hkid_result_lambda(const hkid_result* r, double out[3]) {
  HKID_REQUIRE(r && out, "null argument");
  for (int i = 0; i < 3; ++i) out[i] = r->result.lambda[i];
  return HKID_OK;
}

hkid_status hkid_result_spline(const hkid_result* r, double* scale, double* decay) {
  HKID_REQUIRE(r, "null result");
  if (scale) *scale = r->result.spline.scale;
  if (decay) *decay = r->result.spline.decay;
  return HKID_OK;
}

hkid_status hkid_result_noise(const hkid_result* r, double* out, size_t len) {
  HKID_REQUIRE(r && out, "null argument");
  const auto& v = r->result.noise.variances;
  HKID_REQUIRE(len >= static_cast<size_t>(v.size()), "buffer too small for the noise variances");
  for (hankelid::Index i = 0; i < v.size(); ++i) out[i] = v[i];
  return HKID_OK;
}

double hkid_result_seconds(const hkid_result* r) { return r ? r->result.seconds : 0.0; }

hkid_status hkid_result_write_impulse_csv(const hkid_result* r, const char* path) {
  HKID_REQUIRE(r && path, "null argument");
  return guarded([&] {
    hankelid::write_file_atomic(path, hankelid::impulse_csv(r->result.estimate));
    return HKID_OK;
  });
}

hkid_status hkid_result_write_trace_json(const hkid_result* r, const char* path) {
  HKID_REQUIRE(r && path, "null argument");
  return guarded([&] {
    hankelid::write_file_atomic(path, hankelid::ident_trace_json(r->result));
    return HKID_OK;
  });
}

hkid_status hkid_result_write_summary(const hkid_result* r, const char* path) {
  HKID_REQUIRE(r && path, "null argument");
  return guarded([&] {
    hankelid::write_file_atomic(path, r->summary);
    return HKID_OK;
  });
}

const char* hkid_result_summary(const hkid_result* r) { return r ? r->summary.c_str() : ""; }

void hkid_result_free(hkid_result* r) { delete r; }

void hkid_scenario_options_default(hkid_scenario_options* o) {
  if (!o) return;
  o->scenario = "S1";
  o->samples = 500;
  o->seed = 1;
  o->white_input = 0;
  o->snr_lo = 0.0;
  o->snr_hi = 0.0;
}

hkid_status hkid_simulate(const hkid_scenario_options* options, hkid_dataset** out) {
  HKID_REQUIRE(options && out, "null argument");
  return guarded([&] {
    hankelid::ScenarioSpec spec = scenario_spec(*options);
    spec.validation_samples = 0;
    *out = new hkid_dataset{hankelid::generate_scenario(spec).estimation};
    return HKID_OK;
  });
}

void hkid_bench_options_default(hkid_bench_options* o) {
  if (!o) return;
  hkid_scenario_options_default(&o->scenario);
  o->runs = 20;
  o->estimators = "SH,SS";
  o->lags = 0;
  o->epsilon = hankelid::IdentConfig{}.epsilon;
  o->weights = HKID_WEIGHTS_IDENTITY;
  o->cv_lo = 0.0;
  o->cv_hi = 0.0;
  o->cv_count = 0;
  o->threads = 0;
}

hkid_status hkid_bench_run(const hkid_bench_options* options, hkid_bench** out) {
  HKID_REQUIRE(options && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    const hankelid::ScenarioSpec spec = scenario_spec(options->scenario);
    hankelid::BenchConfig c = hankelid::BenchConfig::preset(spec.tag, spec.samples, spec.seed, options->runs);
    c.scenario = spec;
    if (options->lags > 0) c.scenario.lags = options->lags;
    c.ident.lags = c.scenario.lags;
    c.ident.epsilon = options->epsilon;
    c.ident.weights = weight_mode(options->weights);
    c.estimators = hankelid::parse_estimators(options->estimators ? options->estimators : "");
    if (options->cv_lo > 0.0) c.cv.lo = options->cv_lo;
    if (options->cv_hi > 0.0) c.cv.hi = options->cv_hi;
    if (options->cv_count > 0) c.cv.count = options->cv_count;
    c.threads = options->threads;
    *out = new hkid_bench{hankelid::run_monte_carlo(c)};
    return HKID_OK;
  });
}

hkid_status hkid_bench_write_csv(const hkid_bench* b, const char* path) {
  HKID_REQUIRE(b && path, "null argument");
  return guarded([&] {
    hankelid::write_file_atomic(path, hankelid::aggregate_csv(b->report));
    return HKID_OK;
  });
}

hkid_status hkid_bench_write_json(const hkid_bench* b, const char* path) {
  HKID_REQUIRE(b && path, "null argument");
  return guarded([&] {
    hankelid::write_file_atomic(path, hankelid::report_json(b->report));
    return HKID_OK;
  });
}

hkid_status hkid_bench_write_fit_csv(const hkid_bench* b, const char* path) {
  HKID_REQUIRE(b && path, "null argument");
  return guarded([&] {
    hankelid::write_file_atomic(path, hankelid::fit_distribution_csv(b->report));
    return HKID_OK;
  });
}

void hkid_bench_free(hkid_bench* b) { delete b; }

hkid_status hkid_gradcheck(int instances, uint64_t seed, int corrupt, double* max_relative_error) {
  HKID_REQUIRE(max_relative_error, "null argument");
  HKID_REQUIRE(instances >= 1, "instances must be >= 1");
  return guarded([&] {
    const hankelid::GradcheckReport rep = hankelid::run_gradcheck(instances, seed, corrupt != 0);
    *max_relative_error = rep.nonnegative_split ? rep.max_relative_error : std::numeric_limits<double>::infinity();
    return HKID_OK;
  });
}

}  // extern "C"
