#include "hankelid/report.hpp"

#include <json.hpp>

#include <cstdio>

namespace hankelid {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> to_std(const Eigen::Ref<const Vector>& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string impulse_csv(const ImpulseResponse& h) {
  std::string out = "i,j,k,value\n";
  for (Index i = 0; i < h.outputs(); ++i)
    for (Index j = 0; j < h.inputs(); ++j)
      for (Index k = 1; k <= h.lags(); ++k)
        out += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," + std::to_string(k) + "," +
               fmt(h.coeff(i, j, k)) + "\n";
  return out;
}

std::string ident_trace_json(const IdentResult& r) {
  using nlohmann::json;
  json j;
  j["complete"] = r.complete;
  j["order"] = r.order;
  j["lambda"] = to_std(r.lambda);
  j["spline"] = {{"scale", r.spline.scale}, {"decay", r.spline.decay}};
  j["noise_variance"] = to_std(r.noise.variances);
  j["hankel"] = {{"block_rows", r.dims.block_rows}, {"block_cols", r.dims.block_cols}, {"lags", r.dims.lags}};
  j["seconds"] = r.seconds;
  json steps = json::array();
  for (const auto& s : r.trace) {
    steps.push_back({{"kind", to_string(s.kind)},
                     {"order", s.order},
                     {"lambda", to_std(s.lambda)},
                     {"value", s.value},
                     {"baseline", s.baseline},
                     {"accepted", s.accepted},
                     {"sgp_iterations", s.sgp_iterations},
                     {"sgp_failed", s.sgp_failed}});
  }
  j["trace"] = steps;
  return j.dump(2) + "\n";
}

std::string ident_summary(const IdentResult& r) {
  std::string out;
  out += std::string("status: ") + (r.complete ? "complete" : "partial") + "\n";
  out += "order: " + std::to_string(r.order) + "\n";
  out += "lambda: " + fmt(r.lambda[0]) + " " + fmt(r.lambda[1]) + " " + fmt(r.lambda[2]) + "\n";
  out += "spline scale: " + fmt(r.spline.scale) + "\n";
  out += "spline decay: " + fmt(r.spline.decay) + "\n";
  out += "noise variance:";
  for (Index i = 0; i < r.noise.variances.size(); ++i) out += " " + fmt(r.noise.variances[i]);
  out += "\n";
  out += "steps: " + std::to_string(r.trace.size()) + "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", r.seconds);
  out += std::string("seconds: ") + buf + "\n";
  return out;
}

}  // namespace hankelid
