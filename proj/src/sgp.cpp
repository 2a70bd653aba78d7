#include "hankelid/sgp.hpp"

#include "hankelid/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hankelid {

void SgpParams::validate() const {
  if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidArgument("SGP: armijo factor must lie in (0, 1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidArgument("SGP: backtracking factor must lie in (0, 1)");
  if (!(alpha_min > 0.0 && alpha_min < alpha_max)) throw InvalidArgument("SGP: need 0 < alpha_min < alpha_max");
  if (!(scale_min > 0.0 && scale_min < scale_max)) throw InvalidArgument("SGP: need 0 < L_min < L_max");
  if (memory < 1) throw InvalidArgument("SGP: M must be positive");
  if (max_iter < 1) throw InvalidArgument("SGP: max_iter must be >= 1");
  if (!(rel_tol > 0.0)) throw InvalidArgument("SGP: rel_tol must be positive");
  if (max_backtracks < 1) throw InvalidArgument("SGP: max_backtracks must be >= 1");
  if (!(tau0 > 0.0) || bb2_window < 1) throw InvalidArgument("SGP: invalid BB alternation constants");
}

Vec3 project_positive(const Vec3& x) { return x.cwiseMax(0.0); }

Vec3 scaling_matrix(const Vec3& lambda, const Vec3& negative, const SgpParams& params) {
  Vec3 d;
  for (int i = 0; i < 3; ++i) {
    const double ratio = negative[i] > 0.0 ? lambda[i] / negative[i] : std::numeric_limits<double>::infinity();
    d[i] = std::min(std::max(params.scale_min, ratio), params.scale_max);
  }
  return d;
}

BbSteplength::BbSteplength(const SgpParams& params) : params_(params), tau_(params.tau0) {}

double BbSteplength::initial() const { return std::clamp(1.0, params_.alpha_min, params_.alpha_max); }

double BbSteplength::next(const Vec3& s, const Vec3& z, const Vec3& scaling) {
  const Vec3 s_over_d = s.cwiseQuotient(scaling);
  const double curvature1 = s_over_d.dot(z);
  if (!(curvature1 > 0.0) || !std::isfinite(curvature1)) return params_.alpha_max;

  auto clip = [&](double a) {
    if (!std::isfinite(a) || a <= 0.0) return params_.alpha_max;
    return std::clamp(a, params_.alpha_min, params_.alpha_max);
  };
  const double bb1 = clip(s_over_d.squaredNorm() / curvature1);
  const Vec3 dz = scaling.cwiseProduct(z);
  const double curvature2 = s.cwiseProduct(scaling).dot(z);
  const double bb2 = curvature2 > 0.0 ? clip(curvature2 / dz.squaredNorm()) : params_.alpha_max;

  bb2_recent_.push_back(bb2);
  if (static_cast<int>(bb2_recent_.size()) > params_.bb2_window) bb2_recent_.erase(bb2_recent_.begin());

  if (bb2 / bb1 <= tau_) {
    tau_ *= 0.9;
    return *std::min_element(bb2_recent_.begin(), bb2_recent_.end());
  }
  tau_ *= 1.1;
  return bb1;
}

namespace {

double safe_value(const SgpObjective& objective, const Vec3& x) {
  try {
    const double v = objective.value(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

template <typename Scaling, typename Step>
SgpResult run_projected(const SgpObjective& objective, const Vec3& start, const SgpParams& params,
                        Scaling&& scaling_of, Step&& step_of) {
  params.validate();
  if (!start.allFinite() || (start.array() < 0.0).any()) throw InvalidArgument("SGP: start must be >= 0");

  SgpResult res;
  Vec3 lambda = start;
  SplitGradient cur = objective.evaluate(lambda);
  if (!std::isfinite(cur.value)) throw InvalidArgument("SGP: objective not finite at the starting point");
  res.history.push_back(cur.value);

  Vec3 prev_lambda = lambda;
  Vec3 prev_grad = cur.gradient;
  res.reason = SgpStop::max_iterations;

  for (int k = 0; k < params.max_iter; ++k) {
    const Vec3 d = scaling_of(lambda, cur);
    const double alpha = step_of(k, lambda - prev_lambda, cur.gradient - prev_grad, d);
    const Vec3 direction = project_positive(lambda - alpha * d.cwiseProduct(cur.gradient)) - lambda;
    const double slope = cur.gradient.dot(direction);
    res.directional.push_back(slope);

    double delta = 1.0;
    double trial = safe_value(objective, lambda + direction);
    int backtracks = 0;
    while (!(trial <= cur.value + params.armijo * delta * slope)) {
      if (++backtracks > params.max_backtracks) break;
      delta *= params.backtrack;
      trial = safe_value(objective, lambda + delta * direction);
    }
    if (backtracks > params.max_backtracks) {
      res.reason = SgpStop::line_search_exhausted;
      res.converged = true;
      break;
    }

    const Vec3 next = project_positive(lambda + delta * direction);
    SplitGradient nxt = objective.evaluate(next);
    // Keep the Armijo-checked value so the history is exactly monotone.
    nxt.value = std::min(trial, cur.value);
    res.history.push_back(nxt.value);
    ++res.iterations;

    prev_lambda = lambda;
    prev_grad = cur.gradient;
    const double decrease = cur.value - nxt.value;
    const bool moved = (next - lambda).cwiseAbs().maxCoeff() > 0.0;
    lambda = next;
    cur = nxt;

    if (decrease < params.rel_tol * std::abs(nxt.value)) {
      res.reason = SgpStop::relative_decrease;
      res.converged = true;
      break;
    }
    if (!moved) {
      res.reason = SgpStop::stationary;
      res.converged = true;
      break;
    }
  }
  res.lambda = lambda;
  res.value = cur.value;
  return res;
}

}  // namespace

SgpResult sgp_minimize(const SgpObjective& objective, const Vec3& start, const SgpParams& params) {
  BbSteplength bb(params);
  return run_projected(
      objective, start, params,
      [&](const Vec3& lambda, const SplitGradient& g) { return scaling_matrix(lambda, g.negative, params); },
      [&](int k, const Vec3& s, const Vec3& z, const Vec3& d) { return k == 0 ? bb.initial() : bb.next(s, z, d); });
}

SgpResult projected_gradient_minimize(const SgpObjective& objective, const Vec3& start, double step,
                                      const SgpParams& params) {
  if (!(step > 0.0)) throw InvalidArgument("projected gradient: step must be positive");
  return run_projected(
      objective, start, params, [](const Vec3&, const SplitGradient&) { return Vec3::Ones().eval(); },
      [step](int, const Vec3&, const Vec3&, const Vec3&) { return step; });
}

std::string to_string(SgpStop reason) {
  switch (reason) {
    case SgpStop::relative_decrease: return "relative_decrease";
    case SgpStop::max_iterations: return "max_iterations";
    case SgpStop::stationary: return "stationary";
    case SgpStop::line_search_exhausted: return "line_search_exhausted";
  }
  return "unknown";
}

}  // namespace hankelid
