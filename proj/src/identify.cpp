#include "hankelid/identify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace hankelid {

namespace {

double spline_value_or_inf(const RegressionStats& stats, const NoiseModel& noise, const SplineHyper& hp) {
  try {
    const double v = spline_neg_log_marglik(stats, noise, hp);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const NotPositiveDefinite&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

SplineHyper fit_spline_hyperparams(const RegressionStats& stats, const NoiseModel& noise,
                                   const SplineFitOptions& options) {
  if (options.decay_points < 1 || !(options.decay_lo > 0.0 && options.decay_hi < 1.0 && options.decay_lo <= options.decay_hi))
    throw InvalidArgument("invalid spline decay grid");
  if (!(options.scale_lo > 0.0 && options.scale_lo < options.scale_hi))
    throw InvalidArgument("invalid spline scale bounds");

  const double gap_hi = 1.0 - options.decay_lo;
  const double gap_lo = 1.0 - options.decay_hi;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const double width_tol = std::log1p(options.scale_rel_tol);

  SplineHyper best;
  double best_value = std::numeric_limits<double>::infinity();
  for (int j = 0; j < options.decay_points; ++j) {
    const double frac = options.decay_points == 1 ? 0.0 : static_cast<double>(j) / (options.decay_points - 1);
    const double decay = 1.0 - gap_hi * std::pow(gap_lo / gap_hi, frac);

    auto at = [&](double log_c) { return spline_value_or_inf(stats, noise, SplineHyper{std::exp(log_c), decay}); };
    double a = std::log(options.scale_lo);
    double b = std::log(options.scale_hi);
    double x1 = b - golden * (b - a);
    double x2 = a + golden * (b - a);
    double f1 = at(x1);
    double f2 = at(x2);
    while (b - a > width_tol) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - golden * (b - a);
        f1 = at(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + golden * (b - a);
        f2 = at(x2);
      }
    }
    const double x = f1 <= f2 ? x1 : x2;
    const double fx = std::min(f1, f2);
    if (fx < best_value) {
      best_value = fx;
      best = SplineHyper{std::exp(x), decay};
    }
  }
  if (!std::isfinite(best_value)) throw NotPositiveDefinite("spline marginal likelihood undefined on the whole grid");
  return best;
}

SubspaceBasis svd_split(const ImpulseResponse& h, const HankelDims& dims, const WeightPair& weights, Index order) {
  const Matrix ht = weighted_hankel(h, dims, weights);
  const Index dim = ht.rows();
  if (order < 0 || order > dim) throw InvalidArgument("svd_split: order out of range");
  Matrix gram = ht * ht.transpose();
  gram = 0.5 * (gram + gram.transpose()).eval();
  if (gram.isZero(0.0)) return SubspaceBasis::empty(dim).with_order(order);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw Error("svd_split: eigendecomposition failed");
  std::vector<Index> idx(static_cast<std::size_t>(dim));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return eig.eigenvalues()[a] > eig.eigenvalues()[b]; });

  SubspaceBasis basis;
  basis.u.resize(dim, dim);
  basis.energies.resize(dim);
  for (Index col = 0; col < dim; ++col) {
    const Index src = idx[static_cast<std::size_t>(col)];
    Vector v = eig.eigenvectors().col(src);
    const double tol = 1e-12 * v.cwiseAbs().maxCoeff();
    for (Index i = 0; i < dim; ++i) {
      if (std::abs(v[i]) > tol) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    basis.u.col(col) = v;
    basis.energies[col] = std::max(eig.eigenvalues()[src], 0.0);
  }
  basis.order = order;
  return basis;
}

void IdentConfig::validate() const {
  if (lags < 1) throw InvalidArgument("T must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if ((initial_lambda.array() < 0.0).any() || !initial_lambda.allFinite())
    throw InvalidArgument("initial lambda must be >= 0");
  sgp.validate();
}

std::vector<double> IdentResult::accepted_values() const {
  std::vector<double> out;
  for (const auto& s : trace)
    if (s.kind == StepKind::initial || s.accepted) out.push_back(s.value);
  return out;
}

SgpObjective marglik_objective(const MarglikProblem& problem) {
  SgpObjective obj;
  obj.value = [&problem](const Vec3& lambda) { return problem.value(lambda); };
  obj.evaluate = [&problem](const Vec3& lambda) {
    const MarglikEval e = problem.evaluate(lambda);
    return SplitGradient{e.value, e.gradient, e.positive, e.negative};
  };
  return obj;
}

namespace {

struct Attempt {
  IdentStep step;
  std::unique_ptr<MarglikProblem> problem;
  SubspaceBasis basis;
};

double value_or_inf(const MarglikProblem& pb, const LambdaVec& lambda) {
  try {
    return pb.value(lambda);
  } catch (const NotPositiveDefinite&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

IdentResult identify(const Dataset& data, const IdentConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Index lags = config.lags;
  const Index p = data.outputs();
  const Index m = data.inputs();
  if (data.samples() <= lags * m)
    throw InsufficientData("identification needs N > T*m (N=" + std::to_string(data.samples()) +
                           ", T*m=" + std::to_string(lags * m) + ")");

  auto result = std::make_shared<IdentResult>();
  auto stamp = [&] {
    result->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  try {
    result->noise = estimate_noise_variance(data, lags);
    auto stats = std::make_shared<const RegressionStats>(RegressionStats::from_dataset(data, lags));
    result->dims = hankel_dims(lags, p, m);
    const HankelPermutation perm(lags, p, m, result->dims);
    const WeightPair weights = build_weights(data, result->dims, config.weights);
    const Index pr = p * result->dims.block_rows;
    const Index max_order = config.max_order > 0 ? std::min(config.max_order, pr) : pr;

    result->spline = fit_spline_hyperparams(*stats, result->noise, config.spline);
    result->spline_only = ImpulseResponse(spline_posterior_mean(*stats, result->noise, result->spline), lags, p, m);

    // n = 0: U_0 empty, U_0^perp = I.
    result->basis = SubspaceBasis::empty(pr);
    auto problem = std::make_unique<MarglikProblem>(
        stats, result->noise, make_kernel_system(result->spline, perm, weights, result->basis));
    const SgpResult init = sgp_minimize(marglik_objective(*problem), config.initial_lambda, config.sgp);
    result->lambda = init.lambda;
    result->order = 0;
    IdentStep first;
    first.kind = StepKind::initial;
    first.lambda = init.lambda;
    first.value = init.value;
    first.baseline = init.history.front();
    first.accepted = true;
    first.sgp_iterations = init.iterations;
    result->trace.push_back(first);

    const double threshold = 2.0 * std::log1p(config.epsilon);
    double last_accepted = init.value;
    auto attempt = [&](const SubspaceBasis& full, Index order, StepKind kind) {
      Attempt a;
      a.basis = full.with_order(order);
      a.problem = std::make_unique<MarglikProblem>(stats, result->noise,
                                                   make_kernel_system(result->spline, perm, weights, a.basis));
      a.step.kind = kind;
      a.step.order = order;
      a.step.baseline = value_or_inf(*a.problem, result->lambda);
      try {
        const SgpResult r = sgp_minimize(marglik_objective(*a.problem), result->lambda, config.sgp);
        a.step.lambda = r.lambda;
        a.step.value = r.value;
        a.step.sgp_iterations = r.iterations;
        a.step.accepted = a.step.baseline - r.value > threshold &&
                          (!config.monotone || last_accepted - r.value > threshold);
      } catch (const Error&) {
        a.step.lambda = result->lambda;
        a.step.value = std::numeric_limits<double>::infinity();
        a.step.sgp_failed = true;
        a.step.accepted = false;
      }
      return a;
    };
    auto adopt = [&](Attempt& a) {
      last_accepted = a.step.value;
      result->lambda = a.step.lambda;
      result->order = a.step.order;
      result->basis = a.basis;
      problem = std::move(a.problem);
    };

    while (result->order < max_order) {
      const ImpulseResponse current(problem->posterior_mean(result->lambda), lags, p, m);
      const SubspaceBasis full = svd_split(current, result->dims, weights, result->order);

      Attempt same = attempt(full, result->order, StepKind::same_order);
      result->trace.push_back(same.step);
      if (same.step.accepted) {
        adopt(same);
        continue;
      }
      Attempt grown = attempt(full, result->order + 1, StepKind::increased_order);
      result->trace.push_back(grown.step);
      if (grown.step.accepted) {
        adopt(grown);
        continue;
      }
      break;
    }

    result->basis = result->basis.with_order(result->order);
    result->estimate = ImpulseResponse(problem->posterior_mean(result->lambda), lags, p, m);
    result->complete = true;
    stamp();
    return std::move(*result);
  } catch (const IdentificationError&) {
    throw;
  } catch (const Error& e) {
    stamp();
    throw IdentificationError(e.what(), result);
  }
}

std::string to_string(StepKind kind) {
  switch (kind) {
    case StepKind::initial: return "initial";
    case StepKind::same_order: return "same_order";
    case StepKind::increased_order: return "increased_order";
  }
  return "unknown";
}

}  // namespace hankelid
