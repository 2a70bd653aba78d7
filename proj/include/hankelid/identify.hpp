#pragma once

// Iterative stable-Hankel identification: spline hyper-parameters once, then
// alternate posterior mean, signal/noise subspace refinement and marginal
// likelihood re-optimization of lambda, growing the signal dimension n while
// the likelihood keeps improving by more than the resolution epsilon.

#include "hankelid/bayes.hpp"
#include "hankelid/error.hpp"
#include "hankelid/kernels.hpp"
#include "hankelid/model.hpp"
#include "hankelid/sgp.hpp"

#include <memory>
#include <string>
#include <vector>

namespace hankelid {

struct SplineFitOptions {
  int decay_points = 20;      // log-spaced in 1 - beta
  double decay_lo = 0.5;
  double decay_hi = 0.99;
  double scale_lo = 1e-4;
  double scale_hi = 1e4;
  double scale_rel_tol = 1e-3;
};

/// Maximizes the spline-only marginal likelihood (lambda = [1, 0, 0]) over
/// (c, beta): grid over beta, golden-section profile over log c.
SplineHyper fit_spline_hyperparams(const RegressionStats& stats, const NoiseModel& noise,
                                   const SplineFitOptions& options = {});

/// Eigendecomposition of H~(h) H~(h)^T, eigenvalues descending, each column
/// with its first nonzero entry positive, split at `order`.
SubspaceBasis svd_split(const ImpulseResponse& h, const HankelDims& dims, const WeightPair& weights, Index order);

struct IdentConfig {
  Index lags = 50;            // T
  double epsilon = 1e-3;      // likelihood-ratio resolution
  WeightMode weights = WeightMode::identity;
  SplineFitOptions spline;
  SgpParams sgp;
  Index max_order = 0;        // bound on the n sweep; <= 0 means pr
  LambdaVec initial_lambda = LambdaVec::Ones();
  // Also require each accepted step to beat the previously accepted value by
  // the same margin. The literal test compares against the previous lambda
  // under the refreshed basis only, which does not make accepted values monotone.
  bool monotone = true;

  void validate() const;
};

enum class StepKind { initial, same_order, increased_order };

struct IdentStep {
  StepKind kind = StepKind::initial;
  Index order = 0;
  LambdaVec lambda = LambdaVec::Zero();
  double value = 0.0;      // f at the re-optimized lambda
  double baseline = 0.0;   // f at the previous lambda under the same basis
  bool accepted = false;
  int sgp_iterations = 0;
  bool sgp_failed = false;
};

struct IdentResult {
  ImpulseResponse estimate;
  ImpulseResponse spline_only;
  SplineHyper spline;
  LambdaVec lambda = LambdaVec::Zero();
  Index order = 0;
  SubspaceBasis basis;
  NoiseModel noise;
  HankelDims dims;
  std::vector<IdentStep> trace;
  bool complete = false;
  double seconds = 0.0;

  /// f values of the initial fit and of every accepted step, in order.
  std::vector<double> accepted_values() const;
};

/// Carries the partial result of a failed identification.
class IdentificationError : public Error {
 public:
  IdentificationError(const std::string& what, std::shared_ptr<IdentResult> partial)
      : Error(what), partial_(std::move(partial)) {}
  const IdentResult* partial() const { return partial_.get(); }

 private:
  std::shared_ptr<IdentResult> partial_;
};

IdentResult identify(const Dataset& data, const IdentConfig& config);

/// SGP objective view of a marginal-likelihood problem.
SgpObjective marglik_objective(const MarglikProblem& problem);

std::string to_string(StepKind kind);

}  // namespace hankelid
