#pragma once

// Empirical-Bayes machinery for the linear model Y = Phi h + E: posterior
// mean, negative log marginal likelihood and its split gradient. All Np-sized
// quantities are rewritten via the matrix inversion lemma into Tmp-sized
// Cholesky solves; Phi is never formed.

#include "hankelid/kernels.hpp"
#include "hankelid/model.hpp"

#include <memory>

namespace hankelid {

/// Per-output noise variances; Sigma~ = diag(sigma) kron I_N.
struct NoiseModel {
  Vector variances;
};

/// Sufficient statistics of the regression: phi^T phi, phi^T y_i and y_i^T y_i.
struct RegressionStats {
  Index samples = 0;
  Index lags = 0;
  Index inputs = 0;
  Index outputs = 0;
  Matrix phi_gram;    // Tm x Tm
  Matrix phi_cross;   // Tm x p, column i = phi^T y_i
  Vector output_energy;  // p, y_i^T y_i

  static RegressionStats from_dataset(const Dataset& data, Index lags);
  /// From an explicit single-output regressor (N x Tm) and outputs (N x p).
  static RegressionStats from_phi(const Matrix& phi, const Matrix& y, Index lags, Index inputs);

  Index dim() const { return lags * inputs * outputs; }
};

/// Ridge least-squares FIR fit of length T; sigma_i = RSS_i / (N - Tm).
NoiseModel estimate_noise_variance(const Dataset& data, Index lags);

struct MarglikEval {
  double value = 0.0;
  LambdaVec gradient = LambdaVec::Zero();
  LambdaVec positive = LambdaVec::Zero();  // B: gradient of Y^T Lambda^-1 Y, >= 0
  LambdaVec negative = LambdaVec::Zero();  // V: minus gradient of log|Lambda|, >= 0
  Vector posterior_mean;
};

/// Objective f(lambda) = Y^T Lambda^-1 Y + log|Lambda| with
/// Lambda = Sigma~ + Phi (lambda0 G0 + lambda1 G1 + lambda2 G2)^-1 Phi^T.
class MarglikProblem {
 public:
  MarglikProblem(std::shared_ptr<const RegressionStats> stats, NoiseModel noise, KernelSystem kernels);

  const RegressionStats& stats() const { return *stats_; }
  const NoiseModel& noise() const { return noise_; }
  const KernelSystem& kernels() const { return kernels_; }
  void set_kernels(KernelSystem kernels);

  double value(const LambdaVec& lambda) const;
  MarglikEval evaluate(const LambdaVec& lambda) const;
  Vector posterior_mean(const LambdaVec& lambda) const;

  /// Phi^T Sigma~^-1 Phi (block diagonal, dense).
  Matrix data_precision() const;
  /// Phi^T Sigma~^-1 Y.
  Vector data_cross() const;
  double weighted_output_energy() const;
  double log_det_noise() const;

 private:
  std::shared_ptr<const RegressionStats> stats_;
  NoiseModel noise_;
  KernelSystem kernels_;
  Matrix data_precision_;
  Vector data_cross_;
};

/// Spline-only objective (lambda = [1, 0, 0]) for hyper-parameters `hp`,
/// evaluated output by output: with a block-diagonal spline prior the problem
/// decouples across outputs.
double spline_neg_log_marglik(const RegressionStats& stats, const NoiseModel& noise, const SplineHyper& hp);

/// Posterior mean under the spline-only prior, output by output.
Vector spline_posterior_mean(const RegressionStats& stats, const NoiseModel& noise, const SplineHyper& hp);

}  // namespace hankelid
