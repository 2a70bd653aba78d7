#pragma once

// Comparison estimators: stable-spline-only empirical Bayes (SS) and the
// nuclear-norm-regularized FIR with cross-validated weight (NN+CV).

#include "hankelid/bayes.hpp"
#include "hankelid/kernels.hpp"
#include "hankelid/model.hpp"

#include <functional>
#include <vector>

namespace hankelid {

struct SsResult {
  ImpulseResponse estimate;
  SplineHyper spline;
  NoiseModel noise;
};

/// Posterior mean under the TC prior with marginal-likelihood (c, beta).
SsResult ss_estimate(const Dataset& data, Index lags);

/// Singular-value soft thresholding: U diag(max(s - level, 0)) V^T.
Matrix singular_value_threshold(const Matrix& x, double level);

double nuclear_norm(const Matrix& x);

struct AdmmOptions {
  double rho = 1.0;  // relative to tr(2 Phi^T Phi) / tr(coupling)
  double tol = 1e-6;
  int max_iter = 2000;
  bool record_objective = false;
};

struct AdmmResult {
  ImpulseResponse estimate;
  Matrix z;     // split variable, ~ H(h) (or H~(h))
  Matrix dual;  // scaled dual U; rho U / reg is a nuclear-norm subgradient at z
  double rho = 0.0;  // effective penalty
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<double> objective;  // per iteration, when recorded
};

/// argmin ||Y - Phi h||^2 + reg ||H(h)||_* (or ||W2^T H(h) W1^T||_* when
/// `weights` is given) by ADMM on the split Z = H(h).
AdmmResult nn_admm(const RegressionStats& stats, double reg, const HankelPermutation& perm,
                   const WeightPair* weights = nullptr, const AdmmOptions& options = {},
                   const Vector* warm_start = nullptr);

/// ||Y - Phi h||^2 from the sufficient statistics.
double residual_energy(const RegressionStats& stats, const Vector& h);

struct CvGrid {
  std::vector<double> candidates;
  double train_fraction = 0.5;

  void validate() const;
};

/// candidates = v / n_train with v log-spaced on [lo, hi], `count` points.
CvGrid make_cv_grid(double lo, double hi, int count, Index n_train, double train_fraction);

struct CvResult {
  double best = 0.0;
  Index best_index = 0;
  std::vector<double> scores;
  ImpulseResponse estimate;
};

using RegularizedEstimator = std::function<ImpulseResponse(const Dataset& train, double reg)>;

/// Contiguous split: fit on the leading samples, score ||Y_val - Phi_val h||^2
/// on the rest (regressors use the true past inputs), ties toward the smaller
/// candidate, then refit on all data.
CvResult cross_validate(const Dataset& data, Index lags, const CvGrid& grid, const RegularizedEstimator& estimator);

/// NN+CV with warm-started ADMM across the (sorted) grid.
CvResult nn_cv_estimate(const Dataset& data, Index lags, const CvGrid& grid, bool use_weighted,
                        WeightMode weight_mode = WeightMode::empirical, const AdmmOptions& options = {});

}  // namespace hankelid
