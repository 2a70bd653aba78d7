#pragma once

#include "hankelid/model.hpp"
#include "hankelid/scenario.hpp"

namespace hankelid {

/// 100 (1 - sqrt(sum (a - b)^2 / sum (a - mean a)^2)).
double cod(const Vector& a, const Vector& b);

/// Mean COD over all channels of the first `horizon` impulse-response samples;
/// both responses are zero-padded beyond their lags.
double fit_metric(const ImpulseResponse& truth, const ImpulseResponse& estimate, Index horizon = 1000);
double fit_metric(const StateSpace& truth, const ImpulseResponse& estimate, Index horizon = 1000);

struct SvErrors {
  double signal = 0.0;
  double noise = 0.0;
  bool degenerate = false;  // the estimate's Hankel matrix is zero
};

/// Errors on the normalized (unit largest) singular values of the weighted
/// Hankel matrices: sum_{i <= order} |s_i(h) - s_i(h^)| and sum_{i > order} s_i(h^).
SvErrors sv_errors(const ImpulseResponse& truth, const ImpulseResponse& estimate, const HankelDims& dims,
                   const WeightPair& weights, Index order);

/// Normalized singular values of W2^T H(h) W1^T, descending.
Vector normalized_singular_values(const ImpulseResponse& h, const HankelDims& dims, const WeightPair& weights);

/// Per-output COD of the FIR prediction against a reference output.
Vector prediction_cod(const ImpulseResponse& estimate, const Matrix& u, const Matrix& reference);

}  // namespace hankelid
