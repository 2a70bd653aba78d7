#pragma once

// Random small marginal-likelihood problems and a finite-difference check of
// the analytic gradient.

#include "hankelid/bayes.hpp"

#include <cstdint>
#include <memory>

namespace hankelid {

struct MarglikInstance {
  Dataset data;
  HankelDims dims;
  WeightPair weights;
  std::unique_ptr<HankelPermutation> perm;
  std::unique_ptr<MarglikProblem> problem;
  LambdaVec lambda;  // a random interior point
};

/// p, m in {1, 2}, T in 2..8, N in (Tm, 30], random spline hyper-parameters,
/// random orthonormal basis with random split and random weight mode.
MarglikInstance random_marglik_instance(std::uint64_t seed);

struct GradcheckReport {
  int instances = 0;
  double max_relative_error = 0.0;
  bool nonnegative_split = true;  // B >= 0 and V >= 0 on every instance
};

/// Central differences with step 1e-5 * max(lambda_i, 1e-2); relative error
/// ||g - g_fd|| / max(||g||, ||g_fd||). `corrupt` perturbs the analytic
/// gradient (negative control).
GradcheckReport run_gradcheck(int instances, std::uint64_t seed, bool corrupt = false);

}  // namespace hankelid
