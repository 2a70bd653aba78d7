#pragma once

// Precision matrices of the stable-spline (TC) prior and of the Hankel
// signal/noise subspace prior. Everything is stored as a precision (inverse
// covariance): the Hankel terms are low rank and have no inverse of their own.

#include "hankelid/model.hpp"

#include <Eigen/Dense>

namespace hankelid {

/// First-order stable spline (TC) hyper-parameters, shared by all channels.
struct SplineHyper {
  double scale = 1.0;  // c
  double decay = 0.9;  // beta
};

/// Orthonormal basis of R^{pr} split into a signal block (first `order`
/// columns) and a noise block (the rest). `energies` are the eigenvalues of
/// H~ H~^T in the column order of `u`.
struct SubspaceBasis {
  Matrix u;
  Vector energies;
  Index order = 0;

  /// Basis with an empty signal subspace: U = I, n = 0.
  static SubspaceBasis empty(Index dim);

  Index dim() const { return u.rows(); }
  auto signal() const { return u.leftCols(order); }
  auto noise() const { return u.rightCols(u.cols() - order); }
  /// Same vectors, different split point.
  SubspaceBasis with_order(Index n) const;
};

using LambdaVec = Eigen::Vector3d;

/// Gamma0 (spline), Gamma1 (signal-subspace Hankel), Gamma2 (noise-subspace
/// Hankel) precision components, all Tmp x Tmp.
struct KernelSystem {
  Matrix gamma0;
  Matrix gamma1;
  Matrix gamma2;
  SplineHyper spline;
  SubspaceBasis basis;

  const Matrix& gamma(int i) const { return i == 0 ? gamma0 : (i == 1 ? gamma1 : gamma2); }
};

/// [K]_{kl} = c min(beta^k, beta^l), k, l = 1..T.
Matrix tc_kernel(const SplineHyper& hp, Index lags);

/// Tridiagonal inverse of the TC kernel (dense T x T).
Matrix tc_precision(const SplineHyper& hp, Index lags);

/// log det of the TC kernel, analytic.
double tc_log_det(const SplineHyper& hp, Index lags);

/// Gamma0: blkdiag of tc_precision over the p*m channels.
Matrix spline_precision(const SplineHyper& hp, Index lags, Index outputs, Index inputs);

/// Q(zeta) = lambda1 U_n U_n^T + lambda2 U_n^perp U_n^perp^T.
Matrix q_matrix(const SubspaceBasis& basis, double lambda1, double lambda2);

/// P^T (A kron B) P for A (pr x pr) and B (mc x mc), without forming A kron B.
Matrix kron_projection(const HankelPermutation& perm, const Matrix& a, const Matrix& b);

struct HankelPrecisions {
  Matrix gamma1;
  Matrix gamma2;
};

/// Gamma1 = P^T (W2 U_n U_n^T W2^T kron W1^T W1) P, Gamma2 likewise with U_n^perp.
HankelPrecisions hankel_precisions(const HankelPermutation& perm, const WeightPair& weights,
                                   const SubspaceBasis& basis);

KernelSystem make_kernel_system(const SplineHyper& hp, const HankelPermutation& perm,
                                const WeightPair& weights, const SubspaceBasis& basis);

/// lambda0 Gamma0 + lambda1 Gamma1 + lambda2 Gamma2. Throws NotPositiveDefinite
/// if the result fails a Cholesky factorization.
Matrix combined_precision(const KernelSystem& ks, const LambdaVec& lambda);

/// Throws InvalidArgument unless all components are finite and >= 0.
void validate_lambda(const LambdaVec& lambda);

}  // namespace hankelid
