#include "hankelid/kernels.hpp"

#include "hankelid/error.hpp"

#include <cmath>

namespace hankelid {

SubspaceBasis SubspaceBasis::empty(Index dim) {
  SubspaceBasis b;
  b.u = Matrix::Identity(dim, dim);
  b.energies = Vector::Zero(dim);
  b.order = 0;
  return b;
}

SubspaceBasis SubspaceBasis::with_order(Index n) const {
  if (n < 0 || n > dim()) throw InvalidArgument("subspace order out of range");
  SubspaceBasis b = *this;
  b.order = n;
  return b;
}

Matrix tc_kernel(const SplineHyper& hp, Index lags) {
  if (lags < 1) throw InvalidArgument("FIR length T must be positive");
  Matrix k(lags, lags);
  for (Index a = 0; a < lags; ++a)
    for (Index b = 0; b < lags; ++b)
      k(a, b) = hp.scale * std::min(std::pow(hp.decay, a + 1), std::pow(hp.decay, b + 1));
  return k;
}

namespace {

void check_invertible(const SplineHyper& hp) {
  if (!(hp.scale > 0.0) || !std::isfinite(hp.scale)) throw InvalidArgument("spline scale c must be positive");
  if (!(hp.decay > 0.0 && hp.decay < 1.0)) throw InvalidArgument("spline decay beta must lie in (0, 1)");
}

// Variances of the increments h(k) - h(k+1), k < T, and of h(T): the TC prior
// is the law of a reversed random walk with these innovations.
Vector increment_variances(const SplineHyper& hp, Index lags) {
  Vector d(lags);
  for (Index k = 1; k < lags; ++k) d[k - 1] = hp.scale * std::pow(hp.decay, k) * (1.0 - hp.decay);
  d[lags - 1] = hp.scale * std::pow(hp.decay, lags);
  return d;
}

}  // namespace

Matrix tc_precision(const SplineHyper& hp, Index lags) {
  check_invertible(hp);
  if (lags < 1) throw InvalidArgument("FIR length T must be positive");
  const Vector d = increment_variances(hp, lags);
  Matrix g = Matrix::Zero(lags, lags);
  for (Index k = 0; k < lags - 1; ++k) {
    const double a = 1.0 / d[k];
    g(k, k) += a;
    g(k + 1, k + 1) += a;
    g(k, k + 1) -= a;
    g(k + 1, k) -= a;
  }
  g(lags - 1, lags - 1) += 1.0 / d[lags - 1];
  return g;
}

double tc_log_det(const SplineHyper& hp, Index lags) {
  check_invertible(hp);
  return increment_variances(hp, lags).array().log().sum();
}

Matrix spline_precision(const SplineHyper& hp, Index lags, Index outputs, Index inputs) {
  const Matrix block = tc_precision(hp, lags);
  const Index channels = outputs * inputs;
  Matrix g = Matrix::Zero(channels * lags, channels * lags);
  for (Index ch = 0; ch < channels; ++ch) g.block(ch * lags, ch * lags, lags, lags) = block;
  return g;
}

Matrix q_matrix(const SubspaceBasis& basis, double lambda1, double lambda2) {
  Matrix q = lambda1 * basis.signal() * basis.signal().transpose() +
             lambda2 * basis.noise() * basis.noise().transpose();
  return 0.5 * (q + q.transpose());
}

Matrix kron_projection(const HankelPermutation& perm, const Matrix& a, const Matrix& b) {
  const HankelDims& dims = perm.dims();
  const Index p = perm.outputs();
  const Index m = perm.inputs();
  const Index r = dims.block_rows;
  const Index c = dims.block_cols;
  const Index lags = dims.lags;
  if (a.rows() != p * r || a.cols() != p * r || b.rows() != m * c || b.cols() != m * c)
    throw InvalidArgument("kron_projection: dimension mismatch");

  const bool b_identity = b.isIdentity(0.0);
  Matrix g = Matrix::Zero(perm.cols(), perm.cols());
  auto src = [&](Index bi, Index bj, Index i, Index j) { return (i * m + j) * lags + bi + bj; };

  for (Index bi = 0; bi < r; ++bi) {
    for (Index i = 0; i < p; ++i) {
      for (Index bi2 = 0; bi2 < r; ++bi2) {
        for (Index i2 = 0; i2 < p; ++i2) {
          const double av = a(bi * p + i, bi2 * p + i2);
          if (av == 0.0) continue;
          if (b_identity) {
            for (Index bj = 0; bj < c; ++bj)
              for (Index j = 0; j < m; ++j) g(src(bi, bj, i, j), src(bi2, bj, i2, j)) += av;
            continue;
          }
          for (Index bj = 0; bj < c; ++bj)
            for (Index j = 0; j < m; ++j) {
              const Index row = src(bi, bj, i, j);
              const Index brow = bj * m + j;
              for (Index bj2 = 0; bj2 < c; ++bj2)
                for (Index j2 = 0; j2 < m; ++j2) g(row, src(bi2, bj2, i2, j2)) += av * b(brow, bj2 * m + j2);
            }
        }
      }
    }
  }
  return g;
}

HankelPrecisions hankel_precisions(const HankelPermutation& perm, const WeightPair& weights,
                                   const SubspaceBasis& basis) {
  const Index pr = perm.outputs() * perm.dims().block_rows;
  if (basis.dim() != pr || weights.w2.rows() != pr) throw InvalidArgument("hankel_precisions: dimension mismatch");
  Matrix w1tw1 = weights.w1.transpose() * weights.w1;
  w1tw1 = 0.5 * (w1tw1 + w1tw1.transpose()).eval();
  if (weights.mode == WeightMode::identity) w1tw1.setIdentity();

  auto projected = [&](const Matrix& block) {
    if (block.cols() == 0) return Matrix::Zero(perm.cols(), perm.cols()).eval();
    const Matrix wb = weights.w2 * block;
    Matrix a = wb * wb.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    return kron_projection(perm, a, w1tw1);
  };
  return HankelPrecisions{projected(basis.signal()), projected(basis.noise())};
}

KernelSystem make_kernel_system(const SplineHyper& hp, const HankelPermutation& perm, const WeightPair& weights,
                                const SubspaceBasis& basis) {
  KernelSystem ks;
  ks.gamma0 = spline_precision(hp, perm.dims().lags, perm.outputs(), perm.inputs());
  auto hk = hankel_precisions(perm, weights, basis);
  ks.gamma1 = std::move(hk.gamma1);
  ks.gamma2 = std::move(hk.gamma2);
  ks.spline = hp;
  ks.basis = basis;
  return ks;
}

void validate_lambda(const LambdaVec& lambda) {
  for (int i = 0; i < 3; ++i)
    if (!std::isfinite(lambda[i]) || lambda[i] < 0.0) throw InvalidArgument("lambda components must be finite and >= 0");
}

Matrix combined_precision(const KernelSystem& ks, const LambdaVec& lambda) {
  validate_lambda(lambda);
  Matrix g = lambda[0] * ks.gamma0;
  if (lambda[1] != 0.0) g += lambda[1] * ks.gamma1;
  if (lambda[2] != 0.0) g += lambda[2] * ks.gamma2;
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("combined precision is not positive definite");
  return g;
}

}  // namespace hankelid
