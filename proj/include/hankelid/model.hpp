#pragma once

// Domain types and the deterministic constructions shared by every estimator:
// output stacking, the FIR regressor, the block Hankel matrix of the Markov
// parameters, the Hankel selection operator and the Hankel weightings.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace hankelid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Paired input/output samples. Row t of `u` (resp. `y`) is the sample at
/// time t+1.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Matrix u, Matrix y);

  const Matrix& u() const { return u_; }
  const Matrix& y() const { return y_; }
  Index samples() const { return u_.rows(); }
  Index inputs() const { return u_.cols(); }
  Index outputs() const { return y_.cols(); }

  /// First `count` samples.
  Dataset head(Index count) const;

 private:
  Matrix u_;
  Matrix y_;
};

/// FIR impulse response of a p x m system with T lags, stored in the stacking
/// order [h11; h12; ...; h1m; ...; hp1; ...; hpm], h_ij = [h_ij(1) ... h_ij(T)].
class ImpulseResponse {
 public:
  ImpulseResponse() = default;
  ImpulseResponse(Index lags, Index outputs, Index inputs);
  ImpulseResponse(Vector stacked, Index lags, Index outputs, Index inputs);

  /// Builds from Markov parameters markov[k-1] = h(k) (each p x m).
  static ImpulseResponse from_markov(const std::vector<Matrix>& markov);

  Index lags() const { return lags_; }
  Index outputs() const { return outputs_; }
  Index inputs() const { return inputs_; }

  const Vector& stacked() const { return h_; }
  Vector& stacked() { return h_; }

  /// Position of h_ij(k) in the stacked vector; i, j zero-based, k one-based.
  Index offset(Index i, Index j, Index k) const {
    return (i * inputs_ + j) * lags_ + (k - 1);
  }
  double coeff(Index i, Index j, Index k) const { return h_[offset(i, j, k)]; }
  double& coeff(Index i, Index j, Index k) { return h_[offset(i, j, k)]; }

  /// Markov parameter h(k) as a p x m matrix, k one-based.
  Matrix markov(Index k) const;
  std::vector<Matrix> markov_sequence() const;

  /// Channel h_ij as a length-T vector.
  Vector channel(Index i, Index j) const { return h_.segment((i * inputs_ + j) * lags_, lags_); }

 private:
  Vector h_;
  Index lags_ = 0;
  Index outputs_ = 0;
  Index inputs_ = 0;
};

struct HankelDims {
  Index block_rows = 0;  // r
  Index block_cols = 0;  // c
  Index lags = 0;        // T = r + c - 1
};

enum class WeightMode { identity, empirical };

/// Weights of the normalized Hankel matrix W2^T H W1^T.
struct WeightPair {
  Matrix w1;  // mc x mc
  Matrix w2;  // pr x pr
  WeightMode mode = WeightMode::identity;
};

/// Stacked outputs [y_1(1..N) | ... | y_p(1..N)].
Vector stack_outputs(const Dataset& data);
Matrix unstack_outputs(const Vector& stacked, Index samples, Index outputs);

/// Single-output regressor phi (N x Tm); row t holds u_i(t-1) ... u_i(t-T) for
/// each input i, with zero inputs before the first sample.
Matrix build_phi(const Matrix& u, Index lags);

/// Full regressor Phi = blkdiag(phi, ..., phi) with p blocks (Np x Tmp).
Matrix build_regressor(const Dataset& data, Index lags);

/// Direct convolution sum_k h(k) u(t-k) with zero pre-window; N x p.
Matrix simulate_fir(const ImpulseResponse& h, const Matrix& u);

/// Hankel block sizes closest to square with r + c - 1 = T.
HankelDims hankel_dims(Index lags, Index outputs, Index inputs);

/// Block Hankel matrix (pr x mc) whose block (i, j) is h(i + j - 1).
Matrix build_hankel(const ImpulseResponse& h, const HankelDims& dims);

/// Selection operator with vec(H(h)^T) = P h. Row q of P has its single unit
/// entry at column `source(q)`.
class HankelPermutation {
 public:
  HankelPermutation(Index lags, Index outputs, Index inputs, const HankelDims& dims);

  Index rows() const { return static_cast<Index>(source_.size()); }
  Index cols() const { return lags_ * outputs_ * inputs_; }
  const HankelDims& dims() const { return dims_; }
  Index outputs() const { return outputs_; }
  Index inputs() const { return inputs_; }
  Index source(Index row) const { return source_[static_cast<std::size_t>(row)]; }

  /// P h as a vector of length (pr)(mc).
  Vector apply(const Vector& h) const;
  /// P^T v.
  Vector adjoint(const Vector& v) const;
  /// H(h) (pr x mc) from the stacked coefficients.
  Matrix hankel(const Vector& h) const;
  /// P^T vec(X^T) for a pr x mc matrix X.
  Vector adjoint_hankel(const Matrix& x) const;
  /// Diagonal of P^T P: multiplicity of each coefficient in H(h).
  Vector multiplicity() const;

  Eigen::SparseMatrix<double> sparse() const;

 private:
  HankelDims dims_;
  Index lags_;
  Index outputs_;
  Index inputs_;
  std::vector<Index> source_;
};

/// Identity weights, or weights estimated from windowed sample covariances.
WeightPair build_weights(const Dataset& data, const HankelDims& dims, WeightMode mode);
WeightPair identity_weights(const HankelDims& dims, Index outputs, Index inputs);

/// Weighted Hankel matrix W2^T H(h) W1^T.
Matrix weighted_hankel(const ImpulseResponse& h, const HankelDims& dims, const WeightPair& w);

/// CSV with header `t,u1..um,y1..yp`.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv_file(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace hankelid
