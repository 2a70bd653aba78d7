#include "hankelid/metrics.hpp"

#include "hankelid/error.hpp"

#include <cmath>

namespace hankelid {

double cod(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("cod needs two series of equal length >= 2");
  const double den = (a.array() - a.mean()).square().sum();
  if (!(den > 0.0)) throw InvalidArgument("cod: reference series is constant");
  return 100.0 * (1.0 - std::sqrt((a - b).squaredNorm() / den));
}

namespace {

Vector padded(const Vector& x, Index horizon) {
  Vector out = Vector::Zero(horizon);
  const Index n = std::min(horizon, x.size());
  out.head(n) = x.head(n);
  return out;
}

}  // namespace

double fit_metric(const ImpulseResponse& truth, const ImpulseResponse& estimate, Index horizon) {
  if (truth.outputs() != estimate.outputs() || truth.inputs() != estimate.inputs())
    throw InvalidArgument("fit_metric: channel dimensions differ");
  if (horizon < 2) throw InvalidArgument("fit_metric: horizon must be >= 2");
  double total = 0.0;
  for (Index i = 0; i < truth.outputs(); ++i)
    for (Index j = 0; j < truth.inputs(); ++j)
      total += cod(padded(truth.channel(i, j), horizon), padded(estimate.channel(i, j), horizon));
  return total / static_cast<double>(truth.outputs() * truth.inputs());
}

double fit_metric(const StateSpace& truth, const ImpulseResponse& estimate, Index horizon) {
  return fit_metric(truth.impulse_response(horizon), estimate, horizon);
}

Vector normalized_singular_values(const ImpulseResponse& h, const HankelDims& dims, const WeightPair& weights) {
  const Matrix ht = weighted_hankel(h, dims, weights);
  Vector s = Eigen::BDCSVD<Matrix>(ht).singularValues();
  if (s.size() > 0 && s[0] > 0.0) s /= s[0];
  return s;
}

SvErrors sv_errors(const ImpulseResponse& truth, const ImpulseResponse& estimate, const HankelDims& dims,
                   const WeightPair& weights, Index order) {
  const Vector st = normalized_singular_values(truth, dims, weights);
  if (order < 0 || order > st.size()) throw InvalidArgument("sv_errors: order exceeds the Hankel rank bound");
  if (st.size() == 0 || st[0] == 0.0) throw InvalidArgument("sv_errors: true Hankel matrix is zero");
  const Vector se = normalized_singular_values(estimate, dims, weights);
  SvErrors out;
  if (se.size() == 0 || se[0] == 0.0) {
    out.degenerate = true;
    out.signal = st.head(order).sum();
    return out;
  }
  out.signal = (st.head(order) - se.head(order)).cwiseAbs().sum();
  out.noise = se.tail(se.size() - order).sum();
  return out;
}

Vector prediction_cod(const ImpulseResponse& estimate, const Matrix& u, const Matrix& reference) {
  if (reference.rows() != u.rows() || reference.cols() != estimate.outputs())
    throw InvalidArgument("prediction_cod: dimension mismatch");
  const Matrix yhat = simulate_fir(estimate, u);
  Vector out(reference.cols());
  for (Index i = 0; i < reference.cols(); ++i) out[i] = cod(reference.col(i), yhat.col(i));
  return out;
}

}  // namespace hankelid
