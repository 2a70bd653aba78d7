#include "hankelid/bayes.hpp"

#include "hankelid/error.hpp"

#include <cmath>
#include <limits>

namespace hankelid {

RegressionStats RegressionStats::from_phi(const Matrix& phi, const Matrix& y, Index lags, Index inputs) {
  if (phi.rows() != y.rows()) throw InvalidArgument("regressor and output sample counts differ");
  if (phi.cols() != lags * inputs) throw InvalidArgument("regressor width must be T*m");
  RegressionStats s;
  s.samples = y.rows();
  s.lags = lags;
  s.inputs = inputs;
  s.outputs = y.cols();
  s.phi_gram = phi.transpose() * phi;
  s.phi_gram = 0.5 * (s.phi_gram + s.phi_gram.transpose()).eval();
  s.phi_cross = phi.transpose() * y;
  s.output_energy = y.colwise().squaredNorm().transpose();
  return s;
}

RegressionStats RegressionStats::from_dataset(const Dataset& data, Index lags) {
  return from_phi(build_phi(data.u(), lags), data.y(), lags, data.inputs());
}

NoiseModel estimate_noise_variance(const Dataset& data, Index lags) {
  const Index n = data.samples();
  const Index width = lags * data.inputs();
  if (n <= width) throw InsufficientData("noise estimate needs N > T*m (N=" + std::to_string(n) +
                                         ", T*m=" + std::to_string(width) + ")");
  const Matrix phi = build_phi(data.u(), lags);
  Matrix gram = phi.transpose() * phi;
  const double tr = gram.trace();
  const double ridge = tr > 0.0 ? 1e-6 * tr / static_cast<double>(width) : 1.0;
  gram.diagonal().array() += ridge;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("ridge FIR normal equations not positive definite");
  const Matrix theta = llt.solve(phi.transpose() * data.y());
  const Matrix resid = data.y() - phi * theta;

  NoiseModel noise;
  noise.variances.resize(data.outputs());
  for (Index i = 0; i < data.outputs(); ++i) {
    const double power = data.y().col(i).squaredNorm() / static_cast<double>(n);
    // Floor keeps Sigma~ invertible on noise-free data; an all-zero channel
    // carries no scale, so any positive value gives the same (zero) estimate.
    const double floor = power > 0.0 ? 1e-12 * power : 1.0;
    noise.variances[i] = std::max(resid.col(i).squaredNorm() / static_cast<double>(n - width), floor);
  }
  return noise;
}

MarglikProblem::MarglikProblem(std::shared_ptr<const RegressionStats> stats, NoiseModel noise, KernelSystem kernels)
    : stats_(std::move(stats)), noise_(std::move(noise)) {
  const RegressionStats& s = *stats_;
  if (noise_.variances.size() != s.outputs) throw InvalidArgument("noise model has wrong number of outputs");
  for (Index i = 0; i < s.outputs; ++i)
    if (!(noise_.variances[i] > 0.0) || !std::isfinite(noise_.variances[i]))
      throw InvalidArgument("noise variances must be positive");

  const Index w = s.lags * s.inputs;
  data_precision_ = Matrix::Zero(s.dim(), s.dim());
  data_cross_.resize(s.dim());
  for (Index i = 0; i < s.outputs; ++i) {
    data_precision_.block(i * w, i * w, w, w) = s.phi_gram / noise_.variances[i];
    data_cross_.segment(i * w, w) = s.phi_cross.col(i) / noise_.variances[i];
  }
  set_kernels(std::move(kernels));
}

void MarglikProblem::set_kernels(KernelSystem kernels) {
  const Index d = stats_->dim();
  if (kernels.gamma0.rows() != d || kernels.gamma1.rows() != d || kernels.gamma2.rows() != d)
    throw InvalidArgument("kernel system dimension does not match regression");
  kernels_ = std::move(kernels);
}

Matrix MarglikProblem::data_precision() const { return data_precision_; }
Vector MarglikProblem::data_cross() const { return data_cross_; }

double MarglikProblem::weighted_output_energy() const {
  return (stats_->output_energy.array() / noise_.variances.array()).sum();
}

double MarglikProblem::log_det_noise() const {
  return static_cast<double>(stats_->samples) * noise_.variances.array().log().sum();
}

namespace {

double log_det_from_llt(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::LLT<Matrix> factor_or_throw(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(std::string(what) + " is not positive definite");
  const auto diag = llt.matrixLLT().diagonal();
  if (!(diag.array() > 0.0).all() || !diag.allFinite())
    throw NotPositiveDefinite(std::string(what) + " is numerically singular");
  return llt;
}

Matrix prior_precision(const KernelSystem& ks, const LambdaVec& lambda) {
  validate_lambda(lambda);
  Matrix g = lambda[0] * ks.gamma0;
  if (lambda[1] != 0.0) g += lambda[1] * ks.gamma1;
  if (lambda[2] != 0.0) g += lambda[2] * ks.gamma2;
  return g;
}

}  // namespace

double MarglikProblem::value(const LambdaVec& lambda) const {
  const Matrix g = prior_precision(kernels_, lambda);
  const auto g_llt = factor_or_throw(g, "prior precision");
  const auto m_llt = factor_or_throw(g + data_precision_, "posterior precision");
  const Vector h = m_llt.solve(data_cross_);
  return weighted_output_energy() - data_cross_.dot(h) + log_det_from_llt(m_llt) - log_det_from_llt(g_llt) +
         log_det_noise();
}

MarglikEval MarglikProblem::evaluate(const LambdaVec& lambda) const {
  const Matrix g = prior_precision(kernels_, lambda);
  const auto g_llt = factor_or_throw(g, "prior precision");
  const auto m_llt = factor_or_throw(g + data_precision_, "posterior precision");

  MarglikEval out;
  out.posterior_mean = m_llt.solve(data_cross_);
  out.value = weighted_output_energy() - data_cross_.dot(out.posterior_mean) + log_det_from_llt(m_llt) -
              log_det_from_llt(g_llt) + log_det_noise();

  // Phi^T Lambda^-1 Y = G h and K Phi^T Lambda^-1 Phi K = G^-1 - M^-1, so
  // B_i = h^T Gamma_i h and V_i = Tr(Gamma_i (G^-1 - M^-1)).
  const Index d = g.rows();
  const Matrix eye = Matrix::Identity(d, d);
  const Matrix diff = g_llt.solve(eye) - m_llt.solve(eye);
  for (int i = 0; i < 3; ++i) {
    const Matrix& gamma = kernels_.gamma(i);
    out.positive[i] = out.posterior_mean.dot(gamma * out.posterior_mean);
    out.negative[i] = gamma.cwiseProduct(diff).sum();
  }
  out.positive = out.positive.cwiseMax(0.0);
  out.negative = out.negative.cwiseMax(0.0);
  out.gradient = out.positive - out.negative;
  return out;
}

Vector MarglikProblem::posterior_mean(const LambdaVec& lambda) const {
  const Matrix g = prior_precision(kernels_, lambda);
  factor_or_throw(g, "prior precision");
  const auto m_llt = factor_or_throw(g + data_precision_, "posterior precision");
  return m_llt.solve(data_cross_);
}

namespace {

// Gamma0 restricted to one output: blkdiag over the m inputs.
Matrix spline_block(const SplineHyper& hp, Index lags, Index inputs) {
  return spline_precision(hp, lags, 1, inputs);
}

}  // namespace

double spline_neg_log_marglik(const RegressionStats& stats, const NoiseModel& noise, const SplineHyper& hp) {
  const Matrix block = spline_block(hp, stats.lags, stats.inputs);
  const double log_det_block = -static_cast<double>(stats.inputs) * tc_log_det(hp, stats.lags);
  double f = 0.0;
  for (Index i = 0; i < stats.outputs; ++i) {
    const double s = noise.variances[i];
    const auto llt = factor_or_throw(block + stats.phi_gram / s, "spline posterior precision");
    const Vector b = stats.phi_cross.col(i) / s;
    f += stats.output_energy[i] / s - b.dot(llt.solve(b)) + log_det_from_llt(llt) - log_det_block +
         static_cast<double>(stats.samples) * std::log(s);
  }
  return f;
}

Vector spline_posterior_mean(const RegressionStats& stats, const NoiseModel& noise, const SplineHyper& hp) {
  const Matrix block = spline_block(hp, stats.lags, stats.inputs);
  const Index w = stats.lags * stats.inputs;
  Vector h(stats.dim());
  for (Index i = 0; i < stats.outputs; ++i) {
    const double s = noise.variances[i];
    const auto llt = factor_or_throw(block + stats.phi_gram / s, "spline posterior precision");
    h.segment(i * w, w) = llt.solve(stats.phi_cross.col(i) / s);
  }
  return h;
}

}  // namespace hankelid
