#include "hankelid/baselines.hpp"

#include "hankelid/error.hpp"
#include "hankelid/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace hankelid {

SsResult ss_estimate(const Dataset& data, Index lags) {
  if (data.samples() <= lags * data.inputs()) throw InsufficientData("SS estimate needs N > T*m");
  SsResult out;
  out.noise = estimate_noise_variance(data, lags);
  const RegressionStats stats = RegressionStats::from_dataset(data, lags);
  out.spline = fit_spline_hyperparams(stats, out.noise);
  out.estimate =
      ImpulseResponse(spline_posterior_mean(stats, out.noise, out.spline), lags, data.outputs(), data.inputs());
  return out;
}

Matrix singular_value_threshold(const Matrix& x, double level) {
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = (svd.singularValues().array() - level).cwiseMax(0.0).matrix();
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double nuclear_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(x).singularValues().sum();
}

double residual_energy(const RegressionStats& stats, const Vector& h) {
  const Index w = stats.lags * stats.inputs;
  double e = 0.0;
  for (Index i = 0; i < stats.outputs; ++i) {
    const auto hi = h.segment(i * w, w);
    e += stats.output_energy[i] - 2.0 * hi.dot(stats.phi_cross.col(i)) + hi.dot(stats.phi_gram * hi);
  }
  return std::max(e, 0.0);
}

AdmmResult nn_admm(const RegressionStats& stats, double reg, const HankelPermutation& perm, const WeightPair* weights,
                   const AdmmOptions& options, const Vector* warm_start) {
  if (!(reg >= 0.0) || !std::isfinite(reg)) throw InvalidArgument("nuclear-norm weight must be >= 0");
  if (!(options.rho > 0.0) || options.max_iter < 1) throw InvalidArgument("invalid ADMM options");
  const Index d = stats.dim();
  if (perm.cols() != d) throw InvalidArgument("Hankel operator does not match regression size");
  const Index w = stats.lags * stats.inputs;

  auto op = [&](const Vector& h) -> Matrix {
    Matrix hk = perm.hankel(h);
    if (weights) return weights->w2.transpose() * hk * weights->w1.transpose();
    return hk;
  };
  auto adj = [&](const Matrix& x) -> Vector {
    if (weights) return perm.adjoint_hankel(weights->w2 * x * weights->w1);
    return perm.adjoint_hankel(x);
  };

  Matrix system = Matrix::Zero(d, d);
  Vector cross(d);
  for (Index i = 0; i < stats.outputs; ++i) {
    system.block(i * w, i * w, w, w) = 2.0 * stats.phi_gram;
    cross.segment(i * w, w) = 2.0 * stats.phi_cross.col(i);
  }
  Matrix coupling;
  if (weights) {
    Matrix w1tw1 = weights->w1.transpose() * weights->w1;
    Matrix w2w2t = weights->w2 * weights->w2.transpose();
    coupling = kron_projection(perm, 0.5 * (w2w2t + w2w2t.transpose()), 0.5 * (w1tw1 + w1tw1.transpose()));
  } else {
    coupling = perm.multiplicity().asDiagonal();
  }
  // rho is relative to the ratio of the data and coupling curvatures.
  const double data_scale = system.trace();
  const double coupling_scale = coupling.trace();
  const double rho =
      options.rho * (data_scale > 0.0 && coupling_scale > 0.0 ? data_scale / coupling_scale : 1.0);
  system += rho * coupling;
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("ADMM normal equations not positive definite");

  AdmmResult out;
  Vector h = warm_start ? *warm_start : Vector::Zero(d);
  Matrix hh = op(h);
  out.z = hh;
  out.dual = Matrix::Zero(hh.rows(), hh.cols());

  for (int k = 0; k < options.max_iter; ++k) {
    h = llt.solve(cross + rho * adj(out.z - out.dual));
    hh = op(h);
    const Matrix z_prev = out.z;
    out.z = singular_value_threshold(hh + out.dual, reg / rho);
    out.dual += hh - out.z;
    ++out.iterations;

    out.primal_residual = (hh - out.z).norm();
    out.dual_residual = rho * adj(out.z - z_prev).norm();
    if (options.record_objective) out.objective.push_back(residual_energy(stats, h) + reg * nuclear_norm(hh));

    const double scale_p = std::max({1.0, hh.norm(), out.z.norm()});
    const double scale_d = std::max(1.0, rho * adj(out.dual).norm());
    if (out.primal_residual < options.tol * scale_p && out.dual_residual < options.tol * scale_d) {
      out.converged = true;
      break;
    }
  }
  out.rho = rho;
  out.estimate = ImpulseResponse(h, stats.lags, stats.outputs, stats.inputs);
  return out;
}

void CvGrid::validate() const {
  if (candidates.empty()) throw InvalidArgument("cross-validation grid is empty");
  for (double c : candidates)
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("cross-validation candidates must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0, 1)");
}

CvGrid make_cv_grid(double lo, double hi, int count, Index n_train, double train_fraction) {
  if (!(lo > 0.0 && hi >= lo) || count < 1 || n_train < 1) throw InvalidArgument("invalid CV grid specification");
  CvGrid g;
  g.train_fraction = train_fraction;
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    g.candidates.push_back(lo * std::pow(hi / lo, frac) / static_cast<double>(n_train));
  }
  return g;
}

CvResult cross_validate(const Dataset& data, Index lags, const CvGrid& grid, const RegularizedEstimator& estimator) {
  grid.validate();
  const Index n = data.samples();
  const Index n_train = static_cast<Index>(std::floor(grid.train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) throw InsufficientData("cross-validation split leaves an empty part");
  const Dataset train = data.head(n_train);
  const Matrix phi = build_phi(data.u(), lags);
  const Matrix phi_val = phi.bottomRows(n - n_train);
  const Matrix y_val = data.y().bottomRows(n - n_train);

  CvResult out;
  out.scores.reserve(grid.candidates.size());
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < grid.candidates.size(); ++c) {
    const double reg = grid.candidates[c];
    const ImpulseResponse h = estimator(train, reg);
    double score = 0.0;
    const Index w = lags * data.inputs();
    for (Index i = 0; i < data.outputs(); ++i)
      score += (y_val.col(i) - phi_val * h.stacked().segment(i * w, w)).squaredNorm();
    out.scores.push_back(score);
    const bool better = score < best_score || (score == best_score && reg < out.best);
    if (better) {
      best_score = score;
      out.best = reg;
      out.best_index = static_cast<Index>(c);
    }
  }
  out.estimate = estimator(data, out.best);
  return out;
}

CvResult nn_cv_estimate(const Dataset& data, Index lags, const CvGrid& grid, bool use_weighted,
                        WeightMode weight_mode, const AdmmOptions& options) {
  const HankelDims dims = hankel_dims(lags, data.outputs(), data.inputs());
  const HankelPermutation perm(lags, data.outputs(), data.inputs(), dims);

  // Warm start per dataset size: the training fits run first, then the refit.
  struct Warm {
    Index samples = -1;
    Vector h;
  };
  auto warm = std::make_shared<Warm>();
  RegularizedEstimator est = [&, warm](const Dataset& part, double reg) {
    const RegressionStats stats = RegressionStats::from_dataset(part, lags);
    std::unique_ptr<WeightPair> weights;
    if (use_weighted) weights = std::make_unique<WeightPair>(build_weights(part, dims, weight_mode));
    const Vector* start = warm->samples == part.samples() ? &warm->h : nullptr;
    AdmmResult r = nn_admm(stats, reg, perm, weights.get(), options, start);
    warm->samples = part.samples();
    warm->h = r.estimate.stacked();
    return r.estimate;
  };
  return cross_validate(data, lags, grid, est);
}

}  // namespace hankelid
