#include "hankelid/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hankelid {

MarglikInstance random_marglik_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); };

  const Index p = pick(1, 2);
  const Index m = pick(1, 2);
  const Index lags = pick(2, 8);
  const Index n = pick(lags * m + 2, 30);

  Matrix u(n, m);
  for (Index t = 0; t < n; ++t)
    for (Index j = 0; j < m; ++j) u(t, j) = n01(rng);
  ImpulseResponse h(lags, p, m);
  const double decay = 0.3 + 0.6 * unit(rng);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index k = 1; k <= lags; ++k) h.coeff(i, j, k) = n01(rng) * std::pow(decay, static_cast<double>(k));
  Matrix y = simulate_fir(h, u);
  NoiseModel noise;
  noise.variances.resize(p);
  for (Index i = 0; i < p; ++i) {
    noise.variances[i] = 0.05 + 0.5 * unit(rng);
    for (Index t = 0; t < n; ++t) y(t, i) += std::sqrt(noise.variances[i]) * n01(rng);
  }

  MarglikInstance inst;
  inst.data = Dataset(u, y);
  inst.dims = hankel_dims(lags, p, m);
  inst.perm = std::make_unique<HankelPermutation>(lags, p, m, inst.dims);
  inst.weights = build_weights(inst.data, inst.dims, unit(rng) < 0.5 ? WeightMode::identity : WeightMode::empirical);

  const Index pr = p * inst.dims.block_rows;
  Matrix g(pr, pr);
  for (Index i = 0; i < pr; ++i)
    for (Index j = 0; j < pr; ++j) g(i, j) = n01(rng);
  SubspaceBasis basis;
  basis.u = Eigen::HouseholderQR<Matrix>(g).householderQ();
  basis.energies = Vector::Ones(pr);
  basis.order = pick(0, pr);

  const SplineHyper hp{std::exp(std::log(0.1) + unit(rng) * std::log(100.0)), 0.5 + 0.45 * unit(rng)};
  auto stats = std::make_shared<const RegressionStats>(RegressionStats::from_dataset(inst.data, lags));
  inst.problem =
      std::make_unique<MarglikProblem>(stats, noise, make_kernel_system(hp, *inst.perm, inst.weights, basis));
  for (int i = 0; i < 3; ++i) inst.lambda[i] = std::exp(std::log(0.1) + unit(rng) * std::log(100.0));
  return inst;
}

GradcheckReport run_gradcheck(int instances, std::uint64_t seed, bool corrupt) {
  GradcheckReport rep;
  rep.instances = instances;
  for (int k = 0; k < instances; ++k) {
    const MarglikInstance inst = random_marglik_instance(seed + static_cast<std::uint64_t>(k));
    const MarglikEval e = inst.problem->evaluate(inst.lambda);
    LambdaVec g = e.gradient;
    if (corrupt) g *= 1.01;
    LambdaVec fd;
    for (int i = 0; i < 3; ++i) {
      const double step = 1e-5 * std::max(inst.lambda[i], 1e-2);
      LambdaVec lp = inst.lambda;
      LambdaVec lm = inst.lambda;
      lp[i] += step;
      lm[i] -= step;
      fd[i] = (inst.problem->value(lp) - inst.problem->value(lm)) / (2.0 * step);
    }
    const double scale = std::max({g.norm(), fd.norm(), 1e-300});
    rep.max_relative_error = std::max(rep.max_relative_error, (g - fd).norm() / scale);
    if ((e.positive.array() < 0.0).any() || (e.negative.array() < 0.0).any()) rep.nonnegative_split = false;
  }
  return rep;
}

}  // namespace hankelid
