// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "hankelid/baselines.hpp"
#include "hankelid/bench.hpp"
#include "hankelid/gradcheck.hpp"
#include "hankelid/identify.hpp"
#include "hankelid/metrics.hpp"
#include "hankelid/scenario.hpp"
#include "hankelid/sgp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hankelid;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = n01(rng);
  return m;
}

double median(std::vector<double> v) { return percentile(std::move(v), 0.5); }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failed = 0;

void report(int id, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failed;
  std::printf("%s criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

// Gradient correctness on random small marginal-likelihood problems.
Outcome criterion1() {
  const auto t0 = Clock::now();
  const GradcheckReport rep = run_gradcheck(50, 2024);
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "max relative error " << rep.max_relative_error << " over " << rep.instances << " instances, B,V >= 0: "
     << (rep.nonnegative_split ? "yes" : "no") << ", " << secs << " s";
  return {rep.instances == 50 && rep.max_relative_error < 1e-5 && rep.nonnegative_split && secs < 30.0, os.str()};
}

// Trace identity, nuclear-norm special case and posterior/Tikhonov equivalence.
Outcome criterion2() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> small(1, 3);
  double trace_err = 0.0, nuc_err = 0.0, tik_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index p = small(rng), m = small(rng);
    const Index lags = 2 + trial % 8;
    const HankelDims dims = hankel_dims(lags, p, m);
    const HankelPermutation perm(lags, p, m, dims);
    const Index rows = p * dims.block_rows, cols = m * dims.block_cols;
    WeightPair w;
    w.w1 = Matrix::Identity(cols, cols) + 0.3 * gaussian(cols, cols, rng);
    w.w2 = Matrix::Identity(rows, rows) + 0.3 * gaussian(rows, rows, rng);
    w.mode = WeightMode::empirical;
    SubspaceBasis b;
    b.u = Eigen::HouseholderQR<Matrix>(gaussian(rows, rows, rng)).householderQ();
    b.energies = Vector::Ones(rows);
    b.order = std::uniform_int_distribution<Index>(0, rows)(rng);
    const double l1 = std::exp(gaussian(1, 1, rng)(0, 0)), l2 = std::exp(gaussian(1, 1, rng)(0, 0));
    const ImpulseResponse h(gaussian(lags * p * m, 1, rng).col(0), lags, p, m);

    const Matrix ht = weighted_hankel(h, dims, w);
    const double lhs = (ht * ht.transpose() * q_matrix(b, l1, l2)).trace();
    const double rhs = h.stacked().dot(kron_projection(perm, w.w2 * q_matrix(b, l1, l2) * w.w2.transpose(),
                                                       w.w1.transpose() * w.w1) * h.stacked());
    trace_err = std::max(trace_err, rel(lhs, rhs));

    const HankelPrecisions id = hankel_precisions(perm, identity_weights(dims, p, m), b);
    const Vector s = Eigen::JacobiSVD<Matrix>(build_hankel(h, dims)).singularValues();
    nuc_err = std::max(nuc_err, rel(h.stacked().dot((l1 * id.gamma1 + l1 * id.gamma2) * h.stacked()), l1 * s.squaredNorm()));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const MarglikInstance inst = random_marglik_instance(5000 + trial);
    const MarglikProblem& pb = *inst.problem;
    const Index n = inst.data.samples(), p = inst.data.outputs();
    const Matrix phi = build_regressor(inst.data, pb.stats().lags);
    const Vector y = stack_outputs(inst.data);
    Vector wsqrt(n * p);
    for (Index i = 0; i < p; ++i) wsqrt.segment(i * n, n).setConstant(1.0 / std::sqrt(pb.noise().variances[i]));
    const Matrix prec = combined_precision(pb.kernels(), inst.lambda);
    const Matrix upper = Eigen::LLT<Matrix>(prec).matrixU();
    Matrix a(n * p + prec.rows(), prec.cols());
    a << wsqrt.asDiagonal() * phi, upper;
    Vector rhs = Vector::Zero(a.rows());
    rhs.head(n * p) = wsqrt.asDiagonal() * y;
    const Vector oracle = a.colPivHouseholderQr().solve(rhs);
    tik_err = std::max(tik_err, (pb.posterior_mean(inst.lambda) - oracle).norm() / std::max(1.0, oracle.norm()));
  }
  std::ostringstream os;
  os << "trace identity " << trace_err << ", nuclear-norm case " << nuc_err << ", posterior vs Tikhonov " << tik_err;
  return {trace_err < 1e-10 && nuc_err < 1e-10 && tik_err < 1e-8, os.str()};
}

SgpObjective quadratic(const Vec3& c) {
  SgpObjective obj;
  obj.value = [c](const Vec3& x) { return (x - c).squaredNorm(); };
  obj.evaluate = [c](const Vec3& x) {
    SplitGradient g;
    g.value = (x - c).squaredNorm();
    g.gradient = 2.0 * (x - c);
    g.positive = 2.0 * x + 2.0 * (-c).cwiseMax(0.0);
    g.negative = 2.0 * c.cwiseMax(0.0);
    return g;
  };
  return obj;
}

bool nonincreasing(const std::vector<double>& h) {
  for (std::size_t k = 1; k < h.size(); ++k)
    if (h[k] > h[k - 1]) return false;
  return true;
}

// SGP on known quadratics and on the criterion-1 marginal-likelihood problems.
Outcome criterion3() {
  bool ok = true;
  double quad_err = 0.0;
  const std::vector<std::pair<Vec3, Vec3>> problems = {
      {Vec3(1, 2, 3), Vec3(1, 2, 3)}, {Vec3(-1, 2, 3), Vec3(0, 2, 3)}, {Vec3(0.5, -4, 0.01), Vec3(0.5, 0, 0.01)}};
  for (const auto& [center, optimum] : problems) {
    const SgpResult r = sgp_minimize(quadratic(center), Vec3::Zero());
    quad_err = std::max(quad_err, (r.lambda - optimum).cwiseAbs().maxCoeff());
    ok = ok && nonincreasing(r.history);
  }
  ok = ok && quad_err < 1e-6;

  const SgpParams params;
  std::vector<double> sgp_iters, pg_iters;
  int terminated = 0;
  bool monotone = true;
  for (int i = 0; i < 50; ++i) {
    const MarglikInstance inst = random_marglik_instance(2024 + i);
    const SgpObjective obj = marglik_objective(*inst.problem);
    const SgpResult r = sgp_minimize(obj, Vec3::Ones(), params);
    terminated += r.iterations <= params.max_iter;
    monotone = monotone && nonincreasing(r.history);
    sgp_iters.push_back(r.iterations);
    const SgpResult pg = projected_gradient_minimize(obj, Vec3::Ones(), 1.0, params);
    monotone = monotone && nonincreasing(pg.history);
    pg_iters.push_back(pg.iterations);
  }
  const double ms = median(sgp_iters), mp = median(pg_iters);
  std::ostringstream os;
  os << "quadratic error " << quad_err << ", terminated " << terminated << "/50, median iterations SGP " << ms
     << " vs projected gradient " << mp;
  return {ok && monotone && terminated == 50 && ms <= mp, os.str()};
}

// Algorithm structure on small random systems.
Outcome criterion4() {
  int bounded = 0, increasing = 0, zero = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Index p = 1 + s % 2, m = 1 + (s / 2) % 2;
    const StateSpace sys = gen_random_system(p, m, 4, 0.85, derive_seed(77, s));
    const Matrix u = white_input(200, m, derive_seed(78, s));
    Matrix y = sys.simulate(u);
    std::mt19937_64 rng(derive_seed(79, s));
    for (Index i = 0; i < p; ++i) {
      const double v = (y.col(i).array() - y.col(i).mean()).square().mean();
      y.col(i) += std::sqrt(v / 4.0) * gaussian(200, 1, rng);
    }
    const Dataset data(u, y);
    IdentConfig cfg;
    cfg.lags = 12;
    const IdentResult r = identify(data, cfg);
    bounded += r.complete && r.order <= p * r.dims.block_rows;
    const std::vector<double> acc = r.accepted_values();
    bool inc = true;
    for (std::size_t k = 1; k < acc.size(); ++k) inc = inc && acc[k] < acc[k - 1];
    increasing += inc;

    cfg.epsilon = std::numeric_limits<double>::infinity();
    const IdentResult flat = identify(data, cfg);
    zero += flat.order == 0 && flat.accepted_values().size() == 1 && flat.lambda == flat.trace.front().lambda;
  }
  std::ostringstream os;
  os << "n <= pr on " << bounded << "/20, strictly increasing accepted likelihoods on " << increasing
     << "/20, infinite resolution gives n = 0 on " << zero << "/20";
  return {bounded == 20 && increasing == 20 && zero == 20, os.str()};
}

// S1, N = 500, white input, SNR 2, 20 runs: prediction COD of SH vs SS.
Outcome criterion5() {
  BenchConfig cfg = BenchConfig::preset(ScenarioTag::s1, 500, 1, 20);
  cfg.scenario.input = InputKind::white;
  cfg.scenario.snr_lo = cfg.scenario.snr_hi = 2.0;
  cfg.ident.weights = WeightMode::empirical;
  cfg.estimators = {EstimatorTag::sh, EstimatorTag::ss};
  const MonteCarloReport rep = run_monte_carlo(cfg);
  bool ok = true;
  std::ostringstream os;
  os << "median COD SH/SS:";
  for (const std::string ch : {"cod_y1", "cod_y2", "cod_y3"}) {
    double sh = NAN, ss = NAN;
    for (const Aggregate& a : rep.aggregates) {
      if (a.metric != ch) continue;
      ok = ok && a.failures == 0;
      (a.estimator == EstimatorTag::sh ? sh : ss) = a.median;
    }
    ok = ok && sh >= 84.0 && sh >= ss;
    char buf[64];
    std::snprintf(buf, sizeof buf, " %s %.2f/%.2f", ch.c_str(), sh, ss);
    os << buf;
  }
  return {ok, os.str()};
}

// Hankel rank equals the McMillan degree.
Outcome criterion6() {
  double worst = 0.0;
  int checked = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Index p = 1 + s % 3, m = 1 + (s / 3) % 3;
    const StateSpace sys = gen_random_system(p, m, 6, 0.85, derive_seed(606, s));
    const HankelDims dims = hankel_dims(50, p, m);
    const Vector sv = normalized_singular_values(sys.impulse_response(50), dims, identity_weights(dims, p, m));
    if (sys.order() >= sv.size()) continue;
    worst = std::max(worst, sv[sys.order()]);
    ++checked;
  }
  std::ostringstream os;
  os << "max s(n+1)/s(1) " << worst << " over " << checked << " systems";
  return {checked == 50 && worst < 1e-6, os.str()};
}

// Nuclear-norm ADMM: optimality certificate and limits.
Outcome criterion7() {
  double worst_kkt = 0.0, worst_ls = 0.0, worst_zero = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::mt19937_64 rng(derive_seed(707, s));
    const Index p = 1 + s % 2, lags = 6, n = 40;
    const Matrix u = gaussian(n, 1, rng);
    StateSpace sys;
    sys.a = (Matrix(2, 2) << 0.6, 0.4, -0.4, 0.6).finished();
    sys.b = gaussian(2, 1, rng);
    sys.c = gaussian(p, 2, rng);
    const Dataset d(u, sys.simulate(u) + 0.2 * gaussian(n, p, rng));
    const RegressionStats stats = RegressionStats::from_dataset(d, lags);
    const HankelPermutation perm(lags, p, 1, hankel_dims(lags, p, 1));
    const Matrix phi = build_regressor(d, lags);
    const Vector y = stack_outputs(d);
    const double scale = (2.0 * phi.transpose() * y).norm();

    const double reg = 0.02 * scale * (1 + s % 5);
    const AdmmResult r = nn_admm(stats, reg, perm);
    const Vector h = r.estimate.stacked();
    const Matrix g = r.rho * r.dual / reg;
    const Matrix hk = perm.hankel(h);
    const Vector grad = 2.0 * phi.transpose() * (phi * h - y) + reg * perm.adjoint_hankel(g);
    const double spectral = Eigen::JacobiSVD<Matrix>(g).singularValues()[0] - 1.0;
    const double nuc = Eigen::JacobiSVD<Matrix>(hk).singularValues().sum();
    const double align = std::abs((g.array() * hk.array()).sum() - nuc) / std::max(1.0, nuc);
    worst_kkt = std::max({worst_kkt, grad.norm() / scale, spectral, align});

    const Vector ls = phi.colPivHouseholderQr().solve(y);
    worst_ls = std::max(worst_ls, (nn_admm(stats, 0.0, perm).estimate.stacked() - ls).cwiseAbs().maxCoeff());
    worst_zero = std::max(worst_zero, nn_admm(stats, 10.0 * scale, perm).estimate.stacked().cwiseAbs().maxCoeff());
  }
  std::ostringstream os;
  os << "KKT residual " << worst_kkt << ", zero-weight vs least squares " << worst_ls << ", large-weight |h| "
     << worst_zero;
  return {worst_kkt < 1e-4 && worst_ls < 1e-6 && worst_zero < 1e-6, os.str()};
}

// Metric oracles.
Outcome criterion8() {
  const Vector a = (Vector(3) << 1, 2, 3).finished();
  const Vector b = (Vector(3) << 1, 2, 4).finished();
  bool ok = cod(a, b) == 100.0 * (1.0 - std::sqrt(1.0 / 2.0));
  ok = ok && std::abs(cod(a, b) - 29.2893) < 1e-4;
  ok = ok && cod(a, a) == 100.0;
  ok = ok && cod(a, Vector::Constant(3, a.mean())) == 0.0;

  const ImpulseResponse h((Vector(6) << 1, -0.5, 0.25, 2, 1, 0.5).finished(), 3, 2, 1);
  ok = ok && fit_metric(h, h) == 100.0;
  double expect = 0.0;
  for (Index i = 0; i < 2; ++i) {
    Vector ch = Vector::Zero(1000);
    ch.head(3) = h.stacked().segment(i * 3, 3);
    expect += 100.0 * (1.0 - std::sqrt(ch.squaredNorm() / (ch.array() - ch.mean()).square().sum()));
  }
  const double zero_fit = fit_metric(h, ImpulseResponse(3, 2, 1));
  ok = ok && rel(zero_fit, expect / 2.0) < 1e-14;
  const ImpulseResponse one(a, 3, 1, 1), est(b, 3, 1, 1);
  Vector pa = Vector::Zero(1000), pb = Vector::Zero(1000);
  pa.head(3) = a;
  pb.head(3) = b;
  ok = ok && fit_metric(one, est) == cod(pa, pb);
  std::ostringstream os;
  os << "cod(a,b) = " << cod(a, b) << ", zero-estimate FIT " << zero_fit << " vs formula " << expect / 2.0;
  return {ok, os.str()};
}

}  // namespace

int main() {
  report(1, criterion1);
  report(2, criterion2);
  report(3, criterion3);
  report(4, criterion4);
  report(5, criterion5);
  report(6, criterion6);
  report(7, criterion7);
  report(8, criterion8);
  return failed;
}
