#pragma once

// Scaled Gradient Projection over the nonnegative orthant R^3_+, with the
// split-gradient diagonal scaling, Barzilai-Borwein step alternation and a
// monotone Armijo backtracking loop.

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace hankelid {

using Vec3 = Eigen::Vector3d;

struct SgpParams {
  double armijo = 1e-4;        // upsilon
  double backtrack = 0.4;      // gamma
  double alpha_min = 1e-7;
  double alpha_max = 1e2;
  double scale_min = 1e-5;     // L_min
  double scale_max = 1e10;     // L_max
  int memory = 1;              // M; accepted for the nonmonotone variant, unused
  int max_iter = 5000;
  double rel_tol = 1e-9;
  int max_backtracks = 60;
  double tau0 = 0.5;           // BB alternation threshold
  int bb2_window = 3;

  void validate() const;
};

/// Value plus gradient split grad = positive - negative, both >= 0.
struct SplitGradient {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Vec3 positive = Vec3::Zero();
  Vec3 negative = Vec3::Zero();
};

/// Objective callbacks. `value` may throw to signal an infeasible point; the
/// line search treats that as +infinity.
struct SgpObjective {
  std::function<double(const Vec3&)> value;
  std::function<SplitGradient(const Vec3&)> evaluate;
};

enum class SgpStop { relative_decrease, max_iterations, stationary, line_search_exhausted };

struct SgpResult {
  Vec3 lambda = Vec3::Zero();
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  SgpStop reason = SgpStop::max_iterations;
  std::vector<double> history;        // f(lambda^(k)), k = 0..iterations
  std::vector<double> directional;    // grad^T dlambda per iteration
};

/// Componentwise max(x, 0).
Vec3 project_positive(const Vec3& x);

/// [D]_ii = min(max(L_min, lambda_i / V_i), L_max); V_i = 0 gives L_max.
Vec3 scaling_matrix(const Vec3& lambda, const Vec3& negative, const SgpParams& params);

/// Barzilai-Borwein alternation state carried across iterations.
class BbSteplength {
 public:
  explicit BbSteplength(const SgpParams& params);

  /// Step for the first iteration: 1 clipped to [alpha_min, alpha_max].
  double initial() const;
  /// Step from s = lambda_k - lambda_{k-1}, z = grad_k - grad_{k-1} and the
  /// current scaling diagonal.
  double next(const Vec3& s, const Vec3& z, const Vec3& scaling);

  double tau() const { return tau_; }

 private:
  SgpParams params_;
  double tau_;
  std::vector<double> bb2_recent_;
};

SgpResult sgp_minimize(const SgpObjective& objective, const Vec3& start, const SgpParams& params = {});

/// Plain projected gradient with D = I and a fixed trial step, Armijo
/// backtracked; same stopping rule. Used as a baseline for iteration counts.
SgpResult projected_gradient_minimize(const SgpObjective& objective, const Vec3& start, double step,
                                      const SgpParams& params = {});

std::string to_string(SgpStop reason);

}  // namespace hankelid
