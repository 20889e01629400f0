#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "pfol/feasible_set.hpp"

namespace pfol {

/// Convex quadratic loss f(x) = 1/2 x'Hx + <b, x> + c, with H either an
/// isotropic multiple a*I (linear losses have a = 0) or a dense PSD matrix.
/// The family is closed under pointwise sums, so block sums and cumulative
/// losses stay O(d) to evaluate no matter how many terms they aggregate.
///
/// grad_bound (G) and smoothness (beta) are declared constants; smoothness 0
/// means no smoothness is exploited.
class LossFunction {
 public:
  /// f(x) = <g, x>
  static LossFunction linear(Eigen::VectorXd direction, double grad_bound);
  /// f(x) = 1/2 ||x - c||^2, beta = 1
  static LossFunction squared_distance(const Eigen::VectorXd& center, double grad_bound);
  /// f(x) = 1/2 x'Ax + <b, x> + c with A symmetric PSD.
  static LossFunction quadratic(Eigen::MatrixXd hessian, Eigen::VectorXd linear, double constant,
                                double grad_bound, double smoothness);

  double evaluate(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  int dim() const { return static_cast<int>(linear_.size()); }
  double grad_bound() const { return grad_bound_; }
  double smoothness() const { return smoothness_; }

  bool is_isotropic() const { return !hessian_.has_value(); }
  /// Isotropic curvature a (meaningful only when is_isotropic()).
  double curvature() const { return curvature_; }
  const Eigen::VectorXd& linear_term() const { return linear_; }
  double constant_term() const { return constant_; }

  /// Pointwise sum in place; G and beta add.
  LossFunction& operator+=(const LossFunction& other);

 private:
  LossFunction() = default;

  double curvature_ = 0.0;
  std::optional<Eigen::MatrixXd> hessian_;
  Eigen::VectorXd linear_;
  double constant_ = 0.0;
  double grad_bound_ = 0.0;
  double smoothness_ = 0.0;
};

/// Pointwise sum of a nonempty list; grad_bound and smoothness are additive.
LossFunction block_sum(std::span<const LossFunction> losses);

struct OfflineSolution {
  Eigen::VectorXd point;
  double value = 0.0;
  /// Guaranteed suboptimality bound of the returned value.
  double error_bound = 0.0;
};

/// Frank-Wolfe with step 2/(s+2) started at linear_argmax(set, e_1).
/// error_bound = 8 beta D^2 / (iterations + 2).
OfflineSolution offline_frank_wolfe(const LossFunction& objective, const FeasibleSet& set,
                                    int iterations);

/// Minimizer of the summed losses over the set. Runs Frank-Wolfe on the sum;
/// when the sum is isotropic and the set supports projection (or the sum is
/// linear) the closed form is also evaluated and the lower value returned,
/// with error_bound 0 when the closed form wins.
OfflineSolution best_in_hindsight(std::span<const LossFunction> losses, const FeasibleSet& set,
                                  int budget);

/// Exact minimizer of a single aggregated loss when a closed form exists:
/// linear sums via the value oracle, isotropic quadratics via projection.
std::optional<OfflineSolution> closed_form_minimum(const LossFunction& objective,
                                                   const FeasibleSet& set);

}  // namespace pfol
