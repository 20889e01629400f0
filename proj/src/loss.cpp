#include "pfol/loss.hpp"

#include <cmath>
#include <string>

#include "pfol/errors.hpp"

namespace pfol {

namespace {

void check_constants(double grad_bound, double smoothness) {
  if (!(grad_bound >= 0.0) || !std::isfinite(grad_bound)) {
    throw InputError("loss grad_bound must be finite and nonnegative");
  }
  if (!(smoothness >= 0.0) || !std::isfinite(smoothness)) {
    throw InputError("loss smoothness must be finite and nonnegative");
  }
}

void check_point(const Eigen::VectorXd& x, int dim) {
  if (x.size() != dim) {
    throw InputError("loss argument has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(dim));
  }
}

}  // namespace

LossFunction LossFunction::linear(Eigen::VectorXd direction, double grad_bound) {
  check_constants(grad_bound, 0.0);
  if (direction.size() < 1 || !direction.allFinite()) throw InputError("bad linear loss direction");
  if (direction.norm() > grad_bound * (1.0 + 1e-12)) {
    throw InputError("linear loss grad_bound is below ||direction||");
  }
  LossFunction f;
  f.linear_ = std::move(direction);
  f.grad_bound_ = grad_bound;
  return f;
}

LossFunction LossFunction::squared_distance(const Eigen::VectorXd& center, double grad_bound) {
  check_constants(grad_bound, 1.0);
  if (center.size() < 1 || !center.allFinite()) throw InputError("bad quadratic loss center");
  LossFunction f;
  f.curvature_ = 1.0;
  f.linear_ = -center;
  f.constant_ = 0.5 * center.squaredNorm();
  f.grad_bound_ = grad_bound;
  f.smoothness_ = 1.0;
  return f;
}

LossFunction LossFunction::quadratic(Eigen::MatrixXd hessian, Eigen::VectorXd linear,
                                     double constant, double grad_bound, double smoothness) {
  check_constants(grad_bound, smoothness);
  const auto d = linear.size();
  if (d < 1 || hessian.rows() != d || hessian.cols() != d) {
    throw InputError("quadratic loss: Hessian shape does not match linear term");
  }
  if (!hessian.allFinite() || !linear.allFinite() || !std::isfinite(constant)) {
    throw InputError("quadratic loss: non-finite coefficient");
  }
  if (!hessian.isApprox(hessian.transpose())) throw InputError("quadratic loss: Hessian not symmetric");
  LossFunction f;
  f.hessian_ = std::move(hessian);
  f.linear_ = std::move(linear);
  f.constant_ = constant;
  f.grad_bound_ = grad_bound;
  f.smoothness_ = smoothness;
  return f;
}

double LossFunction::evaluate(const Eigen::VectorXd& x) const {
  check_point(x, dim());
  const double quadratic =
      hessian_ ? x.dot(*hessian_ * x) : curvature_ * x.squaredNorm();
  return 0.5 * quadratic + linear_.dot(x) + constant_;
}

Eigen::VectorXd LossFunction::gradient(const Eigen::VectorXd& x) const {
  check_point(x, dim());
  if (hessian_) return *hessian_ * x + linear_;
  return curvature_ * x + linear_;
}

LossFunction& LossFunction::operator+=(const LossFunction& other) {
  if (other.dim() != dim()) throw InputError("block_sum: dimension mismatch");
  if (hessian_ || other.hessian_) {
    const auto d = dim();
    Eigen::MatrixXd sum = hessian_ ? *hessian_ : curvature_ * Eigen::MatrixXd::Identity(d, d);
    sum += other.hessian_ ? *other.hessian_
                          : other.curvature_ * Eigen::MatrixXd::Identity(d, d);
    hessian_ = std::move(sum);
    curvature_ = 0.0;
  } else {
    curvature_ += other.curvature_;
  }
  linear_ += other.linear_;
  constant_ += other.constant_;
  grad_bound_ += other.grad_bound_;
  smoothness_ += other.smoothness_;
  return *this;
}

LossFunction block_sum(std::span<const LossFunction> losses) {
  if (losses.empty()) throw InputError("block_sum: empty loss list");
  LossFunction total = losses.front();
  for (std::size_t i = 1; i < losses.size(); ++i) total += losses[i];
  return total;
}

OfflineSolution offline_frank_wolfe(const LossFunction& objective, const FeasibleSet& set,
                                    int iterations) {
  if (iterations < 1) throw ConfigError("offline_frank_wolfe: iterations must be >= 1");
  if (objective.dim() != set.dim()) throw InputError("offline_frank_wolfe: dimension mismatch");
  const int d = set.dim();
  Eigen::VectorXd x = linear_argmax(set, Eigen::VectorXd::Unit(d, 0));
  for (int s = 0; s < iterations; ++s) {
    const Eigen::VectorXd g = objective.gradient(x);
    if (!g.allFinite()) throw NumericError("offline_frank_wolfe: non-finite gradient");
    const Eigen::VectorXd v = linear_argmax(set, -g);
    const double step = 2.0 / (s + 2.0);
    x += step * (v - x);
  }
  const double D = set.norm_bound();
  return {x, objective.evaluate(x), 8.0 * objective.smoothness() * D * D / (iterations + 2.0)};
}

std::optional<OfflineSolution> closed_form_minimum(const LossFunction& objective,
                                                   const FeasibleSet& set) {
  if (!objective.is_isotropic()) return std::nullopt;
  if (objective.curvature() == 0.0) {
    Eigen::VectorXd x = linear_argmax(set, -objective.linear_term());
    return OfflineSolution{x, objective.evaluate(x), 0.0};
  }
  if (!set.supports_projection()) return std::nullopt;
  Eigen::VectorXd x = euclidean_project(set, -objective.linear_term() / objective.curvature());
  return OfflineSolution{x, objective.evaluate(x), 0.0};
}

OfflineSolution best_in_hindsight(std::span<const LossFunction> losses, const FeasibleSet& set,
                                  int budget) {
  const LossFunction total = block_sum(losses);
  OfflineSolution best = offline_frank_wolfe(total, set, budget);
  if (auto exact = closed_form_minimum(total, set); exact && exact->value < best.value) {
    exact->error_bound = 0.0;
    best = std::move(*exact);
  }
  return best;
}

}  // namespace pfol
