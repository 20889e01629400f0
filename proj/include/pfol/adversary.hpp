#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include <Eigen/Core>
#include <json.hpp>

#include "pfol/feasible_set.hpp"
#include "pfol/loss.hpp"

namespace pfol {

enum class AdversaryKind {
  /// f_t = <g + noise * u_t, x>, u_t uniform in the unit ball.
  linear_stochastic,
  /// f_t = 1/2 ||x - c_t||^2, c_t uniform in ball(radius).
  quadratic_stochastic,
  /// f_t = 1/2 ||x - c_t||^2 with c_t = -radius * sign(mean of past actions) / sqrt(d).
  quadratic_adaptive,
  /// f_t = <scale * mean(past) / ||mean(past)||, x>.
  linear_adaptive,
};

std::string_view to_string(AdversaryKind kind);
AdversaryKind adversary_kind_from_string(std::string_view name);

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::quadratic_stochastic;
  int horizon = 1;
  std::uint64_t seed = 0;
  /// Center radius for quadratic kinds, gradient magnitude for linear_adaptive.
  double radius = 1.0;
  /// Mean loss direction for linear_stochastic; empty means e_1.
  Eigen::VectorXd direction;
  /// Radius of the uniform-ball noise added to `direction`.
  double noise = 0.0;
};

nlohmann::json to_json(const AdversarySpec& spec);
AdversarySpec adversary_spec_from_json(const nlohmann::json& j);

/// Loss generator for one game. Stochastic kinds are pure functions of
/// (seed, t); adaptive kinds additionally read the history of played actions.
/// The adversary never sees the current round's action or randomness.
class Adversary {
 public:
  Adversary(AdversarySpec spec, const FeasibleSet& set);

  /// Loss for round t = history.size() + 1.
  LossFunction next_loss(std::span<const Eigen::VectorXd> history) const;

  /// Declared G: the exact sup of ||grad f_t(x)|| over the set and all losses
  /// this adversary can emit.
  double grad_bound() const { return grad_bound_; }
  double smoothness() const;
  const AdversarySpec& spec() const { return spec_; }

 private:
  const Eigen::VectorXd& history_sum(std::span<const Eigen::VectorXd> history) const;

  AdversarySpec spec_;
  int dim_;
  double grad_bound_;
  // Running sum of the history seen by the last call. Games only append to the
  // history, so each round adds one action instead of re-summing all of them.
  mutable Eigen::VectorXd sum_;
  mutable Eigen::VectorXd last_seen_;
  mutable std::size_t summed_ = 0;
};

}  // namespace pfol
