#pragma once

#include <cstdint>
#include <memory>
#include <string_view>

#include <Eigen/Core>

#include "pfol/feasible_set.hpp"
#include "pfol/loss.hpp"

namespace pfol {

/// Linear optimization oracle with a call counter. Learners reach the set only
/// through this wrapper, so its count is the run's oracle budget.
class CountingOracle {
 public:
  explicit CountingOracle(const FeasibleSet& set) : set_(&set) {}

  Eigen::VectorXd argmax(const Eigen::VectorXd& y) {
    ++calls_;
    return linear_argmax(*set_, y);
  }

  std::uint64_t calls() const { return calls_; }
  const FeasibleSet& set() const { return *set_; }

 private:
  const FeasibleSet* set_;
  std::uint64_t calls_ = 0;
};

/// delta = 2 / (G sqrt(d T)).
double default_delta(double grad_bound, int dim, long long rounds);
/// Blocked variant: delta = 2 / (G sqrt(d) sqrt(n) k).
double default_delta_blocked(double grad_bound, int dim, long long blocks, long long block_size);

enum class BlockingMode { general, smooth };

struct BlockingParams {
  long long blocks;      // n
  long long block_size;  // k
};

/// smooth: k = round(T^{1/3}); general: k = round(T^{1/2}); n = ceil(T / k).
BlockingParams blocking_params(long long rounds, BlockingMode mode);

/// Average of `count` perturbed-leader answers
///   O(-cumulative_gradient + v_j / delta),  v_j ~ uniform unit ball,
/// with v_j drawn from the learner substream (seed, t, j), j = 1..count.
/// Summation is in index order, so the result is bit-stable.
Eigen::VectorXd perturbed_leader_average(CountingOracle& oracle,
                                         const Eigen::VectorXd& cumulative_gradient,
                                         double delta, int count, std::uint64_t seed,
                                         std::uint64_t t);

struct LearnerState {
  Eigen::VectorXd cumulative_gradient;
  Eigen::VectorXd last_action;
  /// Round whose action is next to be played (1-based).
  long long round = 1;
  std::uint64_t seed = 0;
  std::uint64_t grad_evals = 0;
};

/// Online learner driven by the act/observe protocol: act() once, then
/// observe() the round's loss exactly once, which evaluates one gradient at
/// the played action.
class Learner {
 public:
  Learner(const FeasibleSet& set, std::uint64_t seed);
  virtual ~Learner() = default;
  Learner(const Learner&) = delete;
  Learner& operator=(const Learner&) = delete;

  virtual std::string_view name() const = 0;

  /// Action for the current round.
  Eigen::VectorXd act();

  /// Consumes the current round's loss and returns the gradient evaluated at
  /// the played action.
  const Eigen::VectorXd& observe(const LossFunction& loss);

  const LearnerState& state() const { return state_; }
  std::uint64_t oracle_calls() const { return oracle_.calls(); }
  std::uint64_t grad_evals() const { return state_.grad_evals; }

 protected:
  virtual Eigen::VectorXd choose_action() = 0;
  /// Hook after the gradient of the current round has been accumulated.
  virtual void after_observe(const Eigen::VectorXd& /*gradient*/) {}

  const FeasibleSet& set() const { return oracle_.set(); }

  CountingOracle oracle_;
  LearnerState state_;

 private:
  Eigen::VectorXd last_gradient_;
  bool awaiting_loss_ = false;
};

/// Plays the average of m perturbed-leader points each round (m oracle calls).
class SampledFpl : public Learner {
 public:
  SampledFpl(const FeasibleSet& set, double delta, int samples, std::uint64_t seed);
  std::string_view name() const override { return "sampled_fpl"; }

 protected:
  Eigen::VectorXd choose_action() override;

 private:
  double delta_;
  int samples_;
};

/// Online smooth projection-free learner. Keeps x_0 = O(e_1) until round k;
/// on rounds t with t mod k == 0 it draws k perturbations at once and plays
/// their average until the next multiple of k. Oracle calls: k * floor(T/k).
class Ospf : public Learner {
 public:
  Ospf(const FeasibleSet& set, double delta, int block_size, std::uint64_t seed);
  std::string_view name() const override { return "ospf"; }

 protected:
  Eigen::VectorXd choose_action() override;

 private:
  double delta_;
  int block_size_;
};

/// Expected FPL with the intractable expectation replaced by a Monte-Carlo
/// average of `eval_samples` perturbed-leader points. A reference learner for
/// comparisons; with eval_samples = m it coincides with SampledFpl.
class ExpectedFplMc : public Learner {
 public:
  ExpectedFplMc(const FeasibleSet& set, double delta, int eval_samples, std::uint64_t seed);
  std::string_view name() const override { return "expected_fpl_mc"; }

 protected:
  Eigen::VectorXd choose_action() override;

 private:
  double delta_;
  int eval_samples_;
};

/// Baseline: projected online gradient descent, eta_t = D / (G sqrt(t)),
/// started at x_1 = O(e_1). Needs a set with a projection.
class Ogd : public Learner {
 public:
  Ogd(const FeasibleSet& set, double grad_bound, std::uint64_t seed);
  std::string_view name() const override { return "ogd"; }

 protected:
  Eigen::VectorXd choose_action() override;
  void after_observe(const Eigen::VectorXd& gradient) override;

 private:
  double grad_bound_;
  Eigen::VectorXd next_;
};

/// Baseline: online Frank-Wolfe (one conditional-gradient step per round on
/// F_t(x) = eta <grad_{1:t-1}, x> + ||x - x_0||^2, step min(1, 2/sqrt(t))).
/// Not part of the perturbed-leader family; parameters follow the usual
/// eta = D / (G T^{3/4}) tuning.
class Ofw : public Learner {
 public:
  Ofw(const FeasibleSet& set, double eta, std::uint64_t seed);
  std::string_view name() const override { return "ofw"; }

  /// eta = D / (G T^{3/4})
  static double default_eta(double norm_bound, double grad_bound, long long rounds);

 protected:
  Eigen::VectorXd choose_action() override;

 private:
  double eta_;
  Eigen::VectorXd anchor_;
  Eigen::VectorXd current_;
};

}  // namespace pfol
