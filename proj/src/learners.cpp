#include "pfol/learners.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfol/errors.hpp"
#include "pfol/random.hpp"

namespace pfol {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ConfigError("perturbation parameter delta must be positive and finite");
  }
}

void check_count(int count, const char* what) {
  if (count < 1) throw ConfigError(std::string(what) + " must be >= 1");
}

Eigen::VectorXd initial_point(const FeasibleSet& set) {
  return linear_argmax(set, Eigen::VectorXd::Unit(set.dim(), 0));
}

}  // namespace

double default_delta(double grad_bound, int dim, long long rounds) {
  if (!(grad_bound > 0.0) || dim < 1 || rounds < 1) {
    throw ConfigError("default_delta needs G > 0, d >= 1, T >= 1");
  }
  return 2.0 / (grad_bound * std::sqrt(static_cast<double>(dim) * static_cast<double>(rounds)));
}

double default_delta_blocked(double grad_bound, int dim, long long blocks, long long block_size) {
  if (!(grad_bound > 0.0) || dim < 1 || blocks < 1 || block_size < 1) {
    throw ConfigError("default_delta needs G > 0, d >= 1, n >= 1, k >= 1");
  }
  return 2.0 / (grad_bound * std::sqrt(static_cast<double>(dim) * static_cast<double>(blocks)) *
                static_cast<double>(block_size));
}

BlockingParams blocking_params(long long rounds, BlockingMode mode) {
  if (rounds < 1) throw ConfigError("blocking_params needs T >= 1");
  const double T = static_cast<double>(rounds);
  const double root = mode == BlockingMode::smooth ? std::cbrt(T) : std::sqrt(T);
  const long long k = std::max(1LL, std::llround(root));
  return {(rounds + k - 1) / k, k};
}

Eigen::VectorXd perturbed_leader_average(CountingOracle& oracle,
                                         const Eigen::VectorXd& cumulative_gradient,
                                         double delta, int count, std::uint64_t seed,
                                         std::uint64_t t) {
  const int d = oracle.set().dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  for (int j = 1; j <= count; ++j) {
    Rng rng = substream(seed, StreamDomain::learner, t, static_cast<std::uint64_t>(j));
    const Eigen::VectorXd v = sample_unit_ball(rng, d);
    sum += oracle.argmax(-cumulative_gradient + v / delta);
  }
  return sum / static_cast<double>(count);
}

Learner::Learner(const FeasibleSet& set, std::uint64_t seed) : oracle_(set) {
  state_.cumulative_gradient = Eigen::VectorXd::Zero(set.dim());
  state_.last_action = initial_point(set);
  state_.seed = seed;
}

Eigen::VectorXd Learner::act() {
  if (awaiting_loss_) {
    throw ProtocolError("act() called twice in round " + std::to_string(state_.round));
  }
  state_.last_action = choose_action();
  awaiting_loss_ = true;
  return state_.last_action;
}

const Eigen::VectorXd& Learner::observe(const LossFunction& loss) {
  if (!awaiting_loss_) {
    throw ProtocolError("observe() without a played action in round " +
                        std::to_string(state_.round));
  }
  last_gradient_ = loss.gradient(state_.last_action);
  ++state_.grad_evals;
  if (!last_gradient_.allFinite()) throw NumericError("non-finite loss gradient");
  state_.cumulative_gradient += last_gradient_;
  after_observe(last_gradient_);
  ++state_.round;
  awaiting_loss_ = false;
  return last_gradient_;
}

SampledFpl::SampledFpl(const FeasibleSet& set, double delta, int samples, std::uint64_t seed)
    : Learner(set, seed), delta_(delta), samples_(samples) {
  check_delta(delta);
  check_count(samples, "samples m");
}

Eigen::VectorXd SampledFpl::choose_action() {
  return perturbed_leader_average(oracle_, state_.cumulative_gradient, delta_, samples_,
                                  state_.seed, static_cast<std::uint64_t>(state_.round));
}

Ospf::Ospf(const FeasibleSet& set, double delta, int block_size, std::uint64_t seed)
    : Learner(set, seed), delta_(delta), block_size_(block_size) {
  check_delta(delta);
  check_count(block_size, "block size k");
}

Eigen::VectorXd Ospf::choose_action() {
  if (state_.round % block_size_ != 0) return state_.last_action;
  return perturbed_leader_average(oracle_, state_.cumulative_gradient, delta_, block_size_,
                                  state_.seed, static_cast<std::uint64_t>(state_.round));
}

ExpectedFplMc::ExpectedFplMc(const FeasibleSet& set, double delta, int eval_samples,
                             std::uint64_t seed)
    : Learner(set, seed), delta_(delta), eval_samples_(eval_samples) {
  check_delta(delta);
  check_count(eval_samples, "eval_samples");
}

Eigen::VectorXd ExpectedFplMc::choose_action() {
  return perturbed_leader_average(oracle_, state_.cumulative_gradient, delta_, eval_samples_,
                                  state_.seed, static_cast<std::uint64_t>(state_.round));
}

Ogd::Ogd(const FeasibleSet& set, double grad_bound, std::uint64_t seed)
    : Learner(set, seed), grad_bound_(grad_bound), next_(state_.last_action) {
  if (!set.supports_projection()) {
    throw CapabilityError("ogd needs a set with a Euclidean projection");
  }
  if (!(grad_bound > 0.0) || !std::isfinite(grad_bound)) {
    throw ConfigError("ogd needs a positive gradient bound");
  }
}

Eigen::VectorXd Ogd::choose_action() { return next_; }

void Ogd::after_observe(const Eigen::VectorXd& gradient) {
  const double eta =
      set().norm_bound() / (grad_bound_ * std::sqrt(static_cast<double>(state_.round)));
  next_ = euclidean_project(set(), state_.last_action - eta * gradient);
}

Ofw::Ofw(const FeasibleSet& set, double eta, std::uint64_t seed)
    : Learner(set, seed), eta_(eta), anchor_(state_.last_action), current_(state_.last_action) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("ofw eta must be nonnegative");
}

double Ofw::default_eta(double norm_bound, double grad_bound, long long rounds) {
  if (!(grad_bound > 0.0) || rounds < 1) throw ConfigError("ofw eta needs G > 0 and T >= 1");
  return norm_bound / (grad_bound * std::pow(static_cast<double>(rounds), 0.75));
}

Eigen::VectorXd Ofw::choose_action() {
  const Eigen::VectorXd surrogate_gradient =
      eta_ * state_.cumulative_gradient + 2.0 * (current_ - anchor_);
  const Eigen::VectorXd v = oracle_.argmax(-surrogate_gradient);
  const double step = std::min(1.0, 2.0 / std::sqrt(static_cast<double>(state_.round)));
  current_ += step * (v - current_);
  return current_;
}

}  // namespace pfol
