#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pfol/feasible_set.hpp"
#include "pfol/loss.hpp"
#include "pfol/random.hpp"

namespace pfol {

/// Monte-Carlo estimate of the smoothed value oracle
///   h*_delta(y) = E_{v ~ unit ball} M(y + v / delta)
/// and, from the same samples, of its gradient E O(y + v / delta).
struct SmoothedOracleEstimate {
  double value_mean = 0.0;
  double value_stderr = 0.0;
  Eigen::VectorXd gradient_mean;
  Eigen::VectorXd gradient_stderr;
  long long sample_count = 0;
  double delta = 0.0;
};

/// Mean with per-coordinate standard error.
struct VectorEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  long long sample_count = 0;
};

SmoothedOracleEstimate smoothed_value_mc(const FeasibleSet& set, const Eigen::VectorXd& y,
                                         double delta, long long n, Rng& rng);

/// Sphere-sampling gradient estimator
///   grad h*_delta(y) = delta d E_{v ~ unit sphere}[M(y + v / delta) v].
VectorEstimate smoothed_gradient_stokes(const FeasibleSet& set, const Eigen::VectorXd& y,
                                        double delta, long long n, Rng& rng);

/// Ball-averaged oracle estimator E O(-cum_grad + v / delta): the expected
/// FPL point, which equals grad h*_delta(-cum_grad).
VectorEstimate expected_fpl_point_mc(const FeasibleSet& set, const Eigen::VectorXd& cum_grad,
                                     double delta, long long n, Rng& rng);

/// Central difference (h*(y + h u) - h*(y - h u)) / 2h of the smoothed value
/// oracle using common random numbers for the two evaluations.
struct ScalarEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long long sample_count = 0;
};
ScalarEstimate smoothed_value_central_difference(const FeasibleSet& set, const Eigen::VectorXd& y,
                                                 const Eigen::VectorXd& direction, double step,
                                                 double delta, long long n, Rng& rng);

using VectorSampler = std::function<Eigen::VectorXd(Rng&)>;

/// High-accuracy mean of a sampler (default 10^7 draws).
Eigen::VectorXd reference_mean(const VectorSampler& sampler, long long n, Rng& rng);

struct MseEstimate {
  double mse = 0.0;
  double std_error = 0.0;
  /// 4 D^2 / m
  double bound = 0.0;
  int samples_m = 0;
  int trials = 0;
};

/// E||mean of m draws - true mean||^2 over `trials` repetitions, against a
/// precomputed reference mean. Throws InvariantError if a draw exceeds D.
MseEstimate empirical_mse(const VectorSampler& sampler, double norm_bound, int m, int trials,
                          Rng& rng, const Eigen::VectorXd& reference);

/// As above, computing the reference mean from `reference_samples` draws.
MseEstimate empirical_mse(const VectorSampler& sampler, double norm_bound, int m, int trials,
                          Rng& rng, long long reference_samples = 10'000'000);

struct LipschitzAudit {
  double max_ratio = 0.0;
  double bound = 0.0;  // D
  int pairs = 0;
};

/// max |M(y1) - M(y2)| / ||y1 - y2|| over random Gaussian pairs at scales
/// spread over six decades.
LipschitzAudit lipschitz_audit(const FeasibleSet& set, int pairs, Rng& rng);

struct SmoothAudit {
  double max_violation = 0.0;
  int pairs = 0;
};

/// Largest value of <grad f(y) - grad f(x), x - y> - beta ||x - y||^2 over
/// random feasible pairs.
SmoothAudit smooth_inequality_audit(const LossFunction& loss, const FeasibleSet& set, int pairs,
                                    Rng& rng);

/// One line of an audit report.
struct AuditRecord {
  std::string audit_name;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool pass = false;
};

nlohmann::json to_json(const AuditRecord& record);

/// File-backed store of reference means keyed by fixture name, seed and sample
/// count, so long reference runs are done once.
class ReferenceCache {
 public:
  ReferenceCache() = default;
  explicit ReferenceCache(std::string path);

  Eigen::VectorXd get_or_compute(const std::string& fixture, std::uint64_t seed, long long n,
                                 const VectorSampler& sampler);
  void save() const;

 private:
  std::string path_;
  nlohmann::json entries_ = nlohmann::json::object();
};

struct AuditOptions {
  std::uint64_t seed = 1;
  /// Scales every sample count; 1.0 runs the full-size suite.
  double scale = 1.0;
  ReferenceCache* cache = nullptr;
};

/// Lipschitz, smoothness, variance, smoothed-oracle and gradient-representation
/// audits with their bounds.
std::vector<AuditRecord> run_audit_suite(const AuditOptions& options);

}  // namespace pfol
