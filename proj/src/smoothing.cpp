#include "pfol/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "pfol/errors.hpp"

namespace pfol {

namespace {

void check_samples(long long n, long long minimum, const char* what) {
  if (n < minimum) {
    throw ConfigError(std::string(what) + ": need at least " + std::to_string(minimum) +
                      " samples");
  }
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be positive");
}

// Welford accumulator over scalars or vectors.
class RunningMoments {
 public:
  explicit RunningMoments(Eigen::Index dim)
      : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)) {}

  void add(const Eigen::VectorXd& x) {
    ++count_;
    const Eigen::VectorXd diff = x - mean_;
    mean_ += diff / static_cast<double>(count_);
    m2_ += diff.cwiseProduct(x - mean_);
  }

  void add(double x) { add(Eigen::VectorXd::Constant(1, x)); }

  const Eigen::VectorXd& mean() const { return mean_; }

  /// Sample standard deviation of the mean.
  Eigen::VectorXd std_error() const {
    if (count_ < 2) return Eigen::VectorXd::Constant(mean_.size(), std::numeric_limits<double>::infinity());
    const double n = static_cast<double>(count_);
    return (m2_ / (n - 1.0) / n).cwiseSqrt();
  }

  long long count() const { return count_; }

 private:
  long long count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd m2_;
};

VectorEstimate to_estimate(const RunningMoments& moments) {
  return {moments.mean(), moments.std_error(), moments.count()};
}

}  // namespace

SmoothedOracleEstimate smoothed_value_mc(const FeasibleSet& set, const Eigen::VectorXd& y,
                                         double delta, long long n, Rng& rng) {
  check_samples(n, 2, "smoothed_value_mc");
  check_delta(delta);
  const int d = set.dim();
  RunningMoments value(1);
  RunningMoments point(d);
  for (long long i = 0; i < n; ++i) {
    const Eigen::VectorXd z = y + sample_unit_ball(rng, d) / delta;
    const Eigen::VectorXd x = linear_argmax(set, z);
    value.add(z.dot(x));
    point.add(x);
  }
  SmoothedOracleEstimate estimate;
  estimate.value_mean = value.mean()[0];
  estimate.value_stderr = value.std_error()[0];
  estimate.gradient_mean = point.mean();
  estimate.gradient_stderr = point.std_error();
  estimate.sample_count = n;
  estimate.delta = delta;
  return estimate;
}

VectorEstimate smoothed_gradient_stokes(const FeasibleSet& set, const Eigen::VectorXd& y,
                                        double delta, long long n, Rng& rng) {
  check_samples(n, 2, "smoothed_gradient_stokes");
  check_delta(delta);
  const int d = set.dim();
  const double scale = delta * d;
  RunningMoments moments(d);
  for (long long i = 0; i < n; ++i) {
    const Eigen::VectorXd v = sample_unit_sphere(rng, d);
    moments.add(scale * linear_max(set, y + v / delta) * v);
  }
  return to_estimate(moments);
}

VectorEstimate expected_fpl_point_mc(const FeasibleSet& set, const Eigen::VectorXd& cum_grad,
                                     double delta, long long n, Rng& rng) {
  check_samples(n, 1, "expected_fpl_point_mc");
  check_delta(delta);
  const int d = set.dim();
  RunningMoments moments(d);
  for (long long i = 0; i < n; ++i) {
    moments.add(linear_argmax(set, -cum_grad + sample_unit_ball(rng, d) / delta));
  }
  return to_estimate(moments);
}

ScalarEstimate smoothed_value_central_difference(const FeasibleSet& set, const Eigen::VectorXd& y,
                                                 const Eigen::VectorXd& direction, double step,
                                                 double delta, long long n, Rng& rng) {
  check_samples(n, 2, "smoothed_value_central_difference");
  check_delta(delta);
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  const int d = set.dim();
  const Eigen::VectorXd offset = step * direction;
  RunningMoments moments(1);
  for (long long i = 0; i < n; ++i) {
    const Eigen::VectorXd z = y + sample_unit_ball(rng, d) / delta;
    moments.add((linear_max(set, z + offset) - linear_max(set, z - offset)) / (2.0 * step));
  }
  return {moments.mean()[0], moments.std_error()[0], n};
}

Eigen::VectorXd reference_mean(const VectorSampler& sampler, long long n, Rng& rng) {
  check_samples(n, 1, "reference_mean");
  Eigen::VectorXd sum = sampler(rng);
  for (long long i = 1; i < n; ++i) sum += sampler(rng);
  return sum / static_cast<double>(n);
}

MseEstimate empirical_mse(const VectorSampler& sampler, double norm_bound, int m, int trials,
                          Rng& rng, const Eigen::VectorXd& reference) {
  if (m < 1 || trials < 1) throw ConfigError("empirical_mse needs m >= 1 and trials >= 1");
  const double limit = norm_bound * (1.0 + 1e-12);
  RunningMoments errors(1);
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(reference.size());
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd z = sampler(rng);
      if (z.norm() > limit) {
        throw InvariantError("sampler produced a vector of norm " + std::to_string(z.norm()) +
                             " > D = " + std::to_string(norm_bound));
      }
      sum += z;
    }
    errors.add((sum / static_cast<double>(m) - reference).squaredNorm());
  }
  MseEstimate estimate;
  estimate.mse = errors.mean()[0];
  estimate.std_error = trials > 1 ? errors.std_error()[0] : 0.0;
  estimate.bound = 4.0 * norm_bound * norm_bound / m;
  estimate.samples_m = m;
  estimate.trials = trials;
  return estimate;
}

MseEstimate empirical_mse(const VectorSampler& sampler, double norm_bound, int m, int trials,
                          Rng& rng, long long reference_samples) {
  const Eigen::VectorXd reference = reference_mean(sampler, reference_samples, rng);
  return empirical_mse(sampler, norm_bound, m, trials, rng, reference);
}

LipschitzAudit lipschitz_audit(const FeasibleSet& set, int pairs, Rng& rng) {
  const int d = set.dim();
  LipschitzAudit audit;
  audit.bound = set.norm_bound();
  audit.pairs = pairs;
  for (int i = 0; i < pairs; ++i) {
    const double base_scale = std::pow(10.0, 6.0 * rng.uniform() - 3.0);
    const double gap_scale = std::pow(10.0, 6.0 * rng.uniform() - 3.0);
    const Eigen::VectorXd y1 = base_scale * sample_unit_sphere(rng, d);
    // Every fourth pair moves radially, where the ratio is tight.
    const Eigen::VectorXd step =
        (i % 4 == 0) ? Eigen::VectorXd(y1 * gap_scale / base_scale)
                     : Eigen::VectorXd(gap_scale * sample_unit_sphere(rng, d));
    const Eigen::VectorXd y2 = y1 + step;
    const double gap = (y1 - y2).norm();
    if (gap == 0.0) continue;
    audit.max_ratio =
        std::max(audit.max_ratio, std::abs(linear_max(set, y1) - linear_max(set, y2)) / gap);
  }
  return audit;
}

SmoothAudit smooth_inequality_audit(const LossFunction& loss, const FeasibleSet& set, int pairs,
                                    Rng& rng) {
  SmoothAudit audit;
  audit.pairs = pairs;
  const double beta = loss.smoothness();
  for (int i = 0; i < pairs; ++i) {
    const Eigen::VectorXd x = sample_feasible(set, rng);
    const Eigen::VectorXd y = sample_feasible(set, rng);
    const Eigen::VectorXd diff = x - y;
    const double lhs = loss.gradient(y).dot(diff);
    const double rhs = loss.gradient(x).dot(diff) + beta * diff.squaredNorm();
    audit.max_violation = std::max(audit.max_violation, lhs - rhs);
  }
  return audit;
}

nlohmann::json to_json(const AuditRecord& record) {
  return {{"audit_name", record.audit_name},
          {"estimate", record.estimate},
          {"stderr", record.std_error},
          {"bound", record.bound},
          {"pass", record.pass}};
}

ReferenceCache::ReferenceCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  try {
    entries_ = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    entries_ = nlohmann::json::object();
  }
}

Eigen::VectorXd ReferenceCache::get_or_compute(const std::string& fixture, std::uint64_t seed,
                                               long long n, const VectorSampler& sampler) {
  const std::string key = fixture + "|seed=" + std::to_string(seed) + "|n=" + std::to_string(n);
  if (entries_.contains(key)) {
    const auto values = entries_[key].at("mean").get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  Rng rng = substream(seed, StreamDomain::analysis, 0, fnv1a64(fixture));
  Eigen::VectorXd mean = reference_mean(sampler, n, rng);
  entries_[key] = {{"fixture", fixture},
                   {"seed", seed},
                   {"samples", n},
                   {"mean", std::vector<double>(mean.data(), mean.data() + mean.size())}};
  return mean;
}

void ReferenceCache::save() const {
  if (path_.empty()) return;
  std::ofstream out(path_);
  out << entries_.dump(2) << '\n';
}

namespace {

long long scaled(long long n, double scale, long long minimum = 2) {
  return std::max(minimum, static_cast<long long>(std::llround(static_cast<double>(n) * scale)));
}

}  // namespace

std::vector<AuditRecord> run_audit_suite(const AuditOptions& options) {
  std::vector<AuditRecord> records;
  const double s = options.scale;
  std::uint64_t stream = 0;
  auto next_rng = [&] { return substream(options.seed, StreamDomain::analysis, ++stream); };

  // Value oracle is D-Lipschitz.
  {
    constexpr int d = 6;
    const std::vector<FeasibleSet> sets = {
        FeasibleSet::ball(d, 1.0),
        FeasibleSet::box(Eigen::VectorXd::Constant(d, -1.0), Eigen::VectorXd::Constant(d, 1.0)),
        FeasibleSet::simplex(d, 1.0),
        FeasibleSet::l1_ball(d, 1.0),
    };
    for (const auto& set : sets) {
      Rng rng = next_rng();
      const auto audit = lipschitz_audit(set, static_cast<int>(scaled(10'000, s)), rng);
      const double bound = audit.bound * (1.0 + 1e-9);
      records.push_back({"lipschitz_" + std::string(set.kind_name()), audit.max_ratio, 0.0, bound,
                         audit.max_ratio <= bound});
    }
  }

  // Smooth-function inequality on quadratic and linear losses.
  {
    constexpr int d = 4;
    const auto set = FeasibleSet::ball(d, 1.0);
    Rng center_rng = next_rng();
    const auto quadratic =
        LossFunction::squared_distance(sample_unit_ball(center_rng, d), 2.0);
    const auto linear = LossFunction::linear(Eigen::VectorXd::Unit(d, 1), 1.0);
    for (const auto& [name, loss] :
         {std::pair{"smooth_inequality_quadratic", quadratic}, std::pair{"smooth_inequality_linear", linear}}) {
      Rng rng = next_rng();
      const auto audit = smooth_inequality_audit(loss, set, static_cast<int>(scaled(1'000, s)), rng);
      records.push_back({name, audit.max_violation, 0.0, 1e-9, audit.max_violation <= 1e-9});
    }
  }

  // Sampling variance 4 D^2 / m on ball-oracle outputs (D = 1).
  {
    constexpr int d = 5;
    constexpr double delta = 0.5;
    const auto set = FeasibleSet::ball(d, 1.0);
    Eigen::VectorXd anchor(d);
    anchor << 0.8, -0.4, 0.3, 0.0, 0.2;
    const VectorSampler sampler = [set, anchor, delta](Rng& rng) {
      return linear_argmax(set, anchor + sample_unit_ball(rng, d) / delta);
    };
    const long long reference_n = scaled(10'000'000, s);
    Eigen::VectorXd reference;
    if (options.cache != nullptr) {
      reference = options.cache->get_or_compute("ball_oracle_output", options.seed, reference_n, sampler);
    } else {
      Rng rng = next_rng();
      reference = reference_mean(sampler, reference_n, rng);
    }
    for (int m : {1, 10, 100}) {
      Rng rng = next_rng();
      const auto est = empirical_mse(sampler, 1.0, m, static_cast<int>(scaled(10'000, s)), rng, reference);
      records.push_back({"variance_bound_m" + std::to_string(m), est.mse, est.std_error, est.bound,
                         est.mse <= est.bound + 4.0 * est.std_error});
    }
  }

  // Smoothed value at zero: E||v|| / delta = d / ((d + 1) delta) <= D / delta.
  {
    constexpr int d = 3;
    constexpr double delta = 0.5;
    const auto set = FeasibleSet::ball(d, 1.0);
    Rng rng = next_rng();
    const auto est = smoothed_value_mc(set, Eigen::VectorXd::Zero(d), delta, scaled(200'000, s), rng);
    const double exact = d / ((d + 1.0) * delta);
    records.push_back({"smoothed_value_zero_exact", est.value_mean, est.value_stderr, exact,
                       std::abs(est.value_mean - exact) <= 4.0 * est.value_stderr});
    const double bound = set.norm_bound() / delta;
    records.push_back({"smoothed_value_zero_bound", est.value_mean, est.value_stderr, bound,
                       est.value_mean + 4.0 * est.value_stderr <= bound});
  }

  // Two representations of grad h*_delta, plus a finite-difference check.
  {
    constexpr int d = 3;
    constexpr double delta = 0.5;
    const auto set = FeasibleSet::ball(d, 1.0);
    Rng anchor_rng = next_rng();
    const int anchors = 5;
    for (int a = 0; a < anchors; ++a) {
      const Eigen::VectorXd y = 2.0 * sample_unit_ball(anchor_rng, d);
      Rng stokes_rng = next_rng();
      Rng ball_rng = next_rng();
      Rng fd_rng = next_rng();
      const auto stokes = smoothed_gradient_stokes(set, y, delta, scaled(100'000, s), stokes_rng);
      const auto ball = expected_fpl_point_mc(set, -y, delta, scaled(100'000, s), ball_rng);
      double worst_z = 0.0;
      for (int i = 0; i < d; ++i) {
        const double sigma = std::hypot(stokes.std_error[i], ball.std_error[i]);
        worst_z = std::max(worst_z, std::abs(stokes.mean[i] - ball.mean[i]) / sigma);
      }
      records.push_back({"stokes_vs_ball_average_" + std::to_string(a), worst_z, 1.0, 4.0,
                         worst_z <= 4.0});

      const auto fd = smoothed_value_central_difference(set, y, Eigen::VectorXd::Unit(d, 0), 1e-2,
                                                        delta, scaled(1'000'000, s), fd_rng);
      const double sigma = std::hypot(stokes.std_error[0], fd.std_error);
      const double z = std::abs(stokes.mean[0] - fd.mean) / sigma;
      records.push_back({"stokes_vs_finite_difference_" + std::to_string(a), z, 1.0, 4.0, z <= 4.0});
    }
  }
  return records;
}

}  // namespace pfol
