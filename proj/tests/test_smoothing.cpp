#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "pfol/errors.hpp"
#include "pfol/smoothing.hpp"

using namespace pfol;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// E||v|| for v uniform in the unit d-ball by midpoint quadrature of
// the radial density d r^{d-1}.
double mean_radius_quadrature(int d) {
  constexpr int steps = 200'000;
  double total = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double r = (i + 0.5) / steps;
    total += r * d * std::pow(r, d - 1) / steps;
  }
  return total;
}

}  // namespace

TEST(SmoothedValue, ZeroPointOnBallMatchesRadialIntegral) {
  constexpr int d = 4;
  constexpr double delta = 0.7;
  const double exact = mean_radius_quadrature(d) / delta;
  EXPECT_NEAR(exact, d / (d + 1.0) / delta, 1e-9);
  Rng rng(10);
  const auto est = smoothed_value_mc(FeasibleSet::ball(d, 1.0), Eigen::VectorXd::Zero(d), delta,
                                     200'000, rng);
  EXPECT_NEAR(est.value_mean, exact, 4.0 * est.value_stderr);
  EXPECT_LE(est.value_mean, 1.0 / delta + 4.0 * est.value_stderr);
  EXPECT_EQ(est.sample_count, 200'000);
  EXPECT_EQ(est.delta, delta);
}

TEST(SmoothedValue, HugeDeltaRecoversValueOracle) {
  const auto set = FeasibleSet::simplex(3, 1.0);
  const Eigen::VectorXd y = vec({0.2, 0.9, -0.3});
  Rng rng(2);
  const auto est = smoothed_value_mc(set, y, 1e6, 1000, rng);
  EXPECT_NEAR(est.value_mean, linear_max(set, y), 1e-5);
}

TEST(SmoothedValue, StderrDefinitionAndPreconditions) {
  Rng rng(3);
  const auto set = FeasibleSet::ball(2, 1.0);
  EXPECT_THROW(smoothed_value_mc(set, vec({0, 0}), 1.0, 1, rng), ConfigError);
  EXPECT_THROW(smoothed_value_mc(set, vec({0, 0}), 0.0, 10, rng), ConfigError);
  EXPECT_THROW(smoothed_gradient_stokes(set, vec({0, 0}), 1.0, 1, rng), ConfigError);
  EXPECT_THROW(expected_fpl_point_mc(set, vec({0, 0}), 1.0, 0, rng), ConfigError);
  // Recompute the value statistics from the same stream.
  Rng a(77);
  Rng b(77);
  const auto est = smoothed_value_mc(set, vec({0.5, -0.5}), 0.8, 500, a);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double value = linear_max(set, vec({0.5, -0.5}) + sample_unit_ball(b, 2) / 0.8);
    sum += value;
    sum_sq += value * value;
  }
  const double mean = sum / 500;
  const double sd = std::sqrt((sum_sq - 500 * mean * mean) / 499);
  EXPECT_NEAR(est.value_mean, mean, 1e-12);
  EXPECT_NEAR(est.value_stderr, sd / std::sqrt(500.0), 1e-9);
}

TEST(SmoothedValue, MonotoneInSetInclusion) {
  const Eigen::VectorXd y = vec({0.3, -0.6, 0.2});
  Rng r1(4);
  Rng r2(5);
  const auto small = smoothed_value_mc(FeasibleSet::ball(3, 1.0), y, 0.5, 50'000, r1);
  const auto large = smoothed_value_mc(FeasibleSet::ball(3, 2.0), y, 0.5, 50'000, r2);
  EXPECT_LE(small.value_mean, large.value_mean + std::hypot(small.value_stderr, large.value_stderr));
}

TEST(SmoothedValue, IndependentStreamsAgree) {
  const auto set = FeasibleSet::l1_ball(3, 1.0);
  const Eigen::VectorXd y = vec({1.0, 0.5, -0.25});
  Rng r1(100);
  Rng r2(200);
  const auto a = smoothed_value_mc(set, y, 0.5, 50'000, r1);
  const auto b = smoothed_value_mc(set, y, 0.5, 50'000, r2);
  EXPECT_LE(std::abs(a.value_mean - b.value_mean), 4.0 * std::hypot(a.value_stderr, b.value_stderr));
}

TEST(Stokes, EstimateNormWithinSetBound) {
  const auto set = FeasibleSet::ball(3, 1.0);
  Rng rng(9);
  const auto est = smoothed_gradient_stokes(set, vec({0.4, 0.1, -0.2}), 0.5, 100'000, rng);
  EXPECT_LE(est.mean.norm(), 1.0 + 4.0 * est.std_error.norm());
}

TEST(Stokes, AgreesWithBallAverageAndFiniteDifference) {
  constexpr int d = 3;
  const auto set = FeasibleSet::ball(d, 1.0);
  Rng anchors(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int a = 0; a < 3; ++a) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) y[i] = normal(anchors);
    Rng r1(10 + a);
    Rng r2(20 + a);
    Rng r3(30 + a);
    const auto st = smoothed_gradient_stokes(set, y, 0.5, 100'000, r1);
    const auto fpl = expected_fpl_point_mc(set, -y, 0.5, 100'000, r2);
    for (int i = 0; i < d; ++i) {
      EXPECT_LE(std::abs(st.mean[i] - fpl.mean[i]), 4.0 * std::hypot(st.std_error[i], fpl.std_error[i]));
    }
    const auto fd = smoothed_value_central_difference(set, y, Eigen::VectorXd::Unit(d, 0), 1e-2, 0.5,
                                                      200'000, r3);
    EXPECT_LE(std::abs(st.mean[0] - fd.mean), 4.0 * std::hypot(st.std_error[0], fd.std_error));
  }
}

TEST(ExpectedFplPoint, SymmetryAndLimits) {
  const auto set = FeasibleSet::ball(3, 1.0);
  constexpr long long n = 50'000;
  Rng rng(6);
  const auto zero = expected_fpl_point_mc(set, Eigen::VectorXd::Zero(3), 0.5, n, rng);
  EXPECT_LT(zero.mean.cwiseAbs().maxCoeff(), 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
  const Eigen::VectorXd g = vec({0.5, -1.0, 0.25});
  const auto tiny_delta = expected_fpl_point_mc(set, g, 1e-8, n, rng);
  EXPECT_LT(tiny_delta.mean.cwiseAbs().maxCoeff(), 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
  const auto huge_delta = expected_fpl_point_mc(set, g, 1e8, 100, rng);
  EXPECT_LT((huge_delta.mean - linear_argmax(set, -g)).norm(), 1e-7);
}

TEST(EmpiricalMse, VarianceBound) {
  const auto set = FeasibleSet::ball(4, 1.0);
  const Eigen::VectorXd anchor = vec({0.3, 0.2, -0.1, 0.0});
  const VectorSampler sampler = [set, anchor](Rng& rng) {
    return linear_argmax(set, anchor + sample_unit_ball(rng, 4) / 0.5);
  };
  Rng ref_rng(1);
  const Eigen::VectorXd reference = reference_mean(sampler, 1'000'000, ref_rng);
  for (int m : {1, 100}) {
    Rng rng(static_cast<std::uint64_t>(m));
    const auto est = empirical_mse(sampler, 1.0, m, 2000, rng, reference);
    EXPECT_DOUBLE_EQ(est.bound, 4.0 / m);
    EXPECT_LE(est.mse, est.bound + 4.0 * est.std_error) << "m=" << m;
    EXPECT_EQ(est.samples_m, m);
    EXPECT_EQ(est.trials, 2000);
  }
}

TEST(EmpiricalMse, ConstantSamplerHasZeroError) {
  const VectorSampler constant = [](Rng&) { return vec({0.1, 0.2}); };
  Rng rng(3);
  const auto est = empirical_mse(constant, 1.0, 5, 100, rng, 1000);
  EXPECT_LE(est.mse, est.std_error + 1e-20);
}

TEST(EmpiricalMse, RejectsOversizedDraws) {
  const VectorSampler big = [](Rng&) { return vec({2.0, 0.0}); };
  Rng rng(3);
  EXPECT_THROW(empirical_mse(big, 1.0, 1, 10, rng, vec({0, 0})), InvariantError);
  EXPECT_THROW(empirical_mse(big, 1.0, 0, 10, rng, vec({0, 0})), ConfigError);
}

TEST(LipschitzAudit, RatiosBoundedByNormBound) {
  Rng rng(12);
  const auto ball = lipschitz_audit(FeasibleSet::ball(3, 1.0), 2000, rng);
  EXPECT_LE(ball.max_ratio, 1.0 + 1e-9);
  EXPECT_GT(ball.max_ratio, 0.99);
  const auto simplex = lipschitz_audit(FeasibleSet::simplex(4, 1.0), 2000, rng);
  EXPECT_LE(simplex.max_ratio, 1.0 + 1e-9);
  constexpr int d = 5;
  const auto box = lipschitz_audit(
      FeasibleSet::box(-Eigen::VectorXd::Ones(d), Eigen::VectorXd::Ones(d)), 2000, rng);
  EXPECT_DOUBLE_EQ(box.bound, std::sqrt(5.0));
  EXPECT_LE(box.max_ratio, std::sqrt(5.0) * (1.0 + 1e-9));
  EXPECT_EQ(box.pairs, 2000);
}

TEST(SmoothInequalityAudit, QuadraticLinearAndDense) {
  Rng rng(13);
  const auto set = FeasibleSet::ball(4, 1.0);
  const auto quad = LossFunction::squared_distance(vec({0.1, 0.2, 0.3, 0.4}), 3.0);
  EXPECT_LE(smooth_inequality_audit(quad, set, 1000, rng).max_violation, 1e-9);
  const auto lin = LossFunction::linear(vec({1, 0, 0, 0}), 1.0);
  EXPECT_EQ(smooth_inequality_audit(lin, set, 1000, rng).max_violation, 0.0);

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = normal(rng);
  const Eigen::MatrixXd h = a.transpose() * a;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(4);
  double top = 0.0;
  for (int it = 0; it < 1000; ++it) {
    v = h * v;
    top = v.norm();
    v /= top;
  }
  const auto dense = LossFunction::quadratic(h, vec({0.5, 0, 0, -0.5}), 0.0, 100.0, top);
  EXPECT_LE(smooth_inequality_audit(dense, set, 1000, rng).max_violation, 1e-9);
}

TEST(AuditRecord, JsonKeys) {
  const AuditRecord record{"x", 1.5, 0.25, 2.0, true};
  const auto j = to_json(record);
  EXPECT_EQ(j.at("audit_name"), "x");
  EXPECT_EQ(j.at("estimate"), 1.5);
  EXPECT_EQ(j.at("stderr"), 0.25);
  EXPECT_EQ(j.at("bound"), 2.0);
  EXPECT_EQ(j.at("pass"), true);
}

TEST(ReferenceCache, PersistsAndReuses) {
  const auto path = std::filesystem::temp_directory_path() / "pfol_reference_cache_test.json";
  std::filesystem::remove(path);
  int calls = 0;
  const VectorSampler sampler = [&calls](Rng& rng) {
    ++calls;
    return sample_unit_ball(rng, 2);
  };
  Eigen::VectorXd first;
  {
    ReferenceCache cache(path.string());
    first = cache.get_or_compute("fixture", 3, 1000, sampler);
    cache.save();
  }
  EXPECT_EQ(calls, 1000);
  ReferenceCache reloaded(path.string());
  EXPECT_EQ(reloaded.get_or_compute("fixture", 3, 1000, sampler), first);
  EXPECT_EQ(calls, 1000);
  reloaded.get_or_compute("fixture", 4, 1000, sampler);
  EXPECT_EQ(calls, 2000);
  std::filesystem::remove(path);
}

TEST(AuditSuite, SmallScaleRunPasses) {
  AuditOptions options;
  options.seed = 3;
  options.scale = 0.01;
  const auto records = run_audit_suite(options);
  EXPECT_GE(records.size(), 10u);
  for (const auto& r : records) EXPECT_TRUE(r.pass) << r.audit_name << " " << r.estimate;
}
