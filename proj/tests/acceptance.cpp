// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pfol/experiment.hpp"
#include "pfol/feasible_set.hpp"
#include "pfol/random.hpp"
#include "pfol/smoothing.hpp"

using namespace pfol;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_seconds;
  std::function<Outcome()> body;
};

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) seeds[static_cast<std::size_t>(i)] = first + static_cast<std::uint64_t>(i);
  return seeds;
}

ExperimentConfig adaptive_quadratic_config(LearnerKind learner) {
  ExperimentConfig config;
  config.learner = learner;
  config.set = FeasibleSet::ball(5, 1.0);
  config.adversary.kind = AdversaryKind::quadratic_adaptive;
  config.adversary.radius = 1.0;
  config.adversary.seed = 17;
  return config;
}

const std::vector<long long> kScalingGrid = {1 << 10, 1 << 11, 1 << 12, 1 << 13,
                                             1 << 14, 1 << 15, 1 << 16};

std::vector<RunSummary> run_over_grid(const ExperimentConfig& base) {
  SweepAxis axis{"T", {}};
  for (long long T : kScalingGrid) axis.values.emplace_back(T);
  const std::vector<SweepAxis> grid = {axis};
  return sweep(base, grid, 1);
}

bool summaries_clean(const std::vector<RunSummary>& summaries, std::ostringstream& detail) {
  bool clean = true;
  for (const auto& s : summaries) {
    for (const auto& e : s.errors) {
      detail << " error(T=" << s.config.rounds << "): " << e << ';';
      clean = false;
    }
  }
  return clean;
}

Outcome oracle_equivalence() {
  Rng rng(20240101);
  std::normal_distribution<double> normal(0.0, 1.0);
  long long checked = 0;
  long long mismatches = 0;
  long long ties = 0;
  for (int p = 0; p < 50; ++p) {
    std::vector<Eigen::VectorXd> vertices;
    for (int v = 0; v < 20; ++v) {
      Eigen::VectorXd x(6);
      for (int i = 0; i < 6; ++i) x[i] = normal(rng);
      vertices.push_back(x);
    }
    // Every other polytope repeats a few vertices so exact ties occur.
    if (p % 2 == 1) {
      vertices[19] = vertices[3];
      vertices[12] = vertices[0];
    }
    const auto set = FeasibleSet::polytope(vertices);
    for (int q = 0; q < 1000; ++q) {
      Eigen::VectorXd y(6);
      for (int i = 0; i < 6; ++i) y[i] = normal(rng);
      const Eigen::VectorXd a = linear_argmax(set, y);
      const Eigen::VectorXd b = brute_force_argmax(vertices, y);
      // Independent scan: first index attaining the maximum.
      std::size_t best = 0;
      double best_value = vertices[0].dot(y);
      for (std::size_t i = 1; i < vertices.size(); ++i) {
        const double value = vertices[i].dot(y);
        if (value > best_value) {
          best_value = value;
          best = i;
        } else if (value == best_value) {
          ++ties;
        }
      }
      const bool same = a.size() == b.size() &&
                        std::memcmp(a.data(), b.data(), sizeof(double) * 6) == 0 &&
                        std::memcmp(a.data(), vertices[best].data(), sizeof(double) * 6) == 0;
      if (!same) ++mismatches;
      ++checked;
    }
  }
  std::ostringstream detail;
  detail << checked << " queries, " << mismatches << " mismatches, " << ties << " exact ties";
  return {mismatches == 0 && checked == 50'000, detail.str()};
}

Outcome lipschitz() {
  Rng rng(7);
  Eigen::VectorXd lower(6);
  Eigen::VectorXd upper(6);
  lower << -1.0, -0.5, -2.0, 0.0, -0.3, -1.5;
  upper << 1.0, 0.5, 0.5, 1.0, 0.3, 0.0;
  const std::vector<FeasibleSet> sets = {FeasibleSet::ball(6, 1.5), FeasibleSet::box(lower, upper),
                                         FeasibleSet::simplex(6, 2.0), FeasibleSet::l1_ball(6, 1.0)};
  bool pass = true;
  std::ostringstream detail;
  for (const auto& set : sets) {
    const auto audit = lipschitz_audit(set, 10'000, rng);
    const bool ok = audit.pairs == 10'000 && audit.max_ratio <= audit.bound * (1.0 + 1e-9) &&
                    audit.bound == set.norm_bound();
    pass = pass && ok;
    detail << set.kind_name() << " ratio " << audit.max_ratio << " / D " << audit.bound << "; ";
  }
  return {pass, detail.str()};
}

Outcome variance() {
  constexpr int d = 5;
  constexpr double delta = 0.5;
  const auto set = FeasibleSet::ball(d, 1.0);
  Eigen::VectorXd anchor(d);
  anchor << 0.8, -0.4, 0.3, 0.0, 0.2;
  const VectorSampler sampler = [set, anchor, delta](Rng& rng) {
    return linear_argmax(set, anchor + sample_unit_ball(rng, d) / delta);
  };
  Rng reference_rng(99);
  const Eigen::VectorXd reference = reference_mean(sampler, 10'000'000, reference_rng);
  bool pass = true;
  std::ostringstream detail;
  for (int m : {1, 10, 100}) {
    Rng rng(1000 + static_cast<std::uint64_t>(m));
    const auto est = empirical_mse(sampler, 1.0, m, 10'000, rng, reference);
    const double limit = 4.0 / m + 4.0 * est.std_error;
    const bool ok = est.mse <= limit && est.trials == 10'000;
    pass = pass && ok;
    detail << "m=" << m << " mse " << est.mse << " <= " << limit << "; ";
  }
  return {pass, detail.str()};
}

Outcome stokes() {
  constexpr int d = 3;
  constexpr double delta = 0.5;
  const auto set = FeasibleSet::ball(d, 1.0);
  Rng anchor_rng(31337);
  std::normal_distribution<double> normal(0.0, 1.0);
  bool pass = true;
  double worst_fpl = 0.0;
  double worst_fd = 0.0;
  for (int a = 0; a < 5; ++a) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) y[i] = normal(anchor_rng);
    Rng r1 = substream(5, StreamDomain::analysis, static_cast<std::uint64_t>(a), 1);
    Rng r2 = substream(5, StreamDomain::analysis, static_cast<std::uint64_t>(a), 2);
    const auto st = smoothed_gradient_stokes(set, y, delta, 100'000, r1);
    const auto fpl = expected_fpl_point_mc(set, -y, delta, 100'000, r2);
    for (int i = 0; i < d; ++i) {
      const double z = std::abs(st.mean[i] - fpl.mean[i]) /
                       std::hypot(st.std_error[i], fpl.std_error[i]);
      worst_fpl = std::max(worst_fpl, z);
      Rng r3 = substream(5, StreamDomain::analysis, static_cast<std::uint64_t>(a), 10 + i);
      const auto fd = smoothed_value_central_difference(set, y, Eigen::VectorXd::Unit(d, i), 1e-2,
                                                        delta, 1'000'000, r3);
      const double zfd = std::abs(st.mean[i] - fd.mean) / std::hypot(st.std_error[i], fd.std_error);
      worst_fd = std::max(worst_fd, zfd);
    }
  }
  pass = worst_fpl <= 4.0 && worst_fd <= 4.0;
  std::ostringstream detail;
  detail << "max z (stokes vs ball average) " << worst_fpl << ", max z (stokes vs finite difference) "
         << worst_fd << ", limit 4";
  return {pass, detail.str()};
}

Outcome expected_bound() {
  ExperimentConfig config = adaptive_quadratic_config(LearnerKind::sampled_fpl);
  config.rounds = 1 << 12;
  config.samples = 64;
  config.seeds = seed_range(1, 50);
  const auto summaries = run_cells(std::vector<ExperimentConfig>{config}, 1);
  const auto& s = summaries.front();
  std::ostringstream detail;
  const bool clean = summaries_clean(summaries, detail);
  const double bound = theoretical_bound(config);
  detail << " mean regret " << s.mean_regret << " (" << s.final_regrets.size()
         << " seeds) <= bound " << bound << " + band " << s.correction_band;
  return {clean && s.final_regrets.size() == 50 && s.mean_regret <= bound + s.correction_band,
          detail.str()};
}

Outcome ospf_scaling() {
  ExperimentConfig base = adaptive_quadratic_config(LearnerKind::ospf);
  base.blocking = BlockingMode::smooth;
  base.seeds = seed_range(1, 20);
  const auto summaries = run_over_grid(base);
  std::ostringstream detail;
  bool pass = summaries_clean(summaries, detail) && summaries.size() == kScalingGrid.size();
  std::vector<double> ts;
  std::vector<double> means;
  for (const auto& s : summaries) {
    const ResolvedParams p = resolve(s.config);
    const double D = p.norm_bound;
    const double G = p.grad_bound;
    const double n = static_cast<double>(p.blocks);
    const double k = static_cast<double>(p.block_size);
    const double blocked_bound = 2.0 * D * G * std::sqrt(static_cast<double>(p.dim)) * std::sqrt(n) * k +
                             4.0 * p.smoothness * D * D * n;
    const bool ok = s.final_regrets.size() == 20 && s.mean_regret <= blocked_bound + s.correction_band;
    pass = pass && ok;
    if (!ok) detail << " T=" << s.config.rounds << " mean " << s.mean_regret << " > " << blocked_bound << ';';
    ts.push_back(static_cast<double>(s.config.rounds));
    means.push_back(s.mean_regret);
  }
  const auto fit = fit_exponent(ts, means);
  pass = pass && fit.slope >= 0.45 && fit.slope <= 0.78;
  detail << " slope " << fit.slope << " (theory 2/3 = " << 2.0 / 3.0 << ", window [0.45, 0.78]), r^2 "
         << fit.r_squared;
  return {pass, detail.str()};
}

Outcome linear_scaling() {
  ExperimentConfig base;
  base.learner = LearnerKind::sampled_fpl;
  base.samples = 1;
  base.set = FeasibleSet::ball(5, 1.0);
  base.adversary.kind = AdversaryKind::linear_stochastic;
  base.adversary.direction = Eigen::VectorXd::Unit(5, 0) * 0.5;
  base.adversary.noise = 0.5;
  base.adversary.seed = 23;
  base.seeds = seed_range(1, 20);
  const auto summaries = run_over_grid(base);
  std::ostringstream detail;
  bool pass = summaries_clean(summaries, detail) && summaries.size() == kScalingGrid.size();
  std::vector<double> ts;
  std::vector<double> means;
  for (const auto& s : summaries) {
    ts.push_back(static_cast<double>(s.config.rounds));
    means.push_back(s.mean_regret);
  }
  const auto fit = fit_exponent(ts, means);
  pass = pass && fit.slope >= 0.4 && fit.slope <= 0.62;
  detail << " slope " << fit.slope << " (theory 0.5, window [0.4, 0.62]), r^2 " << fit.r_squared;
  return {pass, detail.str()};
}

Outcome quantile() {
  ExperimentConfig config = adaptive_quadratic_config(LearnerKind::sampled_fpl);
  config.rounds = 1 << 12;
  config.samples = 64;
  config.seeds = seed_range(1001, 200);
  const auto summaries = run_cells(std::vector<ExperimentConfig>{config}, 1);
  std::ostringstream detail;
  const bool clean = summaries_clean(summaries, detail);
  const auto report = quantile_check(summaries, 0.05);
  const auto& e = report.entries.front();
  detail << " 95th percentile " << e.quantile << " over " << summaries.front().final_regrets.size()
         << " seeds <= bound " << e.bound << " + band " << e.correction_band;
  return {clean && e.has_bound && report.all_pass && summaries.front().final_regrets.size() == 200,
          detail.str()};
}

Outcome budgets() {
  constexpr long long T = 1000;
  bool pass = true;
  std::ostringstream detail;
  for (auto kind : {LearnerKind::sampled_fpl, LearnerKind::ospf, LearnerKind::expected_fpl_mc,
                    LearnerKind::ogd, LearnerKind::ofw}) {
    ExperimentConfig config = adaptive_quadratic_config(kind);
    config.adversary.kind = AdversaryKind::quadratic_stochastic;
    config.rounds = T;
    config.samples = 8;
    config.eval_samples = 16;
    const RegretTrace trace = run_game(config, 3);
    const std::uint64_t calls = trace.oracle_calls();
    bool ok = trace.grad_evals() == static_cast<std::uint64_t>(T);
    switch (kind) {
      case LearnerKind::sampled_fpl:
        ok = ok && calls == 8 * T;
        break;
      case LearnerKind::ospf:
        ok = ok && calls <= static_cast<std::uint64_t>(T) && calls == expected_oracle_calls(config);
        break;
      case LearnerKind::expected_fpl_mc:
        ok = ok && calls == 16 * T;
        break;
      case LearnerKind::ogd:
        ok = ok && calls == 0;
        break;
      case LearnerKind::ofw:
        ok = ok && calls == static_cast<std::uint64_t>(T);
        break;
    }
    pass = pass && ok;
    detail << to_string(kind) << " calls=" << calls << " grads=" << trace.grad_evals() << "; ";
  }
  return {pass, detail.str()};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

Outcome equivalence() {
  ExperimentConfig fpl = adaptive_quadratic_config(LearnerKind::sampled_fpl);
  fpl.rounds = 1000;
  fpl.samples = 1;
  ExperimentConfig ospf = fpl;
  ospf.learner = LearnerKind::ospf;
  ospf.block_size = 1;
  const RegretTrace a = run_game(fpl, 42);
  const RegretTrace b = run_game(ospf, 42);
  long long differing = 0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    bool same = same_bits(x.loss, y.loss) && same_bits(x.cum_loss, y.cum_loss) &&
                same_bits(x.cum_regret, y.cum_regret) && x.oracle_calls == y.oracle_calls &&
                x.grad_evals == y.grad_evals && x.action.size() == y.action.size();
    for (Eigen::Index j = 0; same && j < x.action.size(); ++j) {
      same = same_bits(x.action[j], y.action[j]);
    }
    if (!same) ++differing;
  }
  std::ostringstream detail;
  detail << a.rows.size() << " rows compared, " << differing << " differ; delta " << a.resolved_delta
         << " vs " << b.resolved_delta;
  return {a.rows.size() == 1000 && b.rows.size() == 1000 && differing == 0 &&
              same_bits(a.resolved_delta, b.resolved_delta),
          detail.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence on random polytopes", 5, oracle_equivalence},
      {2, "Lipschitz audit of the value oracle", 5, lipschitz},
      {3, "sampling variance 4D^2/m", 30, variance},
      {4, "sphere-sampling gradient cross-check", 60, stokes},
      {5, "expected regret bound, sampled FPL", 180, expected_bound},
      {6, "OSPF regret scaling (smooth blocking)", 600, ospf_scaling},
      {7, "linear losses with one sample per round", 180, linear_scaling},
      {8, "high-probability regret quantile", 600, quantile},
      {9, "oracle and gradient budgets", 1, budgets},
      {10, "OSPF(k=1) equals sampled FPL(m=1)", 1, equivalence},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.time_limit_seconds;
    const bool pass = outcome.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s | %s | %.2fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), outcome.detail.c_str(), seconds, c.time_limit_seconds,
                in_time ? "" : " TIME LIMIT EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
