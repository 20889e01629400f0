#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pfol/adversary.hpp"
#include "pfol/feasible_set.hpp"
#include "pfol/learners.hpp"

namespace pfol {

enum class LearnerKind { sampled_fpl, ospf, expected_fpl_mc, ogd, ofw };

std::string_view to_string(LearnerKind kind);
LearnerKind learner_kind_from_string(std::string_view name);

/// Everything that determines one game up to the seed.
struct ExperimentConfig {
  LearnerKind learner = LearnerKind::sampled_fpl;
  FeasibleSet set = FeasibleSet::ball(1, 1.0);
  AdversarySpec adversary;
  long long rounds = 1;  // T
  int samples = 1;       // m (sampled_fpl)
  /// k for ospf; unset means blocking_params(T, blocking mode).
  std::optional<int> block_size;
  /// Unset means smooth when the adversary's losses are smooth, else general.
  std::optional<BlockingMode> blocking;
  /// Unset means the default tuning for the learner.
  std::optional<double> delta;
  std::optional<double> eta;  // ofw only
  std::vector<std::uint64_t> seeds = {0};
  /// Frank-Wolfe iterations for the comparator; 0 means 10 T.
  long long fw_budget = 0;
  int eval_samples = 10'000;  // expected_fpl_mc
  int run_id = 0;
  std::string output_path;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

/// Stable hex digest of the canonical JSON form.
std::string config_hash(const ExperimentConfig& config);

/// Config with every "auto" value filled in, plus the problem constants.
struct ResolvedParams {
  int dim = 0;
  double norm_bound = 0.0;   // D
  double grad_bound = 0.0;   // G
  double smoothness = 0.0;   // beta
  long long rounds = 0;      // T
  int samples = 1;           // m, or eval_samples for expected_fpl_mc
  long long blocks = 0;      // n (ospf)
  long long block_size = 1;  // k (ospf)
  BlockingMode blocking = BlockingMode::smooth;
  double delta = 0.0;  // 0 when the learner has no perturbation
  double eta = 0.0;
  long long fw_budget = 0;
};

ResolvedParams resolve(const ExperimentConfig& config);

std::unique_ptr<Learner> make_learner(const ExperimentConfig& config, const ResolvedParams& params,
                                      std::uint64_t seed);

/// Oracle calls a full run must make: m T (sampled_fpl), k floor(T / k)
/// (ospf), eval_samples T (expected_fpl_mc), T (ofw), 0 (ogd).
std::uint64_t expected_oracle_calls(const ExperimentConfig& config);

struct TraceRow {
  long long t = 0;
  Eigen::VectorXd action;
  double loss = 0.0;
  double grad_norm = 0.0;
  double cum_loss = 0.0;
  /// Regret against the best fixed action for the first t losses. NaN when no
  /// exact prefix comparator exists; the final row always uses the full
  /// best-in-hindsight comparator.
  double cum_regret = 0.0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t grad_evals = 0;
};

struct RegretTrace {
  std::string algorithm;
  std::uint64_t seed = 0;
  int run_id = 0;
  std::vector<TraceRow> rows;
  Eigen::VectorXd comparator_point;
  double comparator_value = 0.0;
  /// Frank-Wolfe suboptimality bound of the comparator.
  double comparator_band = 0.0;
  double resolved_delta = 0.0;

  double cumulative_loss() const { return rows.empty() ? 0.0 : rows.back().cum_loss; }
  double final_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
  std::uint64_t oracle_calls() const { return rows.empty() ? 0 : rows.back().oracle_calls; }
  std::uint64_t grad_evals() const { return rows.empty() ? 0 : rows.back().grad_evals; }
};

/// Plays T rounds: the adversary commits to f_t from the past actions, the
/// learner plays x_t, suffers f_t(x_t) and observes f_t. The comparator is
/// computed afterwards from the realized losses. `seed` drives the learner
/// only; the adversary draws from its own spec seed, so a deterministic
/// learner replays the same game under every seed.
RegretTrace run_game(const ExperimentConfig& config, std::uint64_t seed);

inline constexpr std::string_view kTraceCsvHeader =
    "run_id,algorithm,seed,t,loss,cum_loss,cum_regret,oracle_calls,grad_evals";

/// Rows only; floats with 17 significant digits.
void write_trace_csv(std::ostream& out, const RegretTrace& trace);

/// Replays the adversary against the trace's actions and writes one row per
/// round: t, curvature a, constant c, then the linear term b_1..b_d of
/// f_t(x) = a/2 ||x||^2 + <b, x> + c. Header included.
void write_loss_csv(std::ostream& out, const ExperimentConfig& config, const RegretTrace& trace);

/// Excess-regret bound matching the learner:
///   sampled_fpl / expected_fpl_mc: 2D/delta + delta D G^2 d T / 2 + 2 G D T / sqrt(m)
///     (general) or + 4 beta D^2 T / m (smooth, beta > 0);
///   ospf: the same with T -> n, m -> k, G -> G k, beta -> beta k, which for
///     the auto delta equals 2 D G sqrt(d) sqrt(n) k + 4 beta D^2 n (smooth)
///     or + 2 D G n sqrt(k) (general);
///   ogd: 3 D G sqrt(T).
/// Throws ConfigError for ofw (no bound shipped).
double theoretical_bound(const ExperimentConfig& config);

/// Bound that holds with probability 1 - sigma (appendix constants):
///   general: R3 + (2 G D T / sqrt(m)) sqrt(2 log(2T / sigma))
///   smooth:  R3 + 2 G D sqrt(2 T log(4 / sigma)) + (8 beta D^2 T / m) log(4T / sigma)
/// with R3 = 2D/delta + delta D G^2 d T / 2 and the same ospf substitution.
double high_probability_bound(const ExperimentConfig& config, double sigma);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
  std::vector<std::string> warnings;
};

/// Least squares on (log T, log regret). Nonpositive regrets are dropped with
/// a warning; fewer than 4 usable points throws InputError.
ExponentFit fit_exponent(std::span<const double> rounds, std::span<const double> regrets);

struct RunSummary {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_regrets;  // seeds that finished, in seed order
  double mean_regret = 0.0;
  double regret_stddev = 0.0;
  std::vector<std::pair<double, double>> quantiles;  // (level, value)
  std::optional<double> theoretical_bound;
  /// Largest comparator error bound over the seeds.
  double correction_band = 0.0;
  std::uint64_t oracle_calls = 0;  // per run
  std::uint64_t grad_evals = 0;    // per run
  double resolved_delta = 0.0;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> errors;
};

nlohmann::json to_json(const RunSummary& summary);

/// Summary of finished traces, one per config seed in seed order.
RunSummary summarize_traces(const ExperimentConfig& config, std::span<const RegretTrace> traces);

/// Empirical level-quantile: the ceil(level n)-th smallest value.
double empirical_quantile(std::vector<double> values, double level);

/// One game per seed of every cell, spread over `jobs` threads; results are
/// aggregated in (cell, seed) order. Failed runs are recorded in the cell's
/// `errors` and the remaining runs continue.
std::vector<RunSummary> run_cells(std::span<const ExperimentConfig> cells, int jobs);

struct SweepAxis {
  /// One of T, m, k, delta, eta, eval_samples, fw_budget.
  std::string parameter;
  std::vector<nlohmann::json> values;
};

/// Cartesian product of the axes, first axis slowest. An empty grid has no cells.
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base,
                                          std::span<const SweepAxis> grid);

std::vector<RunSummary> sweep(const ExperimentConfig& base, std::span<const SweepAxis> grid,
                              int jobs);

struct QuantileEntry {
  std::string config_hash;
  std::string learner;
  long long rounds = 0;
  double sigma = 0.0;
  double quantile = 0.0;
  double bound = 0.0;  // NaN when the learner has no bound
  double correction_band = 0.0;
  bool has_bound = false;
  bool pass = false;
};

struct QuantileReport {
  std::vector<QuantileEntry> entries;
  std::vector<std::string> warnings;
  bool all_pass = true;
};

/// Compares each summary's empirical (1 - sigma)-quantile of final regret
/// with high_probability_bound(config, sigma) + correction band.
QuantileReport quantile_check(std::span<const RunSummary> summaries, double sigma);

}  // namespace pfol
