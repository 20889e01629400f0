#include "pfol/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "pfol/errors.hpp"
#include "pfol/random.hpp"

namespace pfol {

using nlohmann::json;

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::sampled_fpl:
      return "sampled_fpl";
    case LearnerKind::ospf:
      return "ospf";
    case LearnerKind::expected_fpl_mc:
      return "expected_fpl_mc";
    case LearnerKind::ogd:
      return "ogd";
    case LearnerKind::ofw:
      return "ofw";
  }
  return "unknown";
}

LearnerKind learner_kind_from_string(std::string_view name) {
  for (auto kind : {LearnerKind::sampled_fpl, LearnerKind::ospf, LearnerKind::expected_fpl_mc,
                    LearnerKind::ogd, LearnerKind::ofw}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown learner '" + std::string(name) + "'");
}

namespace {

std::string_view to_string(BlockingMode mode) {
  return mode == BlockingMode::smooth ? "smooth" : "general";
}

BlockingMode blocking_mode_from_string(std::string_view name) {
  if (name == "smooth") return BlockingMode::smooth;
  if (name == "general") return BlockingMode::general;
  throw ConfigError("unknown blocking mode '" + std::string(name) + "'");
}

// Numbers pass through; the string "auto" maps to nullopt.
template <class T>
std::optional<T> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& value = j.at(key);
  if (value.is_string()) {
    if (value.get<std::string>() == "auto") return std::nullopt;
    throw ConfigError(std::string("'") + key + "' must be a number or \"auto\"");
  }
  if (!value.is_number()) throw ConfigError(std::string("'") + key + "' must be a number or \"auto\"");
  return value.get<T>();
}

template <class T>
json number_or_auto(const std::optional<T>& value) {
  return value ? json(*value) : json("auto");
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  try {
    ExperimentConfig config;
    config.learner = learner_kind_from_string(j.at("learner").get<std::string>());
    try {
      config.set = feasible_set_from_json(j.at("set"));
    } catch (const InputError& e) {
      throw ConfigError(e.what());
    }
    config.adversary = adversary_spec_from_json(j.at("adversary"));
    config.rounds = j.at("T").get<long long>();
    config.samples = j.value("m", 1);
    config.block_size = optional_number<int>(j, "k");
    if (j.contains("blocking") && !j.at("blocking").is_null()) {
      const auto mode = j.at("blocking").get<std::string>();
      if (mode != "auto") config.blocking = blocking_mode_from_string(mode);
    }
    config.delta = optional_number<double>(j, "delta");
    config.eta = optional_number<double>(j, "eta");
    if (j.contains("seeds")) {
      config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } else if (j.contains("seed")) {
      config.seeds = {j.at("seed").get<std::uint64_t>()};
    }
    config.fw_budget = j.value("fw_budget", 0LL);
    config.eval_samples = j.value("eval_samples", 10'000);
    config.run_id = j.value("run_id", 0);
    config.output_path = j.value("output_path", std::string());

    if (config.rounds < 1) throw ConfigError("T must be >= 1");
    if (config.samples < 1) throw ConfigError("m must be >= 1");
    if (config.block_size && *config.block_size < 1) throw ConfigError("k must be >= 1");
    if (config.delta && !(*config.delta > 0.0)) throw ConfigError("delta must be positive");
    if (config.eta && !(*config.eta >= 0.0)) throw ConfigError("eta must be nonnegative");
    if (config.eval_samples < 1) throw ConfigError("eval_samples must be >= 1");
    if (config.fw_budget < 0) throw ConfigError("fw_budget must be >= 0");
    if (config.seeds.empty()) throw ConfigError("at least one seed is required");
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
}

json to_json(const ExperimentConfig& config) {
  json j{{"learner", to_string(config.learner)},
         {"set", to_json(config.set)},
         {"adversary", to_json(config.adversary)},
         {"T", config.rounds},
         {"m", config.samples},
         {"k", number_or_auto(config.block_size)},
         {"delta", number_or_auto(config.delta)},
         {"eta", number_or_auto(config.eta)},
         {"seeds", config.seeds},
         {"fw_budget", config.fw_budget},
         {"eval_samples", config.eval_samples},
         {"run_id", config.run_id}};
  j["blocking"] = config.blocking ? json(to_string(*config.blocking)) : json("auto");
  if (!config.output_path.empty()) j["output_path"] = config.output_path;
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  json canonical = to_json(config);
  canonical.erase("seeds");
  canonical.erase("output_path");
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical.dump())));
  return buffer;
}

ResolvedParams resolve(const ExperimentConfig& config) {
  AdversarySpec spec = config.adversary;
  spec.horizon = static_cast<int>(config.rounds);
  const Adversary adversary(spec, config.set);

  ResolvedParams p;
  p.dim = config.set.dim();
  p.norm_bound = config.set.norm_bound();
  p.grad_bound = adversary.grad_bound();
  p.smoothness = adversary.smoothness();
  p.rounds = config.rounds;
  p.fw_budget = config.fw_budget > 0 ? config.fw_budget : 10 * config.rounds;
  p.blocking = config.blocking.value_or(p.smoothness > 0.0 ? BlockingMode::smooth
                                                           : BlockingMode::general);
  switch (config.learner) {
    case LearnerKind::sampled_fpl:
    case LearnerKind::expected_fpl_mc:
      p.samples = config.learner == LearnerKind::sampled_fpl ? config.samples : config.eval_samples;
      p.delta = config.delta ? *config.delta : default_delta(p.grad_bound, p.dim, p.rounds);
      break;
    case LearnerKind::ospf: {
      if (config.block_size) {
        p.block_size = *config.block_size;
        p.blocks = (p.rounds + p.block_size - 1) / p.block_size;
      } else {
        const auto blocking = blocking_params(p.rounds, p.blocking);
        p.block_size = blocking.block_size;
        p.blocks = blocking.blocks;
      }
      p.samples = static_cast<int>(p.block_size);
      p.delta = config.delta ? *config.delta
                             : default_delta_blocked(p.grad_bound, p.dim, p.blocks, p.block_size);
      break;
    }
    case LearnerKind::ogd:
      if (!(p.grad_bound > 0.0)) throw ConfigError("ogd needs a positive gradient bound");
      break;
    case LearnerKind::ofw:
      p.eta = config.eta ? *config.eta : Ofw::default_eta(p.norm_bound, p.grad_bound, p.rounds);
      break;
  }
  return p;
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& config, const ResolvedParams& p,
                                      std::uint64_t seed) {
  switch (config.learner) {
    case LearnerKind::sampled_fpl:
      return std::make_unique<SampledFpl>(config.set, p.delta, p.samples, seed);
    case LearnerKind::ospf:
      return std::make_unique<Ospf>(config.set, p.delta, static_cast<int>(p.block_size), seed);
    case LearnerKind::expected_fpl_mc:
      return std::make_unique<ExpectedFplMc>(config.set, p.delta, p.samples, seed);
    case LearnerKind::ogd:
      return std::make_unique<Ogd>(config.set, p.grad_bound, seed);
    case LearnerKind::ofw:
      return std::make_unique<Ofw>(config.set, p.eta, seed);
  }
  throw ConfigError("unhandled learner");
}

std::uint64_t expected_oracle_calls(const ExperimentConfig& config) {
  const ResolvedParams p = resolve(config);
  const auto T = static_cast<std::uint64_t>(p.rounds);
  switch (config.learner) {
    case LearnerKind::sampled_fpl:
    case LearnerKind::expected_fpl_mc:
      return static_cast<std::uint64_t>(p.samples) * T;
    case LearnerKind::ospf: {
      const auto k = static_cast<std::uint64_t>(p.block_size);
      return k * (T / k);
    }
    case LearnerKind::ogd:
      return 0;
    case LearnerKind::ofw:
      return T;
  }
  return 0;
}

RegretTrace run_game(const ExperimentConfig& config, std::uint64_t seed) {
  const ResolvedParams params = resolve(config);
  AdversarySpec spec = config.adversary;
  spec.horizon = static_cast<int>(config.rounds);
  const Adversary adversary(spec, config.set);
  const auto learner = make_learner(config, params, seed);

  RegretTrace trace;
  trace.algorithm = std::string(learner->name());
  trace.seed = seed;
  trace.run_id = config.run_id;
  trace.resolved_delta = params.delta;
  trace.rows.reserve(static_cast<std::size_t>(config.rounds));

  std::vector<Eigen::VectorXd> history;
  std::vector<LossFunction> losses;
  history.reserve(static_cast<std::size_t>(config.rounds));
  losses.reserve(static_cast<std::size_t>(config.rounds));
  std::optional<LossFunction> prefix;
  double cum_loss = 0.0;

  for (long long t = 1; t <= config.rounds; ++t) {
    LossFunction loss = adversary.next_loss(history);
    Eigen::VectorXd action = learner->act();
    const double value = loss.evaluate(action);
    const Eigen::VectorXd& gradient = learner->observe(loss);
    cum_loss += value;
    if (prefix) {
      *prefix += loss;
    } else {
      prefix = loss;
    }
    const auto prefix_best = closed_form_minimum(*prefix, config.set);

    TraceRow row;
    row.t = t;
    row.loss = value;
    row.grad_norm = gradient.norm();
    row.cum_loss = cum_loss;
    row.cum_regret =
        prefix_best ? cum_loss - prefix_best->value : std::numeric_limits<double>::quiet_NaN();
    row.oracle_calls = learner->oracle_calls();
    row.grad_evals = learner->grad_evals();
    row.action = action;
    trace.rows.push_back(std::move(row));

    history.push_back(std::move(action));
    losses.push_back(std::move(loss));
  }

  const OfflineSolution best =
      best_in_hindsight(losses, config.set, static_cast<int>(params.fw_budget));
  trace.comparator_point = best.point;
  trace.comparator_value = best.value;
  trace.comparator_band = best.error_bound;
  trace.rows.back().cum_regret = cum_loss - best.value;
  return trace;
}

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
  const auto old_precision = out.precision(17);
  for (const auto& row : trace.rows) {
    out << trace.run_id << ',' << trace.algorithm << ',' << trace.seed << ',' << row.t << ','
        << row.loss << ',' << row.cum_loss << ',';
    if (std::isnan(row.cum_regret)) {
      out << "nan";
    } else {
      out << row.cum_regret;
    }
    out << ',' << row.oracle_calls << ',' << row.grad_evals << '\n';
  }
  out.precision(old_precision);
}

void write_loss_csv(std::ostream& out, const ExperimentConfig& config, const RegretTrace& trace) {
  AdversarySpec spec = config.adversary;
  spec.horizon = static_cast<int>(std::max<long long>(1, config.rounds));
  const Adversary adversary(spec, config.set);
  const int d = config.set.dim();
  out << "t,curvature,constant";
  for (int i = 1; i <= d; ++i) out << ",b" << i;
  out << '\n';
  const auto old_precision = out.precision(17);
  std::vector<Eigen::VectorXd> history;
  history.reserve(trace.rows.size());
  for (const auto& row : trace.rows) {
    const LossFunction loss = adversary.next_loss(history);
    if (!loss.is_isotropic()) throw InvariantError("write_loss_csv: dense Hessian has no row form");
    out << row.t << ',' << loss.curvature() << ',' << loss.constant_term();
    for (int i = 0; i < d; ++i) out << ',' << loss.linear_term()[i];
    out << '\n';
    history.push_back(row.action);
  }
  out.precision(old_precision);
}

namespace {

// Problem constants after the blocking substitution for ospf.
struct BoundConstants {
  double D, G, beta, d, rounds, samples, delta;
};

BoundConstants bound_constants(const ExperimentConfig& config) {
  const ResolvedParams p = resolve(config);
  BoundConstants c{p.norm_bound, p.grad_bound, p.smoothness, static_cast<double>(p.dim),
                   static_cast<double>(p.rounds), static_cast<double>(p.samples), p.delta};
  if (config.learner == LearnerKind::ospf) {
    const double k = static_cast<double>(p.block_size);
    c.G *= k;
    c.beta *= k;
    c.rounds = static_cast<double>(p.blocks);
    c.samples = k;
  }
  return c;
}

double deterministic_part(const BoundConstants& c) {
  return 2.0 * c.D / c.delta + c.delta * c.D * c.G * c.G * c.d * c.rounds / 2.0;
}

double ogd_bound(const ExperimentConfig& config) {
  const ResolvedParams p = resolve(config);
  return 3.0 * p.norm_bound * p.grad_bound * std::sqrt(static_cast<double>(p.rounds));
}

}  // namespace

double theoretical_bound(const ExperimentConfig& config) {
  switch (config.learner) {
    case LearnerKind::ogd:
      return ogd_bound(config);
    case LearnerKind::ofw:
      throw ConfigError("no regret bound is shipped for the ofw baseline");
    default:
      break;
  }
  const BoundConstants c = bound_constants(config);
  const double sampling = c.beta > 0.0 ? 4.0 * c.beta * c.D * c.D * c.rounds / c.samples
                                       : 2.0 * c.G * c.D * c.rounds / std::sqrt(c.samples);
  return deterministic_part(c) + sampling;
}

double high_probability_bound(const ExperimentConfig& config, double sigma) {
  if (!(sigma > 0.0) || !(sigma <= 1.0)) throw ConfigError("sigma must lie in (0, 1]");
  switch (config.learner) {
    case LearnerKind::ogd:
      return ogd_bound(config);
    case LearnerKind::ofw:
      throw ConfigError("no regret bound is shipped for the ofw baseline");
    default:
      break;
  }
  const BoundConstants c = bound_constants(config);
  double sampling;
  if (c.beta > 0.0) {
    sampling = 2.0 * c.G * c.D * std::sqrt(2.0 * c.rounds * std::log(4.0 / sigma)) +
               8.0 * c.beta * c.D * c.D * c.rounds / c.samples * std::log(4.0 * c.rounds / sigma);
  } else {
    sampling = 2.0 * c.G * c.D * c.rounds / std::sqrt(c.samples) *
               std::sqrt(2.0 * std::log(2.0 * c.rounds / sigma));
  }
  return deterministic_part(c) + sampling;
}

ExponentFit fit_exponent(std::span<const double> rounds, std::span<const double> regrets) {
  if (rounds.size() != regrets.size()) throw InputError("fit_exponent: length mismatch");
  ExponentFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    if (!(regrets[i] > 0.0) || !(rounds[i] > 0.0)) {
      std::ostringstream msg;
      msg << "excluded point T=" << rounds[i] << " regret=" << regrets[i] << " (nonpositive)";
      fit.warnings.push_back(msg.str());
      continue;
    }
    xs.push_back(std::log(rounds[i]));
    ys.push_back(std::log(regrets[i]));
  }
  if (xs.size() < 4) {
    throw InputError("fit_exponent: need >= 4 points with positive regret, got " +
                     std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  const double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    syy += (ys[i] - mean_y) * (ys[i] - mean_y);
  }
  if (sxx == 0.0) throw InputError("fit_exponent: all T values are equal");
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  double residual = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    residual += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - residual / syy : 1.0;
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw InputError("empirical_quantile: no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<long long>(std::ceil(level * n - 1e-9));
  rank = std::clamp(rank, 1LL, static_cast<long long>(values.size()));
  return values[static_cast<std::size_t>(rank - 1)];
}

json to_json(const RunSummary& s) {
  json quantiles = json::object();
  for (const auto& [level, value] : s.quantiles) {
    std::ostringstream key;
    key << level;
    quantiles[key.str()] = value;
  }
  return {{"config_hash", s.config_hash},
          {"config", to_json(s.config)},
          {"seeds", s.seeds},
          {"final_regrets", s.final_regrets},
          {"mean_regret", s.mean_regret},
          {"regret_stddev", s.regret_stddev},
          {"quantiles", quantiles},
          {"theoretical_bound", s.theoretical_bound ? json(*s.theoretical_bound) : json(nullptr)},
          {"correction_band", s.correction_band},
          {"oracle_calls", s.oracle_calls},
          {"grad_evals", s.grad_evals},
          {"resolved_delta", s.resolved_delta},
          {"wall_clock_seconds", s.wall_clock_seconds},
          {"errors", s.errors}};
}

namespace {

template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& thread : threads) thread.join();
}

struct RunOutcome {
  bool ok = false;
  double final_regret = 0.0;
  double band = 0.0;
  double delta = 0.0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t grad_evals = 0;
  double seconds = 0.0;
  std::string error;
};

RunSummary summarize(const ExperimentConfig& config, std::span<const RunOutcome> outcomes) {
  RunSummary s;
  s.config = config;
  s.config_hash = config_hash(config);
  s.seeds = config.seeds;
  std::optional<std::uint64_t> expected_calls;
  try {
    expected_calls = expected_oracle_calls(config);
    if (config.learner != LearnerKind::ofw) s.theoretical_bound = theoretical_bound(config);
  } catch (const Error& e) {
    s.errors.push_back(e.what());
  }
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    s.wall_clock_seconds += o.seconds;
    if (!o.ok) {
      s.errors.push_back("seed " + std::to_string(config.seeds[i]) + ": " + o.error);
      continue;
    }
    if (expected_calls && o.oracle_calls != *expected_calls) {
      s.errors.push_back("seed " + std::to_string(config.seeds[i]) + ": oracle calls " +
                         std::to_string(o.oracle_calls) + " != budget " +
                         std::to_string(*expected_calls));
    }
    if (o.grad_evals != static_cast<std::uint64_t>(config.rounds)) {
      s.errors.push_back("seed " + std::to_string(config.seeds[i]) + ": gradient evaluations " +
                         std::to_string(o.grad_evals) + " != T");
    }
    s.final_regrets.push_back(o.final_regret);
    s.correction_band = std::max(s.correction_band, o.band);
    s.oracle_calls = o.oracle_calls;
    s.grad_evals = o.grad_evals;
    s.resolved_delta = o.delta;
  }
  if (!s.final_regrets.empty()) {
    const double n = static_cast<double>(s.final_regrets.size());
    s.mean_regret = std::accumulate(s.final_regrets.begin(), s.final_regrets.end(), 0.0) / n;
    double ss = 0.0;
    for (double r : s.final_regrets) ss += (r - s.mean_regret) * (r - s.mean_regret);
    s.regret_stddev = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    for (double level : {0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) {
      s.quantiles.emplace_back(level, empirical_quantile(s.final_regrets, level));
    }
  }
  return s;
}

}  // namespace

RunSummary summarize_traces(const ExperimentConfig& config, std::span<const RegretTrace> traces) {
  if (traces.size() != config.seeds.size()) {
    throw InputError("summarize_traces: one trace per seed is required");
  }
  std::vector<RunOutcome> outcomes(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    outcomes[i].ok = true;
    outcomes[i].final_regret = traces[i].final_regret();
    outcomes[i].band = traces[i].comparator_band;
    outcomes[i].delta = traces[i].resolved_delta;
    outcomes[i].oracle_calls = traces[i].oracle_calls();
    outcomes[i].grad_evals = traces[i].grad_evals();
  }
  return summarize(config, outcomes);
}

std::vector<RunSummary> run_cells(std::span<const ExperimentConfig> cells, int jobs) {
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  std::vector<std::vector<RunOutcome>> outcomes(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    outcomes[c].resize(cells[c].seeds.size());
    for (std::size_t s = 0; s < cells[c].seeds.size(); ++s) tasks.emplace_back(c, s);
  }
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const auto [c, s] = tasks[i];
    RunOutcome& out = outcomes[c][s];
    const auto start = std::chrono::steady_clock::now();
    try {
      const RegretTrace trace = run_game(cells[c], cells[c].seeds[s]);
      out.ok = true;
      out.final_regret = trace.final_regret();
      out.band = trace.comparator_band;
      out.delta = trace.resolved_delta;
      out.oracle_calls = trace.oracle_calls();
      out.grad_evals = trace.grad_evals();
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  std::vector<RunSummary> summaries;
  summaries.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) summaries.push_back(summarize(cells[c], outcomes[c]));
  return summaries;
}

namespace {

void apply_parameter(ExperimentConfig& config, const std::string& parameter, const json& value) {
  auto is_auto = [&] { return value.is_string() && value.get<std::string>() == "auto"; };
  try {
    if (parameter == "T") {
      config.rounds = value.get<long long>();
    } else if (parameter == "m") {
      config.samples = value.get<int>();
    } else if (parameter == "k") {
      config.block_size = is_auto() ? std::nullopt : std::optional<int>(value.get<int>());
    } else if (parameter == "delta") {
      config.delta = is_auto() ? std::nullopt : std::optional<double>(value.get<double>());
    } else if (parameter == "eta") {
      config.eta = is_auto() ? std::nullopt : std::optional<double>(value.get<double>());
    } else if (parameter == "eval_samples") {
      config.eval_samples = value.get<int>();
    } else if (parameter == "fw_budget") {
      config.fw_budget = value.get<long long>();
    } else {
      throw ConfigError("cannot sweep over parameter '" + parameter + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad value for sweep parameter '" + parameter + "': " + e.what());
  }
}

}  // namespace

std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base,
                                          std::span<const SweepAxis> grid) {
  if (grid.empty()) return {};
  std::vector<ExperimentConfig> cells = {base};
  for (const auto& axis : grid) {
    std::vector<ExperimentConfig> next;
    next.reserve(cells.size() * axis.values.size());
    for (const auto& cell : cells) {
      for (const auto& value : axis.values) {
        ExperimentConfig updated = cell;
        apply_parameter(updated, axis.parameter, value);
        next.push_back(std::move(updated));
      }
    }
    cells = std::move(next);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i].run_id = static_cast<int>(i);
  return cells;
}

std::vector<RunSummary> sweep(const ExperimentConfig& base, std::span<const SweepAxis> grid,
                              int jobs) {
  const auto cells = expand_grid(base, grid);
  return run_cells(cells, jobs);
}

QuantileReport quantile_check(std::span<const RunSummary> summaries, double sigma) {
  if (!(sigma > 0.0) || !(sigma <= 1.0)) throw ConfigError("sigma must lie in (0, 1]");
  QuantileReport report;
  for (const auto& s : summaries) {
    QuantileEntry entry;
    entry.config_hash = s.config_hash;
    entry.learner = std::string(to_string(s.config.learner));
    entry.rounds = s.config.rounds;
    entry.sigma = sigma;
    entry.correction_band = s.correction_band;
    if (s.final_regrets.empty()) {
      report.warnings.push_back(s.config_hash + ": no finished runs");
      report.all_pass = false;
      report.entries.push_back(entry);
      continue;
    }
    if (static_cast<double>(s.final_regrets.size()) < 1.0 / sigma) {
      report.warnings.push_back(s.config_hash + ": " + std::to_string(s.final_regrets.size()) +
                                " seeds is fewer than 1/sigma");
    }
    entry.quantile = empirical_quantile(s.final_regrets, 1.0 - sigma);
    if (s.config.learner == LearnerKind::ofw) {
      entry.bound = std::numeric_limits<double>::quiet_NaN();
      entry.pass = true;
      report.warnings.push_back(s.config_hash + ": no high-probability bound for ofw");
    } else {
      entry.has_bound = true;
      entry.bound = high_probability_bound(s.config, sigma);
      entry.pass = entry.quantile <= entry.bound + entry.correction_band;
    }
    report.all_pass = report.all_pass && entry.pass;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace pfol
