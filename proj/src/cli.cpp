#include "pfol/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfol/errors.hpp"
#include "pfol/experiment.hpp"
#include "pfol/smoothing.hpp"

namespace pfol {

namespace {

using nlohmann::json;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string summary_path;
  std::string losses_path;
  std::string csv_path;
  std::string cache_path;
  int jobs = 1;
  std::optional<double> sigma;
  double scale = 1.0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << origin << ": malformed JSON at line " << line << ", column " << column << ": "
        << e.what();
    throw ConfigError(msg.str());
  }
}

json load_config_json(const Options& opt) {
  if (opt.config_path.empty()) throw ConfigError("--config is required");
  return parse_json_text(read_file(opt.config_path), opt.config_path);
}

void apply_seed_overrides(ExperimentConfig& config, const Options& opt) {
  if (const char* env = std::getenv("PFOL_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long value = std::stoull(env, &used);
      if (used != std::string_view(env).size()) throw std::invalid_argument("trailing text");
      config.seeds = {value};
    } catch (const std::exception&) {
      throw ConfigError(std::string("PFOL_SEED is not an integer: '") + env + "'");
    }
  }
  if (opt.seed) config.seeds = {*opt.seed};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

void emit_json(const json& value, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << value.dump(2) << '\n';
  } else {
    open_output(path) << value.dump(2) << '\n';
  }
}

int report_summary_errors(const std::vector<RunSummary>& summaries, std::ostream& err) {
  int status = kExitOk;
  for (const auto& s : summaries) {
    for (const auto& e : s.errors) {
      err << "error [" << s.config_hash << "]: " << e << '\n';
      status = kExitFailure;
    }
  }
  return status;
}

int cmd_run(const Options& opt, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = experiment_config_from_json(load_config_json(opt));
  apply_seed_overrides(config, opt);
  const ResolvedParams params = resolve(config);
  err << "learner=" << to_string(config.learner) << " T=" << params.rounds
      << " resolved_delta=" << params.delta << '\n';

  std::vector<RegretTrace> traces(config.seeds.size());
  std::vector<std::string> failures(config.seeds.size());
  const std::size_t workers =
      std::min<std::size_t>(config.seeds.size(), static_cast<std::size_t>(std::max(1, opt.jobs)));
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < config.seeds.size(); i += workers) {
        try {
          traces[i] = run_game(config, config.seeds[i]);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].empty()) {
      err << "run aborted for seed " << config.seeds[i] << ": " << failures[i] << '\n';
      return kExitFailure;
    }
  }

  const std::string csv_path = !opt.out_path.empty() ? opt.out_path : config.output_path;
  if (!csv_path.empty()) {
    auto csv = open_output(csv_path);
    csv << kTraceCsvHeader << '\n';
    for (const auto& trace : traces) write_trace_csv(csv, trace);
  }
  if (!opt.losses_path.empty()) {
    auto losses = open_output(opt.losses_path);
    write_loss_csv(losses, config, traces.front());
  }
  const RunSummary summary = summarize_traces(config, traces);
  emit_json(to_json(summary), opt.summary_path, out);
  return report_summary_errors({summary}, err);
}

std::vector<SweepAxis> parse_grid(const json& grid) {
  std::vector<SweepAxis> axes;
  auto values_of = [](const json& v, const std::string& name) {
    if (!v.is_array()) throw ConfigError("grid values for '" + name + "' must be an array");
    return v.get<std::vector<json>>();
  };
  if (grid.is_array()) {
    for (const auto& axis : grid) {
      if (!axis.is_object() || !axis.contains("parameter") || !axis.contains("values")) {
        throw ConfigError("grid axes need 'parameter' and 'values'");
      }
      const auto name = axis.at("parameter").get<std::string>();
      axes.push_back({name, values_of(axis.at("values"), name)});
    }
  } else if (grid.is_object()) {
    for (const auto& [name, values] : grid.items()) axes.push_back({name, values_of(values, name)});
  } else {
    throw ConfigError("'grid' must be an array or an object");
  }
  return axes;
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  json j = load_config_json(opt);
  std::vector<SweepAxis> axes;
  if (j.contains("grid")) {
    axes = parse_grid(j.at("grid"));
    j.erase("grid");
  }
  ExperimentConfig base = experiment_config_from_json(j);
  apply_seed_overrides(base, opt);
  const auto cells = expand_grid(base, axes);
  const auto summaries = run_cells(cells, opt.jobs);

  const std::string csv_path = !opt.out_path.empty() ? opt.out_path : base.output_path;
  if (!csv_path.empty()) {
    auto csv = open_output(csv_path);
    csv.precision(17);
    csv << "run_id,config_hash,learner,T,m,k,delta,seed,final_regret,oracle_calls,grad_evals\n";
    for (const auto& s : summaries) {
      const ResolvedParams p = resolve(s.config);
      for (std::size_t i = 0; i < s.final_regrets.size(); ++i) {
        csv << s.config.run_id << ',' << s.config_hash << ',' << to_string(s.config.learner) << ','
            << s.config.rounds << ',' << p.samples << ',' << p.block_size << ',' << s.resolved_delta
            << ',' << s.seeds[i] << ',' << s.final_regrets[i] << ',' << s.oracle_calls << ','
            << s.grad_evals << '\n';
      }
    }
  }
  json all = json::array();
  for (const auto& s : summaries) all.push_back(to_json(s));
  emit_json(all, opt.summary_path, out);
  return report_summary_errors(summaries, err);
}

int cmd_audit(const Options& opt, std::ostream& out, std::ostream& err) {
  if (!(opt.scale > 0.0)) throw ConfigError("--scale must be positive");
  std::optional<ReferenceCache> cache;
  if (!opt.cache_path.empty()) cache.emplace(opt.cache_path);
  AuditOptions options;
  options.seed = opt.seed.value_or(1);
  options.scale = opt.scale;
  options.cache = cache ? &*cache : nullptr;
  const auto records = run_audit_suite(options);
  if (cache) cache->save();
  json report = json::array();
  bool all_pass = true;
  for (const auto& r : records) {
    report.push_back(to_json(r));
    all_pass = all_pass && r.pass;
    err << (r.pass ? "PASS " : "FAIL ") << r.audit_name << " estimate=" << r.estimate
        << " bound=" << r.bound << '\n';
  }
  emit_json(report, opt.out_path, out);
  return all_pass ? kExitOk : kExitFailure;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int cmd_fit(const Options& opt, std::ostream& out, std::ostream& err) {
  const std::string path = !opt.csv_path.empty() ? opt.csv_path : opt.config_path;
  if (path.empty()) throw ConfigError("fit needs --in <sweep.csv>");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  const auto header = split_csv_line(line);
  auto column = [&](std::initializer_list<const char*> names) -> std::ptrdiff_t {
    for (const char* name : names) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it != header.end()) return it - header.begin();
    }
    return -1;
  };
  const auto t_col = column({"T", "t"});
  const auto r_col = column({"final_regret", "mean_regret", "regret", "cum_regret"});
  if (t_col < 0 || r_col < 0) throw ConfigError(path + ": needs a T column and a regret column");

  std::map<double, std::pair<double, int>> by_t;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    const auto needed = static_cast<std::size_t>(std::max(t_col, r_col));
    if (fields.size() <= needed) throw ConfigError(path + ": row " + std::to_string(row) + " is short");
    try {
      const double t = std::stod(fields[static_cast<std::size_t>(t_col)]);
      const double r = std::stod(fields[static_cast<std::size_t>(r_col)]);
      auto& cell = by_t[t];
      cell.first += r;
      cell.second += 1;
    } catch (const std::exception&) {
      throw ConfigError(path + ": row " + std::to_string(row) + " has a non-numeric value");
    }
  }
  std::vector<double> ts;
  std::vector<double> regrets;
  for (const auto& [t, cell] : by_t) {
    ts.push_back(t);
    regrets.push_back(cell.first / cell.second);
  }
  ExponentFit fit;
  try {
    fit = fit_exponent(ts, regrets);
  } catch (const InputError& e) {
    err << "fit: need >=4 points (need ≥4 points), got " << ts.size() << " usable T values\n";
    return kExitConfigError;
  }
  for (const auto& w : fit.warnings) err << "warning: " << w << '\n';
  json result{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"r_squared", fit.r_squared},
              {"points_used", fit.points_used},
              {"T", ts},
              {"mean_regret", regrets},
              {"warnings", fit.warnings}};
  emit_json(result, opt.out_path, out);
  return kExitOk;
}

int cmd_bound_check(const Options& opt, std::ostream& out, std::ostream& err) {
  json j = load_config_json(opt);
  std::vector<SweepAxis> axes;
  if (j.contains("grid")) {
    axes = parse_grid(j.at("grid"));
    j.erase("grid");
  }
  ExperimentConfig base = experiment_config_from_json(j);
  apply_seed_overrides(base, opt);
  std::vector<ExperimentConfig> cells = axes.empty() ? std::vector<ExperimentConfig>{base}
                                                     : expand_grid(base, axes);
  const auto summaries = run_cells(cells, opt.jobs);
  int status = report_summary_errors(summaries, err);

  json report{{"expected", json::array()}};
  for (const auto& s : summaries) {
    json entry{{"config_hash", s.config_hash},
               {"learner", to_string(s.config.learner)},
               {"T", s.config.rounds},
               {"mean_regret", s.mean_regret},
               {"correction_band", s.correction_band}};
    if (s.theoretical_bound) {
      const bool pass = s.mean_regret <= *s.theoretical_bound + s.correction_band;
      entry["bound"] = *s.theoretical_bound;
      entry["pass"] = pass;
      if (!pass) status = kExitFailure;
      err << (pass ? "PASS" : "FAIL") << " mean " << s.mean_regret << " <= bound "
          << *s.theoretical_bound << " + band " << s.correction_band << " (T=" << s.config.rounds
          << ")\n";
    } else {
      entry["bound"] = nullptr;
      entry["pass"] = nullptr;
      err << "SKIP no bound for " << to_string(s.config.learner) << '\n';
    }
    report["expected"].push_back(entry);
  }
  if (opt.sigma) {
    const auto q = quantile_check(summaries, *opt.sigma);
    json entries = json::array();
    for (const auto& e : q.entries) {
      entries.push_back({{"config_hash", e.config_hash},
                         {"learner", e.learner},
                         {"T", e.rounds},
                         {"sigma", e.sigma},
                         {"quantile", e.quantile},
                         {"bound", e.has_bound ? json(e.bound) : json(nullptr)},
                         {"correction_band", e.correction_band},
                         {"pass", e.pass}});
      err << (e.pass ? "PASS" : "FAIL") << " quantile(" << 1.0 - e.sigma << ") " << e.quantile
          << " <= " << e.bound << " + band " << e.correction_band << '\n';
    }
    for (const auto& w : q.warnings) err << "warning: " << w << '\n';
    report["quantile"] = {{"entries", entries}, {"warnings", q.warnings}, {"all_pass", q.all_pass}};
    if (!q.all_pass) status = kExitFailure;
  }
  emit_json(report, opt.out_path, out);
  return status;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projection-free online learning experiments"};
  app.require_subcommand(1);
  Options opt;
  const unsigned hw = std::thread::hardware_concurrency();
  opt.jobs = hw == 0 ? 1 : static_cast<int>(hw);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON experiment config");
    sub->add_option("--seed", opt.seed, "Override the config seeds with one seed");
    sub->add_option("--out", opt.out_path, "Output file");
    sub->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "Play one config for each seed and write the trace CSV");
  add_common(run);
  run->add_option("--summary", opt.summary_path, "Write the run summary JSON here");
  run->add_option("--losses", opt.losses_path, "Write the first seed's loss parameters as CSV");
  auto* sweep_cmd = app.add_subcommand("sweep", "Run the grid in the config over all seeds");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--summary", opt.summary_path, "Write the summaries JSON here");
  auto* audit = app.add_subcommand("audit", "Run the smoothing audit suite");
  audit->add_option("--seed", opt.seed, "Audit seed");
  audit->add_option("--out", opt.out_path, "Write the audit JSON here");
  audit->add_option("--cache", opt.cache_path, "Reference-mean cache file");
  audit->add_option("--scale", opt.scale, "Multiplier for every sample count");
  auto* fit = app.add_subcommand("fit", "Fit the regret exponent from a sweep CSV");
  fit->add_option("--in,--csv", opt.csv_path, "Sweep CSV");
  fit->add_option("--out", opt.out_path, "Write the fit JSON here");
  auto* bound = app.add_subcommand("bound-check", "Compare regret with the theoretical bounds");
  add_common(bound);
  bound->add_option("--sigma", opt.sigma, "Also check the (1 - sigma)-quantile");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(opt, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(opt, out, err);
    if (audit->parsed()) return cmd_audit(opt, out, err);
    if (fit->parsed()) return cmd_fit(opt, out, err);
    if (bound->parsed()) return cmd_bound_check(opt, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const CapabilityError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitConfigError;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace pfol
