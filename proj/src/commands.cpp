#include "pafit/commands.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pafit/kernel_contract.hpp"
#include "pafit/limit_theory.hpp"
#include "pafit/output.hpp"
#include "pafit/replicas.hpp"

namespace pafit {

using json = nlohmann::ordered_json;

namespace {

json ms_json(const MeanStderr& m) { return json::array({m.mean, m.stderr_}); }

MeanStderr ms_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::string replica_dir(std::size_t r) {
  std::ostringstream os;
  os << "replica_" << std::setw(3) << std::setfill('0') << r;
  return os.str();
}

std::vector<std::string> gamma_k_header(std::vector<std::string> head, std::size_t max_k, const char* prefix) {
  for (std::size_t k = 1; k <= max_k; ++k) head.push_back(prefix + std::to_string(k));
  return head;
}

void write_replica(const OutputDir& out, const ReplicaResult& res, const SnapshotOptions& opts) {
  const std::string dir = replica_dir(res.replica);
  CsvTable cps({"n", "fbar", "total_impact", "max_impact", "fitness_of_max", "top_window_mass", "tail_fraction"});
  CsvTable snaps(gamma_k_header({"n", "bin", "bin_lo", "bin_hi", "gamma"}, opts.max_k, "gamma_k"));
  CsvTable pk({"n", "k", "count", "pk"});
  const Binning binning(opts.bins);
  for (const auto& s : res.trajectory) {
    cps.add(s.n, s.fbar, s.total_impact, s.max_impact, s.fitness_of_max, s.top_window_mass(), s.tail_fraction());
    const auto g = s.gamma();
    for (std::size_t b = 0; b < s.bins; ++b) {
      std::vector<std::string> cells{csv_cell(s.n), csv_cell(std::uint64_t{b}), csv_cell(binning.window(b).lo),
                                     csv_cell(binning.window(b).hi), csv_cell(g.mass[b])};
      for (std::size_t k = 1; k <= s.max_k; ++k)
        cells.push_back(csv_cell(static_cast<double>(s.count_k_bin[(k - 1) * s.bins + b]) / static_cast<double>(s.n)));
      snaps.add_cells(cells);
    }
    for (std::size_t k = 1; k <= s.max_k; ++k) pk.add(s.n, std::uint64_t{k}, s.count_k[k - 1], s.pk(k));
  }
  out.write(dir + "/checkpoints.csv", cps.str());
  out.write(dir + "/snapshots.csv", snaps.str());
  out.write(dir + "/pk.csv", pk.str());
}

std::string aggregates_csv(const RunAggregates& r) {
  CsvTable t({"n", "quantity", "index", "mean", "stderr"});
  for (const auto& a : r.checkpoints) {
    t.add(a.n, "fbar", 0, a.fbar.mean, a.fbar.stderr_);
    t.add(a.n, "total_mass", 0, a.total_mass.mean, a.total_mass.stderr_);
    t.add(a.n, "top_window_mass", 0, a.top_window_mass.mean, a.top_window_mass.stderr_);
    for (std::size_t b = 0; b < a.gamma.size(); ++b) t.add(a.n, "gamma", std::uint64_t{b}, a.gamma[b].mean, a.gamma[b].stderr_);
    for (std::size_t k = 0; k < a.pk.size(); ++k) t.add(a.n, "pk", std::uint64_t{k + 1}, a.pk[k].mean, a.pk[k].stderr_);
    for (std::size_t k = 0; k < a.gamma_k.size(); ++k)
      for (std::size_t b = 0; b < a.gamma_k[k].size(); ++b)
        t.add(a.n, "gamma_k" + std::to_string(k + 1), std::uint64_t{b}, a.gamma_k[k][b].mean, a.gamma_k[k][b].stderr_);
  }
  return t.str();
}

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"pass", c.pass},
                   {"measured", c.measured},
                   {"expected", c.expected},
                   {"tolerance", c.tolerance},
                   {"detail", c.detail}});
  return arr;
}

}  // namespace

ExperimentConfig apply_overrides(ExperimentConfig config, const Overrides& flags, const char* env_out_dir) {
  if (env_out_dir && *env_out_dir) config.output_dir = env_out_dir;
  if (flags.out) config.output_dir = *flags.out;
  if (flags.replicas) config.replicas = *flags.replicas;
  if (flags.seed) config.seed = *flags.seed;
  config.validate();
  return config;
}

// ---------------------------------------------------------------------------
// theory

std::string theory_json(const TheoryTables& t) {
  json j;
  j["lambda"] = t.lambda;
  j["fitness"] = t.fitness;
  j["phase"] = std::string(to_string(t.phase));
  j["theta_star"] = t.theta_star;
  j["condensate_mass"] = t.condensate_mass;
  j["gamma_total_mass"] = t.gamma_total;
  j["mean_fitness"] = t.mean_fitness;
  j["bins"] = t.bins;
  j["max_k"] = t.max_k;
  j["epsilon"] = t.epsilon;
  j["gamma_bins"] = t.gamma_bins;
  j["gamma_k_bins"] = t.gamma_k_bins;
  j["pk"] = t.pk;
  j["top_window_mass"] = t.top_window_mass;
  j["mu_only_top_window_mass"] = t.mu_only_top_window_mass;
  return j.dump(2) + "\n";
}

TheoryTables parse_theory_json(const std::string& text) {
  const json j = json::parse(text);
  TheoryTables t;
  t.lambda = j.at("lambda").get<double>();
  t.fitness = j.at("fitness").get<std::string>();
  const auto phase = j.at("phase").get<std::string>();
  if (phase == to_string(Phase::FitGetRicher))
    t.phase = Phase::FitGetRicher;
  else if (phase == to_string(Phase::BoseEinstein))
    t.phase = Phase::BoseEinstein;
  else
    throw std::invalid_argument("unknown phase '" + phase + "' in theory file");
  t.theta_star = j.at("theta_star").get<double>();
  t.condensate_mass = j.at("condensate_mass").get<double>();
  t.gamma_total = j.at("gamma_total_mass").get<double>();
  t.mean_fitness = j.at("mean_fitness").get<double>();
  t.bins = j.at("bins").get<std::size_t>();
  t.max_k = j.at("max_k").get<std::size_t>();
  t.epsilon = j.at("epsilon").get<double>();
  t.gamma_bins = j.at("gamma_bins").get<std::vector<double>>();
  t.gamma_k_bins = j.at("gamma_k_bins").get<std::vector<std::vector<double>>>();
  t.pk = j.at("pk").get<std::vector<double>>();
  t.top_window_mass = j.at("top_window_mass").get<double>();
  t.mu_only_top_window_mass = j.at("mu_only_top_window_mass").get<double>();
  return t;
}

int cmd_theory(const ExperimentConfig& config, std::ostream& log) {
  const FitnessDistribution dist = config.fitness.build();
  const double lambda = config.lambda;
  const OutputDir out(config.output_dir);
  const TheoryTables t = theory_tables(dist, lambda, config.snapshot_options());
  out.write("theory.json", theory_json(t));

  const PkSeries series = pk_series(dist, t.theta_star);
  CsvTable pk({"k", "pk"});
  for (std::size_t k = 1; k <= series.truncation(); ++k) pk.add(std::uint64_t{k}, series.pk[k - 1]);
  out.write("pk.csv", pk.str());

  const Binning binning(config.bins);
  CsvTable bins(gamma_k_header({"bin", "bin_lo", "bin_hi", "gamma"}, config.max_impact, "gamma_k"));
  for (std::size_t b = 0; b < config.bins; ++b) {
    std::vector<std::string> cells{csv_cell(std::uint64_t{b}), csv_cell(binning.window(b).lo),
                                   csv_cell(binning.window(b).hi), csv_cell(t.gamma_bins[b])};
    for (std::size_t k = 0; k < config.max_impact; ++k) cells.push_back(csv_cell(t.gamma_k_bins[k][b]));
    bins.add_cells(cells);
  }
  out.write("gamma_bins.csv", bins.str());

  const LimitMeasure gamma = limit_gamma(dist, lambda, t.theta_star);
  CsvTable density(gamma_k_header({"f", "gamma_factor"}, config.max_impact, "gamma_k_factor"));
  constexpr int kGrid = 200;
  for (int i = 1; i <= kGrid; ++i) {
    const double f = static_cast<double>(i) / kGrid;
    std::vector<std::string> cells{csv_cell(f), csv_cell(gamma.factor(f))};
    for (std::size_t k = 1; k <= config.max_impact; ++k) cells.push_back(csv_cell(limit_gamma_k(t.theta_star, k).factor(f)));
    density.add_cells(cells);
  }
  out.write("gamma_density.csv", density.str());

  CsvTable tmap({"theta", "T", "T_minus_theta"});
  const double hi = std::max(2.0, 2.0 * t.theta_star);
  for (int i = 0; i <= kGrid; ++i) {
    const double theta = 1.0 + (hi - 1.0) * static_cast<double>(i) / kGrid;
    const double value = map_T(dist, lambda, theta);
    tmap.add(theta, value, value - theta);
  }
  out.write("map_T.csv", tmap.str());

  log << "phase " << to_string(t.phase) << ", theta* = " << format_double(t.theta_star) << ", condensate "
      << format_double(t.condensate_mass) << "\n"
      << "wrote theory to " << out.root().string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

std::string aggregates_json(const RunAggregates& r) {
  json j;
  j["lambda"] = r.lambda;
  j["fitness"] = r.fitness;
  j["model"] = r.model;
  j["replicas"] = r.replicas;
  j["bins"] = r.bins;
  j["max_k"] = r.max_k;
  j["epsilon"] = r.epsilon;
  json cps = json::array();
  for (const auto& a : r.checkpoints) {
    json c;
    c["n"] = a.n;
    c["replicas"] = a.replicas;
    c["fbar"] = ms_json(a.fbar);
    c["total_mass"] = ms_json(a.total_mass);
    c["top_window_mass"] = ms_json(a.top_window_mass);
    json g = json::array();
    for (const auto& m : a.gamma) g.push_back(ms_json(m));
    c["gamma"] = g;
    json pk = json::array();
    for (const auto& m : a.pk) pk.push_back(ms_json(m));
    c["pk"] = pk;
    json gk = json::array();
    for (const auto& row : a.gamma_k) {
      json jr = json::array();
      for (const auto& m : row) jr.push_back(ms_json(m));
      gk.push_back(jr);
    }
    c["gamma_k"] = gk;
    cps.push_back(c);
  }
  j["checkpoints"] = cps;
  return j.dump(1) + "\n";
}

RunAggregates parse_aggregates_json(const std::string& text) {
  const json j = json::parse(text);
  RunAggregates r;
  r.lambda = j.at("lambda").get<double>();
  r.fitness = j.at("fitness").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.replicas = j.at("replicas").get<std::size_t>();
  r.bins = j.at("bins").get<std::size_t>();
  r.max_k = j.at("max_k").get<std::size_t>();
  r.epsilon = j.at("epsilon").get<double>();
  for (const auto& c : j.at("checkpoints")) {
    SnapshotAggregate a;
    a.n = c.at("n").get<std::uint64_t>();
    a.replicas = c.at("replicas").get<std::size_t>();
    a.fbar = ms_from(c.at("fbar"));
    a.total_mass = ms_from(c.at("total_mass"));
    a.top_window_mass = ms_from(c.at("top_window_mass"));
    for (const auto& m : c.at("gamma")) a.gamma.push_back(ms_from(m));
    for (const auto& m : c.at("pk")) a.pk.push_back(ms_from(m));
    for (const auto& row : c.at("gamma_k")) {
      std::vector<MeanStderr> v;
      for (const auto& m : row) v.push_back(ms_from(m));
      a.gamma_k.push_back(std::move(v));
    }
    r.checkpoints.push_back(std::move(a));
  }
  return r;
}

int cmd_simulate(const ExperimentConfig& config, int threads, std::ostream& log) {
  const ReplicaPlan plan = config.plan();
  const OutputDir out(config.output_dir);
  const auto results = run_replicas(plan, threads);

  json summary;
  summary["config"] = json::parse(to_json(config));
  json reps = json::array();
  bool all_ok = true;
  for (const auto& r : results) {
    reps.push_back({{"replica", r.replica}, {"seed", r.seed}, {"edges", r.edges}, {"ok", r.ok()}, {"error", r.error}});
    if (!r.ok()) {
      all_ok = false;
      log << "replica " << r.replica << " failed: " << r.error << "\n";
      continue;
    }
    write_replica(out, r, plan.run.snapshot);
  }
  summary["replicas"] = reps;
  if (!all_ok) {
    summary["status"] = "audit_failure";
    out.write("summary.json", summary.dump(2) + "\n");
    return kExitAuditFailure;
  }

  CsvTable traj({"replica", "n", "fbar"});
  for (const auto& r : results)
    for (const auto& s : r.trajectory) traj.add(std::uint64_t{r.replica}, s.n, s.fbar);
  out.write("fbar_trajectory.csv", traj.str());

  RunAggregates agg;
  agg.lambda = config.lambda;
  agg.fitness = plan.dist.describe();
  agg.model = plan.model.name();
  agg.replicas = results.size();
  agg.bins = config.bins;
  agg.max_k = config.max_impact;
  agg.epsilon = config.epsilon;
  const std::size_t checkpoints = results.front().trajectory.size();
  for (std::size_t c = 0; c < checkpoints; ++c) agg.checkpoints.push_back(aggregate_snapshots(at_checkpoint(results, c)));
  out.write("aggregates.json", aggregates_json(agg));
  out.write("aggregates.csv", aggregates_csv(agg));

  const TheoryTables theory = theory_tables(plan.dist, config.lambda, config.snapshot_options());
  const SnapshotAggregate& last = agg.checkpoints.back();
  const Binning binning(config.bins);
  CsvTable hist({"bin_lo", "bin_hi", "empirical_mass", "empirical_stderr", "predicted_mass", "abs_error"});
  for (std::size_t b = 0; b < config.bins; ++b)
    hist.add(binning.window(b).lo, binning.window(b).hi, last.gamma[b].mean, last.gamma[b].stderr_,
             theory.gamma_bins[b], std::fabs(last.gamma[b].mean - theory.gamma_bins[b]));
  out.write("gamma_final.csv", hist.str());

  summary["status"] = "ok";
  summary["theta_star"] = theory.theta_star;
  summary["phase"] = std::string(to_string(theory.phase));
  summary["final"] = {{"n", last.n},
                      {"fbar", ms_json(last.fbar)},
                      {"total_mass", ms_json(last.total_mass)},
                      {"top_window_mass", ms_json(last.top_window_mass)}};
  out.write("summary.json", summary.dump(2) + "\n");

  log << results.size() << " replicas to n = " << config.n_target << ", mean fbar " << format_double(last.fbar.mean)
      << " (theta* " << format_double(theory.theta_star) << ")\n"
      << "wrote run to " << out.root().string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

int cmd_compare(const ExperimentConfig& config, const std::string& run_dir, const std::string& theory_file,
                std::ostream& log) {
  namespace fs = std::filesystem;
  const fs::path agg_path = fs::path(run_dir) / "aggregates.json";
  if (!fs::is_directory(run_dir) || fs::is_empty(run_dir))
    throw std::invalid_argument("run directory is missing or empty: " + run_dir);
  if (!fs::exists(agg_path)) throw std::invalid_argument("run directory has no aggregates.json: " + run_dir);
  const RunAggregates run = parse_aggregates_json(read_file(agg_path));
  const TheoryTables theory = parse_theory_json(read_file(theory_file));

  if (run.lambda != theory.lambda)
    throw std::invalid_argument("lambda differs between run (" + format_double(run.lambda) + ") and theory (" +
                                format_double(theory.lambda) + ")");
  if (run.lambda != config.lambda) throw std::invalid_argument("lambda differs between run and config");
  if (run.fitness != theory.fitness) throw std::invalid_argument("fitness law differs between run and theory");
  if (run.bins != theory.bins || run.max_k != theory.max_k || run.epsilon != theory.epsilon)
    throw std::invalid_argument("binning (bins, K, epsilon) differs between run and theory");
  if (run.checkpoints.empty()) throw std::invalid_argument("run has no checkpoints");

  const auto checks = evaluate_run(run.checkpoints, theory);
  bool all = true;
  std::string text;
  for (const auto& c : checks) {
    all = all && c.pass;
    text += format_check(c) + "\n";
  }
  json report;
  report["model"] = run.model;
  report["phase"] = std::string(to_string(theory.phase));
  report["n"] = run.checkpoints.back().n;
  report["replicas"] = run.replicas;
  report["all_pass"] = all;
  report["checks"] = checks_json(checks);

  const OutputDir out(config.output_dir);
  out.write("compare_report.json", report.dump(2) + "\n");
  out.write("compare_report.txt", text);
  log << text;
  return all ? kExitOk : kExitChecksFailed;
}

// ---------------------------------------------------------------------------
// check-kernel

int cmd_check_kernel(const ExperimentConfig& config, std::ostream& log) {
  const KernelCheckSpec spec = config.kernel_check.value_or(KernelCheckSpec{});
  const AttachmentModel model = config.model.build();
  GraphState state(config.fitness.build(), config.lambda, model, config.seed);
  std::vector<GraphState> frozen;
  for (auto n : spec.checkpoints) {
    while (state.n() < n) state.step();
    state.audit();
    frozen.push_back(state);
  }
  std::vector<const GraphState*> states;
  for (const auto& s : frozen) states.push_back(&s);
  const ContractReport report = check_contract(model, states, spec.options(config.seed));

  const OutputDir out(config.output_dir);
  out.write("kernel_report.json", report.to_json() + "\n");
  log << report.model << ": A1 " << to_string(report.a1) << ", A2 " << to_string(report.a2) << ", A3 "
      << to_string(report.a3) << ", A4 " << to_string(report.a4) << ", A5 " << to_string(report.a5) << "\n";
  return report.all_pass() ? kExitOk : kExitChecksFailed;
}

}  // namespace pafit
