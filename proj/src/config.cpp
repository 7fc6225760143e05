#include "pafit/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pafit {

using json = nlohmann::ordered_json;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

std::uint64_t get_count(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) throw ConfigError("key '" + std::string(key) + "' in " + where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::vector<std::uint64_t> get_counts(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be a list of integers");
  std::vector<std::uint64_t> out;
  for (const auto& x : v) {
    if (!x.is_number_unsigned()) throw ConfigError(where + " must be a list of non-negative integers");
    out.push_back(x.get<std::uint64_t>());
  }
  return out;
}

ModelSpec parse_model(const json& j) {
  only_keys(j, {"type", "kernel"}, "model");
  ModelSpec m;
  m.type = get<std::string>(j, "type", "model");
  m.kernel = get_or<std::string>(j, "kernel", "", "model");
  return m;
}

FitnessSpec parse_fitness(const json& j) {
  FitnessSpec f;
  f.type = get<std::string>(j, "type", "fitness");
  const std::string where = "fitness (" + f.type + ")";
  if (f.type == "uniform") {
    only_keys(j, {"type", "upper", "atom_at_one"}, where);
  } else if (f.type == "discrete") {
    only_keys(j, {"type", "points", "atom_at_one"}, where);
    const auto pts = get<std::vector<std::vector<double>>>(j, "points", where);
    for (const auto& p : pts) {
      if (p.size() != 2) throw ConfigError("discrete points are [value, mass] pairs");
      f.points.push_back({p[0], p[1]});
    }
  } else if (f.type == "density") {
    only_keys(j, {"type", "edges", "coeffs", "atom_at_one"}, where);
    f.edges = get<std::vector<double>>(j, "edges", where);
    f.coeffs = get<std::vector<std::vector<double>>>(j, "coeffs", where);
  } else if (f.type == "beta") {
    only_keys(j, {"type", "alpha", "beta", "upper", "atom_at_one"}, where);
    f.alpha = get<double>(j, "alpha", where);
    f.beta = get<double>(j, "beta", where);
  } else {
    throw ConfigError("unknown fitness type '" + f.type + "'");
  }
  f.upper = get_or<double>(j, "upper", 1.0, where);
  f.atom_at_one = get_or<double>(j, "atom_at_one", 0.0, where);
  return f;
}

KernelCheckSpec parse_kernel_check(const json& j) {
  const std::string where = "kernel_check";
  only_keys(j, {"checkpoints", "trials", "a4_trials", "significance", "tested_vertices"}, where);
  KernelCheckSpec k;
  if (j.contains("checkpoints")) k.checkpoints = get_counts(j.at("checkpoints"), "kernel_check.checkpoints");
  k.trials = get_count(j, "trials", k.trials, where);
  k.a4_trials = get_count(j, "a4_trials", k.a4_trials, where);
  k.significance = get_or<double>(j, "significance", k.significance, where);
  k.tested_vertices = get_count(j, "tested_vertices", k.tested_vertices, where);
  return k;
}

json fitness_json(const FitnessSpec& f) {
  json j;
  j["type"] = f.type;
  if (f.type == "discrete") {
    json pts = json::array();
    for (const auto& p : f.points) pts.push_back({p.value, p.mass});
    j["points"] = pts;
  } else if (f.type == "density") {
    j["edges"] = f.edges;
    j["coeffs"] = f.coeffs;
  } else if (f.type == "beta") {
    j["alpha"] = f.alpha;
    j["beta"] = f.beta;
  }
  if (f.type == "uniform" || f.type == "beta") j["upper"] = f.upper;
  j["atom_at_one"] = f.atom_at_one;
  return j;
}

}  // namespace

AttachmentModel ModelSpec::build() const {
  if (type == "M1") return AttachmentModel::m1();
  if (type == "M2") return AttachmentModel::m2();
  if (type == "custom") {
    const auto names = pathological_kernel_names();
    if (std::find(names.begin(), names.end(), kernel) == names.end())
      throw ConfigError("unknown custom kernel '" + kernel + "'");
    return pathological_kernel(kernel);
  }
  throw ConfigError("unknown model type '" + type + "'");
}

RawDistribution FitnessSpec::raw() const {
  RawDistribution r;
  r.top_atom = atom_at_one;
  if (type == "uniform")
    r.rep = Uniform{upper};
  else if (type == "discrete")
    r.rep = Discrete{points};
  else if (type == "density")
    r.rep = PiecewiseDensity{edges, coeffs};
  else if (type == "beta")
    r.rep = BetaShape{alpha, beta, upper};
  else
    throw ConfigError("unknown fitness type '" + type + "'");
  return r;
}

ContractOptions KernelCheckSpec::options(std::uint64_t seed) const {
  ContractOptions o;
  o.trials = trials;
  o.a4_trials = a4_trials;
  o.significance = significance;
  o.tested_vertices = tested_vertices;
  o.seed = seed;
  return o;
}

void ExperimentConfig::validate() const {
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw ConfigError("lambda must be a positive number");
  try {
    model.build().validate(lambda);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  try {
    fitness.build();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("fitness: ") + e.what());
  }
  if (n_target < 1) throw ConfigError("n_target must be at least 1");
  for (auto c : checkpoints)
    if (c < 1 || c > n_target) throw ConfigError("checkpoints must lie in [1, n_target]");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
      std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end())
    throw ConfigError("checkpoints must be strictly increasing");
  if (replicas < 1) throw ConfigError("replicas must be at least 1");
  if (bins < 1) throw ConfigError("bins must be at least 1");
  if (max_impact < 1) throw ConfigError("max_impact must be at least 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (kernel_check) {
    const auto& k = *kernel_check;
    if (k.checkpoints.empty()) throw ConfigError("kernel_check.checkpoints must not be empty");
    if (!std::is_sorted(k.checkpoints.begin(), k.checkpoints.end()) || k.checkpoints.front() < 2)
      throw ConfigError("kernel_check.checkpoints must be increasing and at least 2");
    if (k.trials < 2 || k.a4_trials < 1) throw ConfigError("kernel_check needs trials >= 2 and a4_trials >= 1");
    if (!(k.significance > 0.0 && k.significance < 1.0)) throw ConfigError("kernel_check.significance must lie in (0, 1)");
    if (k.tested_vertices < 2) throw ConfigError("kernel_check.tested_vertices must be at least 2");
  }
}

std::vector<std::uint64_t> ExperimentConfig::schedule() const {
  return checkpoints.empty() ? geometric_schedule(n_target) : checkpoints;
}

ReplicaPlan ExperimentConfig::plan() const {
  ReplicaPlan p;
  p.dist = fitness.build();
  p.lambda = lambda;
  p.model = model.build();
  p.n_target = n_target;
  p.run.schedule = schedule();
  p.run.snapshot = snapshot_options();
  p.replicas = replicas;
  p.base_seed = seed;
  return p;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j,
            {"schema_version", "model", "lambda", "fitness", "n_target", "checkpoints", "replicas", "seed", "bins",
             "max_impact", "epsilon", "output_dir", "kernel_check"},
            "config");
  const auto version = get<int>(j, "schema_version", "config");
  if (version != kSchemaVersion) throw ConfigError("unsupported schema_version " + std::to_string(version));

  ExperimentConfig c;
  c.model = parse_model(get<json>(j, "model", "config"));
  c.lambda = get<double>(j, "lambda", "config");
  c.fitness = parse_fitness(get<json>(j, "fitness", "config"));
  c.n_target = get_count(j, "n_target", 0, "config");
  if (j.contains("checkpoints")) {
    const auto& cp = j.at("checkpoints");
    if (cp.is_string()) {
      if (cp.get<std::string>() != "geometric") throw ConfigError("checkpoints must be \"geometric\" or a list");
    } else {
      c.checkpoints = get_counts(cp, "checkpoints");
    }
  }
  c.replicas = get_count(j, "replicas", c.replicas, "config");
  c.seed = get_count(j, "seed", c.seed, "config");
  c.bins = get_count(j, "bins", c.bins, "config");
  c.max_impact = get_count(j, "max_impact", c.max_impact, "config");
  c.epsilon = get_or<double>(j, "epsilon", c.epsilon, "config");
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir, "config");
  if (j.contains("kernel_check")) c.kernel_check = parse_kernel_check(j.at("kernel_check"));
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = {{"type", c.model.type}};
  if (c.model.type == "custom") j["model"]["kernel"] = c.model.kernel;
  j["lambda"] = c.lambda;
  j["fitness"] = fitness_json(c.fitness);
  j["n_target"] = c.n_target;
  if (c.checkpoints.empty())
    j["checkpoints"] = "geometric";
  else
    j["checkpoints"] = c.checkpoints;
  j["replicas"] = c.replicas;
  j["seed"] = c.seed;
  j["bins"] = c.bins;
  j["max_impact"] = c.max_impact;
  j["epsilon"] = c.epsilon;
  j["output_dir"] = c.output_dir;
  if (c.kernel_check) {
    const auto& k = *c.kernel_check;
    j["kernel_check"] = {{"checkpoints", k.checkpoints},
                         {"trials", k.trials},
                         {"a4_trials", k.a4_trials},
                         {"significance", k.significance},
                         {"tested_vertices", k.tested_vertices}};
  }
  return j.dump(2) + "\n";
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return to_json(a) == to_json(b); }

}  // namespace pafit
