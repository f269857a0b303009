#include "smoothrl/bench/config.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace smoothrl::bench {

namespace {

template <class T>
using Setter = std::function<void(T&, double)>;

template <class T>
using FieldTable = std::map<std::string, Setter<T>, std::less<>>;

int as_int(double v, const std::string& key) {
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("config: " + key + " must be an integer");
  return static_cast<int>(v);
}

const FieldTable<ppo::PpoConfig>& ppo_fields() {
  static const FieldTable<ppo::PpoConfig> t{
      {"clip_ratio", [](ppo::PpoConfig& c, double v) { c.clip_ratio = v; }},
      {"gamma", [](ppo::PpoConfig& c, double v) { c.gamma = v; }},
      {"gae_lambda", [](ppo::PpoConfig& c, double v) { c.gae_lambda = v; }},
      {"epochs", [](ppo::PpoConfig& c, double v) { c.epochs = as_int(v, "ppo.epochs"); }},
      {"minibatch_size", [](ppo::PpoConfig& c, double v) { c.minibatch_size = as_int(v, "ppo.minibatch_size"); }},
      {"learning_rate", [](ppo::PpoConfig& c, double v) { c.learning_rate = v; }},
      {"adam_epsilon", [](ppo::PpoConfig& c, double v) { c.adam_epsilon = v; }},
      {"entropy_coef", [](ppo::PpoConfig& c, double v) { c.entropy_coef = v; }},
      {"value_coef", [](ppo::PpoConfig& c, double v) { c.value_coef = v; }},
      {"max_grad_norm", [](ppo::PpoConfig& c, double v) { c.max_grad_norm = v; }},
      {"rollout_length", [](ppo::PpoConfig& c, double v) { c.rollout_length = as_int(v, "ppo.rollout_length"); }},
  };
  return t;
}

using regularizers::MethodSpec;

const FieldTable<MethodSpec>& caps_fields() {
  static const FieldTable<MethodSpec> t{
      {"sigma", [](MethodSpec& m, double v) { m.caps.sigma = v; }},
      {"lambda_t", [](MethodSpec& m, double v) { m.caps.lambda_t = v; }},
      {"lambda_s", [](MethodSpec& m, double v) { m.caps.lambda_s = v; }},
  };
  return t;
}

const FieldTable<MethodSpec>& l2c2_fields() {
  static const FieldTable<MethodSpec> t{
      {"sigma", [](MethodSpec& m, double v) { m.l2c2.sigma = v; }},
      {"lambda_pi", [](MethodSpec& m, double v) { m.l2c2.lambda_pi = v; }},
      {"lambda_v", [](MethodSpec& m, double v) { m.l2c2.lambda_v = v; }},
      {"lambda_lower", [](MethodSpec& m, double v) { m.l2c2.lambda_lower = v; }},
      {"lambda_upper", [](MethodSpec& m, double v) { m.l2c2.lambda_upper = v; }},
      {"beta", [](MethodSpec& m, double v) { m.l2c2.beta = v; }},
  };
  return t;
}

const FieldTable<MethodSpec>& lipsnet_fields() {
  static const FieldTable<MethodSpec> t{
      {"k_loss_weight", [](MethodSpec& m, double v) { m.lipsnet.k_loss_weight = v; }},
      {"epsilon", [](MethodSpec& m, double v) { m.lipsnet.epsilon = v; }},
      {"k_init", [](MethodSpec& m, double v) { m.lipsnet.k_init = v; }},
  };
  return t;
}

const FieldTable<MethodSpec>& liu_fields() {
  static const FieldTable<MethodSpec> t{
      {"c_loss_weight", [](MethodSpec& m, double v) { m.liu.c_loss_weight = v; }},
      {"c_init_softplus", [](MethodSpec& m, double v) { m.liu.c_init_softplus = v; }},
  };
  return t;
}

template <class T>
void apply_fields(const FieldTable<T>& table, const std::map<std::string, double>& values, T& target,
                  const std::string& section) {
  for (const auto& [key, v] : values) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("config: unknown key " + section + "." + key);
    it->second(target, v);
  }
}

template <class T>
std::string known_keys(const FieldTable<T>& table) {
  std::string out;
  for (const auto& [k, _] : table) out += (out.empty() ? "" : ", ") + k;
  return out;
}

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? " (line " + std::to_string(m.line + 1) + ")" : "";
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("config: bad value for " + key + where(n));
  }
}

std::vector<std::string> string_list(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) return {scalar<std::string>(n, key)};
  if (!n.IsSequence()) throw ConfigError("config: " + key + " must be a list" + where(n));
  std::vector<std::string> out;
  for (const auto& item : n) out.push_back(scalar<std::string>(item, key));
  return out;
}

std::map<std::string, double> number_map(const YAML::Node& n, const std::string& key) {
  if (!n.IsMap()) throw ConfigError("config: " + key + " must be a mapping" + where(n));
  std::map<std::string, double> out;
  for (const auto& kv : n) {
    const auto k = scalar<std::string>(kv.first, key);
    out[k] = scalar<double>(kv.second, key + "." + k);
  }
  return out;
}

void check_keys(const YAML::Node& n, std::initializer_list<std::string_view> allowed, const std::string& section) {
  for (const auto& kv : n) {
    const auto k = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError("config: unknown key " + (section.empty() ? k : section + "." + k) + where(kv.first));
    }
  }
}

}  // namespace

MethodSpec MethodOverrides::apply(MethodSpec spec) const {
  apply_fields(caps_fields(), caps, spec, "caps");
  apply_fields(l2c2_fields(), l2c2, spec, "l2c2");
  apply_fields(lipsnet_fields(), lipsnet, spec, "lipsnet");
  apply_fields(liu_fields(), liu, spec, "liu");
  return spec;
}

void BenchmarkConfig::validate() const {
  if (format_version != kFormatVersion) {
    throw ConfigError("config: unsupported format_version " + std::to_string(format_version));
  }
  if (envs.empty()) throw ConfigError("config: no environments");
  if (methods.empty()) throw ConfigError("config: no methods");
  if (seeds.empty()) throw ConfigError("config: seeds must be >= 1");
  if (eval_episodes <= 0) throw ConfigError("config: eval_episodes must be positive");
  if (workers <= 0) throw ConfigError("config: workers must be positive");
  if (traces.episodes < 0) throw ConfigError("config: traces.episodes must be >= 0");
  const auto known_envs = envs::environment_names();
  for (const auto& e : envs) {
    if (std::find(known_envs.begin(), known_envs.end(), e) == known_envs.end()) {
      throw ConfigError("config: unknown environment '" + e + "'");
    }
  }
  for (const auto& [e, s] : steps) {
    if (s <= 0) throw ConfigError("config: steps for " + e + " must be positive");
  }
  if (std::set<std::string>(methods.begin(), methods.end()).size() != methods.size()) {
    throw ConfigError("config: duplicate method");
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("config: duplicate seed");
  }
  for (const auto& m : methods) method_for(m).validate();
  for (const auto& e : envs) {
    ppo_for(e).validate();
    if (auto dr = randomization_for(e)) dr->validate();
  }
}

long BenchmarkConfig::steps_for(const std::string& env) const {
  const auto it = steps.find(env);
  return it != steps.end() ? it->second : ppo::PpoConfig::defaults_for(env).total_steps;
}

ppo::PpoConfig BenchmarkConfig::ppo_for(const std::string& env) const {
  ppo::PpoConfig c = ppo::PpoConfig::defaults_for(env);
  apply_fields(ppo_fields(), ppo, c, "ppo");
  c.total_steps = steps_for(env);
  return c;
}

MethodSpec BenchmarkConfig::method_for(const std::string& name) const {
  return method_params.apply(MethodSpec::parse(name));
}

std::optional<envs::DomainRandomizationConfig> BenchmarkConfig::randomization_for(const std::string& env) const {
  if (!randomization) return std::nullopt;
  auto c = envs::DomainRandomizationConfig::defaults_for(env);
  if (dr_action_noise_std) c.action_noise_std = *dr_action_noise_std;
  if (dr_mass_scale_range) c.mass_scale_range = *dr_mass_scale_range;
  for (const auto& [group, level] : dr_obs_noise_std) c.obs_noise_std[group] = level;
  return c;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  auto parse_one = [&](const std::string& s) -> std::uint64_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || s.front() == '-') throw ConfigError("bad seed list '" + text + "'");
    return v;
  };
  if (text.find(',') == std::string::npos) {
    const std::uint64_t n = parse_one(text);
    if (n == 0) throw ConfigError("seed count must be >= 1");
    std::vector<std::uint64_t> out(n);
    for (std::uint64_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_one(item));
  return out;
}

BenchmarkConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  BenchmarkConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("config: top level must be a mapping");
  check_keys(root,
             {"format_version", "envs", "methods", "seeds", "steps", "eval_episodes", "output", "workers",
              "domain_randomization", "ppo", "caps", "l2c2", "lipsnet", "liu", "traces"},
             "");

  if (root["format_version"]) c.format_version = scalar<int>(root["format_version"], "format_version");
  if (root["envs"]) c.envs = string_list(root["envs"], "envs");
  if (root["methods"]) {
    c.methods = string_list(root["methods"], "methods");
    if (c.methods.size() == 1 && c.methods[0] == "all") c.methods = regularizers::method_names();
  }
  if (const auto s = root["seeds"]) {
    if (s.IsSequence()) {
      c.seeds.clear();
      for (const auto& item : s) c.seeds.push_back(scalar<std::uint64_t>(item, "seeds"));
    } else {
      c.seeds = parse_seeds(scalar<std::string>(s, "seeds"));
    }
  }
  if (const auto s = root["steps"]) {
    if (s.IsMap()) {
      for (const auto& kv : s) c.steps[kv.first.as<std::string>()] = scalar<long>(kv.second, "steps");
    } else {
      const long n = scalar<long>(s, "steps");
      for (const auto& e : c.envs) c.steps[e] = n;
    }
  }
  if (root["eval_episodes"]) c.eval_episodes = scalar<int>(root["eval_episodes"], "eval_episodes");
  if (root["output"]) c.output_dir = scalar<std::string>(root["output"], "output");
  if (root["workers"]) c.workers = scalar<int>(root["workers"], "workers");

  if (const auto dr = root["domain_randomization"]) {
    if (!dr.IsMap()) throw ConfigError("config: domain_randomization must be a mapping" + where(dr));
    check_keys(dr, {"enabled", "action_noise_std", "mass_scale_range", "obs_noise_std"}, "domain_randomization");
    c.randomization = dr["enabled"] ? scalar<bool>(dr["enabled"], "domain_randomization.enabled") : true;
    if (dr["action_noise_std"]) {
      c.dr_action_noise_std = scalar<double>(dr["action_noise_std"], "domain_randomization.action_noise_std");
    }
    if (const auto r = dr["mass_scale_range"]) {
      if (!r.IsSequence() || r.size() != 2) {
        throw ConfigError("config: domain_randomization.mass_scale_range must be [low, high]" + where(r));
      }
      c.dr_mass_scale_range = envs::Interval{scalar<double>(r[0], "mass_scale_range"),
                                             scalar<double>(r[1], "mass_scale_range")};
    }
    if (dr["obs_noise_std"]) c.dr_obs_noise_std = number_map(dr["obs_noise_std"], "domain_randomization.obs_noise_std");
  }

  auto section = [&](const char* name, auto& target, const auto& table) {
    if (!root[name]) return;
    target = number_map(root[name], name);
    for (const auto& [k, _] : target) {
      if (!table.count(k)) {
        throw ConfigError("config: unknown key " + std::string(name) + "." + k + " (expected one of " +
                          known_keys(table) + ")");
      }
    }
  };
  section("ppo", c.ppo, ppo_fields());
  section("caps", c.method_params.caps, caps_fields());
  section("l2c2", c.method_params.l2c2, l2c2_fields());
  section("lipsnet", c.method_params.lipsnet, lipsnet_fields());
  section("liu", c.method_params.liu, liu_fields());

  if (const auto t = root["traces"]) {
    if (!t.IsMap()) throw ConfigError("config: traces must be a mapping" + where(t));
    check_keys(t, {"episodes", "spectrum"}, "traces");
    if (t["episodes"]) c.traces.episodes = scalar<int>(t["episodes"], "traces.episodes");
    if (t["spectrum"]) c.traces.spectrum = scalar<bool>(t["spectrum"], "traces.spectrum");
  }
  c.validate();
  return c;
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string RunKey::id() const { return env + "__" + method + "__s" + std::to_string(seed); }

std::vector<RunKey> expand(const BenchmarkConfig& config) {
  std::vector<RunKey> out;
  for (const auto& e : config.envs) {
    for (const auto& m : config.methods) {
      for (auto s : config.seeds) out.push_back({e, m, s});
    }
  }
  return out;
}

std::string run_fingerprint(const BenchmarkConfig& config, const RunKey& key) {
  const auto p = config.ppo_for(key.env);
  std::ostringstream o;
  o << "format_version=" << config.format_version << ";env=" << key.env << ";seed=" << key.seed
    << ";eval_episodes=" << config.eval_episodes << ";method={" << config.method_for(key.method).canonical() << "}"
    << ";ppo={clip_ratio=" << format_number(p.clip_ratio) << ";gamma=" << format_number(p.gamma)
    << ";gae_lambda=" << format_number(p.gae_lambda) << ";epochs=" << p.epochs
    << ";minibatch_size=" << p.minibatch_size << ";learning_rate=" << format_number(p.learning_rate)
    << ";adam_epsilon=" << format_number(p.adam_epsilon) << ";entropy_coef=" << format_number(p.entropy_coef)
    << ";value_coef=" << format_number(p.value_coef) << ";max_grad_norm=" << format_number(p.max_grad_norm)
    << ";rollout_length=" << p.rollout_length << ";total_steps=" << p.total_steps << "}";
  if (const auto dr = config.randomization_for(key.env)) {
    o << ";dr={action_noise_std=" << format_number(dr->action_noise_std)
      << ";mass_scale_range=" << format_number(dr->mass_scale_range.low) << ","
      << format_number(dr->mass_scale_range.high);
    for (const auto& [g, v] : dr->obs_noise_std) o << ";obs." << g << "=" << format_number(v);
    for (const auto& [g, r] : dr->gain_ranges) {
      o << ";gain." << g << "=" << format_number(r.low) << "," << format_number(r.high);
    }
    o << "}";
  } else {
    o << ";dr=off";
  }
  return o.str();
}

std::string run_hash(const BenchmarkConfig& config, const RunKey& key) {
  return fnv1a_hex(run_fingerprint(config, key));
}

}  // namespace smoothrl::bench
