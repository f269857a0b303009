#include "smoothrl/policies/actor_critic.hpp"

#include "smoothrl/error.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace smoothrl::policies {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("checkpoint meta '" + key + "': not a number: " + text);
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("checkpoint meta '" + key + "': not an integer: " + text);
  }
  return v;
}

std::string format_widths(const std::vector<int>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

std::vector<int> parse_widths(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    out.push_back(parse_int(key, text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

const std::string& lookup(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw IoError("checkpoint is missing meta key '" + key + "'");
  return it->second;
}

MlpSpec actor_spec(const PolicySpec& s) {
  return {s.obs_dim, s.act_dim, s.actor_hidden, s.activation, Activation::kLinear};
}
MlpSpec f_spec(const PolicySpec& s) {
  return {s.obs_dim, s.act_dim, s.lipsnet.f_hidden, s.lipsnet.f_activation, Activation::kLinear};
}
MlpSpec k_spec(const PolicySpec& s) {
  return {s.obs_dim, 1, s.lipsnet.k_hidden, s.lipsnet.k_activation, Activation::kSoftplus};
}
MlpSpec critic_spec(const PolicySpec& s) {
  return {s.obs_dim, 1, s.critic_hidden, Activation::kTanh, Activation::kLinear};
}

constexpr double kHiddenGain = std::numbers::sqrt2;
constexpr double kPolicyOutputGain = 0.01;
constexpr double kValueOutputGain = 1.0;
constexpr double kVarEpsilon = 1e-8;

}  // namespace

void PolicySpec::validate() const {
  if (obs_dim <= 0 || act_dim <= 0) throw ConfigError("policy: observation and action dims must be positive");
  actor_spec(*this).validate();
  critic_spec(*this).validate();
  if (!(obs_clip > 0.0)) throw ConfigError("policy: obs_clip must be > 0");
  if (!(log_std_init >= kLogStdMin && log_std_init <= kLogStdMax)) throw ConfigError("policy: log_std_init out of range");
  if (!(spectral_norm.delta > 0.0) || spectral_norm.train_iterations < 0 || spectral_norm.checkpoint_iterations < 0) {
    throw ConfigError("policy: invalid spectral_norm settings");
  }
  if (!(liu.c_init_softplus > 0.0) || !(liu.c_loss_weight >= 0.0)) throw ConfigError("policy: invalid liu settings");
  lipsnet.validate();
}

std::map<std::string, std::string> PolicySpec::to_meta() const {
  return {
      {"policy.architecture", std::string(to_string(architecture))},
      {"policy.obs_dim", std::to_string(obs_dim)},
      {"policy.act_dim", std::to_string(act_dim)},
      {"policy.actor_hidden", format_widths(actor_hidden)},
      {"policy.critic_hidden", format_widths(critic_hidden)},
      {"policy.activation", std::string(ad::to_string(activation))},
      {"policy.log_std_init", format_double(log_std_init)},
      {"policy.obs_clip", format_double(obs_clip)},
      {"policy.sn.delta", format_double(spectral_norm.delta)},
      {"policy.sn.train_iterations", std::to_string(spectral_norm.train_iterations)},
      {"policy.sn.checkpoint_iterations", std::to_string(spectral_norm.checkpoint_iterations)},
      {"policy.liu.c_init_softplus", format_double(liu.c_init_softplus)},
      {"policy.liu.c_loss_weight", format_double(liu.c_loss_weight)},
      {"policy.lipsnet.f_hidden", format_widths(lipsnet.f_hidden)},
      {"policy.lipsnet.f_activation", std::string(ad::to_string(lipsnet.f_activation))},
      {"policy.lipsnet.k_hidden", format_widths(lipsnet.k_hidden)},
      {"policy.lipsnet.k_activation", std::string(ad::to_string(lipsnet.k_activation))},
      {"policy.lipsnet.epsilon", format_double(lipsnet.epsilon)},
      {"policy.lipsnet.k_init", format_double(lipsnet.k_init)},
      {"policy.lipsnet.k_loss_weight", format_double(lipsnet.k_loss_weight)},
  };
}

PolicySpec PolicySpec::from_meta(const std::map<std::string, std::string>& m) {
  auto d = [&](const std::string& k) { return parse_double(k, lookup(m, k)); };
  auto i = [&](const std::string& k) { return parse_int(k, lookup(m, k)); };
  auto w = [&](const std::string& k) { return parse_widths(k, lookup(m, k)); };
  PolicySpec s;
  s.architecture = parse_architecture(lookup(m, "policy.architecture"));
  s.obs_dim = i("policy.obs_dim");
  s.act_dim = i("policy.act_dim");
  s.actor_hidden = w("policy.actor_hidden");
  s.critic_hidden = w("policy.critic_hidden");
  s.activation = ad::parse_activation(lookup(m, "policy.activation"));
  s.log_std_init = d("policy.log_std_init");
  s.obs_clip = d("policy.obs_clip");
  s.spectral_norm = {d("policy.sn.delta"), i("policy.sn.train_iterations"), i("policy.sn.checkpoint_iterations")};
  s.liu = {d("policy.liu.c_init_softplus"), d("policy.liu.c_loss_weight")};
  s.lipsnet.f_hidden = w("policy.lipsnet.f_hidden");
  s.lipsnet.f_activation = ad::parse_activation(lookup(m, "policy.lipsnet.f_activation"));
  s.lipsnet.k_hidden = w("policy.lipsnet.k_hidden");
  s.lipsnet.k_activation = ad::parse_activation(lookup(m, "policy.lipsnet.k_activation"));
  s.lipsnet.epsilon = d("policy.lipsnet.epsilon");
  s.lipsnet.k_init = d("policy.lipsnet.k_init");
  s.lipsnet.k_loss_weight = d("policy.lipsnet.k_loss_weight");
  s.validate();
  return s;
}

Tensor gaussian_log_prob(const Tensor& mean, const Tensor& log_std, const Tensor& actions) {
  const Tensor z = ad::div(ad::sub(actions, mean), ad::exp(log_std));
  const double constant = -0.5 * std::log(2.0 * std::numbers::pi) * static_cast<double>(mean.cols());
  const Tensor per_row = ad::sum_rows(ad::add(ad::scale(ad::square(z), -0.5), ad::neg(log_std)));
  return ad::add_scalar(per_row, constant);
}

double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> action) {
  double lp = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double z = (action[i] - mean[i]) / std::exp(log_std[i]);
    lp += -0.5 * z * z - log_std[i] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

ActorCritic ActorCritic::create(const PolicySpec& spec, std::uint64_t seed) {
  spec.validate();
  ActorCritic ac;
  ac.spec_ = spec;
  Rng rng = make_stream(seed, "init");
  ParameterStore& s = ac.params_;
  switch (spec.architecture) {
    case Architecture::kPlain:
      Mlp::create(s, "actor", actor_spec(spec), rng, kHiddenGain, kPolicyOutputGain);
      break;
    case Architecture::kLocalSn: {
      const Mlp net = Mlp::create(s, "actor", actor_spec(spec), rng, kHiddenGain, kPolicyOutputGain);
      Matrix u(spec.act_dim, 1);
      for (Eigen::Index r = 0; r < u.rows(); ++r) u(r, 0) = normal(rng);
      u /= u.norm();
      Matrix v = Matrix::Zero(1, spec.actor_hidden.back());
      power_iteration(s.value(net.layers().back().weight), u, v, 1);
      s.add("actor.sn_u", std::move(u), false);
      s.add("actor.sn_v", std::move(v), false);
      break;
    }
    case Architecture::kLiu: {
      Mlp::create(s, "actor", actor_spec(spec), rng, kHiddenGain, kPolicyOutputGain);
      const double c0 = ad::softplus_inverse(spec.liu.c_init_softplus);
      for (std::size_t i = 0; i <= spec.actor_hidden.size(); ++i) {
        s.add("actor.c" + std::to_string(i), Matrix::Constant(1, 1, c0));
      }
      break;
    }
    case Architecture::kLipsNet: {
      Mlp::create(s, "actor.f", f_spec(spec), rng, kHiddenGain, kPolicyOutputGain);
      const Mlp k = Mlp::create(s, "actor.k", k_spec(spec), rng, kHiddenGain, 1.0);
      s.mutable_value(k.layers().back().weight).setZero();
      s.mutable_value(k.layers().back().bias).setConstant(ad::softplus_inverse(spec.lipsnet.k_init));
      break;
    }
  }
  s.add("actor.log_std", Matrix::Constant(1, spec.act_dim, spec.log_std_init));
  Mlp::create(s, "critic", critic_spec(spec), rng, kHiddenGain, kValueOutputGain);
  s.add("obs_rms.mean", Matrix::Zero(1, spec.obs_dim), false);
  s.add("obs_rms.var", Matrix::Ones(1, spec.obs_dim), false);
  s.add("obs_rms.count", Matrix::Constant(1, 1, 1e-4), false);
  ac.attach();
  return ac;
}

ActorCritic ActorCritic::from_checkpoint(const ad::Checkpoint& checkpoint) {
  ActorCritic ac;
  ac.spec_ = PolicySpec::from_meta(checkpoint.meta);
  ac.params_ = checkpoint.params;
  ac.attach();
  return ac;
}

void ActorCritic::attach() {
  const ParameterStore& s = params_;
  switch (spec_.architecture) {
    case Architecture::kPlain:
      mean_ = PlainMean(Mlp::attach(s, "actor", actor_spec(spec_)));
      break;
    case Architecture::kLocalSn:
      mean_ = SpectralNormMean(Mlp::attach(s, "actor", actor_spec(spec_)), s.index("actor.sn_u"),
                               s.index("actor.sn_v"), spec_.spectral_norm);
      break;
    case Architecture::kLiu: {
      std::vector<std::size_t> c;
      for (std::size_t i = 0; i <= spec_.actor_hidden.size(); ++i) c.push_back(s.index("actor.c" + std::to_string(i)));
      mean_ = LiuMean(Mlp::attach(s, "actor", actor_spec(spec_)), std::move(c), spec_.liu);
      break;
    }
    case Architecture::kLipsNet:
      mean_ = LipsNetMean(Mlp::attach(s, "actor.f", f_spec(spec_)), Mlp::attach(s, "actor.k", k_spec(spec_)),
                          spec_.lipsnet);
      break;
  }
  critic_ = Mlp::attach(s, "critic", critic_spec(spec_));
  log_std_ = s.index("actor.log_std");
  rms_mean_ = s.index("obs_rms.mean");
  rms_var_ = s.index("obs_rms.var");
  rms_count_ = s.index("obs_rms.count");
  if (s.value(log_std_).cols() != spec_.act_dim || s.value(rms_mean_).cols() != spec_.obs_dim) {
    throw DimensionError("checkpoint tensors do not match the policy dimensions");
  }
}

ActorCritic::Forward ActorCritic::actor(const Bound& p, const Tensor& obs) const {
  MeanOutput out = std::visit([&](const auto& net) { return net.forward(p, obs); }, mean_);
  return {std::move(out.mean), ad::clamp(p[log_std_], kLogStdMin, kLogStdMax), std::move(out.penalty)};
}

Tensor ActorCritic::value(const Bound& p, const Tensor& obs) const { return critic_.forward(p, obs); }

Matrix ActorCritic::mean(const Matrix& obs) const {
  return std::visit([&](const auto& net) { return net.evaluate(params_, obs); }, mean_);
}

Matrix ActorCritic::value(const Matrix& obs) const { return critic_.evaluate(params_, obs); }

std::vector<double> ActorCritic::log_std() const {
  const Matrix& l = params_.value(log_std_);
  std::vector<double> out(static_cast<std::size_t>(l.cols()));
  for (Eigen::Index i = 0; i < l.cols(); ++i) out[static_cast<std::size_t>(i)] = std::clamp(l(0, i), kLogStdMin, kLogStdMax);
  return out;
}

Matrix ActorCritic::normalize(const Matrix& raw) const {
  if (raw.cols() != spec_.obs_dim) {
    throw DimensionError("observation width " + std::to_string(raw.cols()) + " does not match policy input " +
                         std::to_string(spec_.obs_dim));
  }
  const Matrix& mu = params_.value(rms_mean_);
  const Matrix& var = params_.value(rms_var_);
  Matrix out(raw.rows(), raw.cols());
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
      const double z = (raw(r, c) - mu(0, c)) / std::sqrt(var(0, c) + kVarEpsilon);
      out(r, c) = std::clamp(z, -spec_.obs_clip, spec_.obs_clip);
    }
  }
  return out;
}

std::vector<double> ActorCritic::normalize(std::span<const double> raw) const {
  const Matrix row = Eigen::Map<const Matrix>(raw.data(), 1, static_cast<Eigen::Index>(raw.size()));
  const Matrix n = normalize(row);
  return {n.data(), n.data() + n.size()};
}

void ActorCritic::update_obs_stats(std::span<const double> raw) {
  if (static_cast<int>(raw.size()) != spec_.obs_dim) throw DimensionError("update_obs_stats: wrong observation width");
  Matrix& mu = params_.mutable_value(rms_mean_);
  Matrix& var = params_.mutable_value(rms_var_);
  Matrix& count = params_.mutable_value(rms_count_);
  const double n = count(0, 0);
  const double total = n + 1.0;
  for (Eigen::Index c = 0; c < mu.cols(); ++c) {
    const double delta = raw[static_cast<std::size_t>(c)] - mu(0, c);
    const double m2 = var(0, c) * n + delta * delta * n / total;
    mu(0, c) += delta / total;
    var(0, c) = m2 / total;
  }
  count(0, 0) = total;
}

ActResult ActorCritic::act(std::span<const double> obs, ActMode mode, Rng& rng) const {
  const Matrix x = Eigen::Map<const Matrix>(obs.data(), 1, static_cast<Eigen::Index>(obs.size()));
  if (x.cols() != spec_.obs_dim) throw DimensionError("act: observation width does not match policy input");
  const Matrix mu = mean(x);
  ActResult r;
  r.action.assign(mu.data(), mu.data() + mu.size());
  const std::vector<double> ls = log_std();
  if (mode == ActMode::kStochastic) {
    for (std::size_t i = 0; i < r.action.size(); ++i) r.action[i] += std::exp(ls[i]) * normal(rng);
  }
  r.log_prob = gaussian_log_prob(std::span<const double>(mu.data(), static_cast<std::size_t>(mu.size())), ls, r.action);
  r.value = value(x)(0, 0);
  return r;
}

void ActorCritic::refresh(int iterations) {
  std::visit([&](const auto& net) { net.refresh(params_, iterations); }, mean_);
}

ad::Checkpoint ActorCritic::checkpoint() {
  refresh(spec_.spectral_norm.checkpoint_iterations);
  return {spec_.to_meta(), params_};
}

}  // namespace smoothrl::policies
