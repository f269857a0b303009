#include "smoothrl/ppo/trainer.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"
#include "smoothrl/regularizers/losses.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace smoothrl::ppo {

using ad::Tensor;

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must be in (0, 1]");
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) throw ConfigError("ppo: clip_ratio must be in (0, 1)");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("ppo: gae_lambda must be in [0, 1]");
  if (epochs <= 0 || minibatch_size <= 0 || rollout_length <= 0 || total_steps <= 0) {
    throw ConfigError("ppo: epochs, minibatch_size, rollout_length and total_steps must be positive");
  }
  if (!(learning_rate > 0.0) || !(adam_epsilon > 0.0) || !(max_grad_norm > 0.0)) {
    throw ConfigError("ppo: learning_rate, adam_epsilon and max_grad_norm must be positive");
  }
  if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0)) throw ConfigError("ppo: loss coefficients must be >= 0");
}

PpoConfig PpoConfig::defaults_for(std::string_view env_name) {
  PpoConfig c;
  if (env_name == "reacher") c.total_steps = 400000;
  return c;
}

Tensor clipped_surrogate_loss(const Tensor& ratio, const Tensor& advantages, double clip_ratio) {
  if (ratio.shape() != advantages.shape()) throw DimensionError("clipped_surrogate_loss: ratio and advantages differ in shape");
  const Tensor surr = ad::minimum(ad::mul(ratio, advantages),
                                  ad::mul(ad::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio), advantages));
  return ad::neg(ad::mean(surr));
}

namespace {

void dump_minibatch(const std::filesystem::path& dir, const Matrix& obs, const Matrix& actions,
                    const std::vector<double>& adv, const std::vector<double>& ret, std::string& where) {
  if (dir.empty()) return;
  std::ostringstream o;
  o.precision(17);
  for (Eigen::Index r = 0; r < obs.rows(); ++r) {
    for (Eigen::Index c = 0; c < obs.cols(); ++c) o << "obs" << c << '=' << obs(r, c) << ' ';
    for (Eigen::Index c = 0; c < actions.cols(); ++c) o << "act" << c << '=' << actions(r, c) << ' ';
    o << "adv=" << adv[static_cast<std::size_t>(r)] << " ret=" << ret[static_cast<std::size_t>(r)] << '\n';
  }
  std::filesystem::create_directories(dir);
  const auto path = dir / "nonfinite_minibatch.txt";
  write_file_atomic(path, o.str());
  where = " (minibatch dumped to " + path.string() + ")";
}

}  // namespace

LossStats ppo_update(policies::ActorCritic& policy, const Trajectory& traj, const Advantages& adv,
                     const PpoConfig& cfg, const regularizers::MethodSpec& method, UpdateContext& ctx) {
  traj.validate();
  if (ctx.optimizer == nullptr || ctx.shuffle_rng == nullptr || ctx.reg_rng == nullptr) {
    throw InputError("ppo_update: optimizer and random streams are required");
  }
  const std::size_t n = traj.size();
  if (n == 0) throw InputError("ppo_update: empty trajectory");
  const Eigen::Index obs_dim = traj.observations.cols(), act_dim = traj.actions.cols();
  const auto trainable = policy.params().trainable_indices();
  const double entropy_const = 0.5 * (1.0 + std::log(2.0 * std::numbers::pi)) * static_cast<double>(act_dim);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  LossStats stats;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[(*ctx.shuffle_rng)() % (i + 1)]);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.minibatch_size));
      const auto b = static_cast<Eigen::Index>(end - start);
      Matrix obs(b, obs_dim), next_obs(b, obs_dim), actions(b, act_dim);
      Matrix old_lp(b, 1), a(b, 1), ret(b, 1);
      std::vector<double> adv_raw(static_cast<std::size_t>(b)), ret_raw(static_cast<std::size_t>(b));
      for (Eigen::Index r = 0; r < b; ++r) {
        const std::size_t k = order[start + static_cast<std::size_t>(r)];
        obs.row(r) = traj.observations.row(static_cast<Eigen::Index>(k));
        next_obs.row(r) = traj.next_observations.row(static_cast<Eigen::Index>(k));
        actions.row(r) = traj.actions.row(static_cast<Eigen::Index>(k));
        old_lp(r, 0) = traj.log_probs[k];
        a(r, 0) = adv_raw[static_cast<std::size_t>(r)] = adv.advantages[k];
        ret(r, 0) = ret_raw[static_cast<std::size_t>(r)] = adv.returns[k];
      }
      if (b > 1) {
        const double mu = a.mean();
        const double sd = std::sqrt((a.array() - mu).square().sum() / static_cast<double>(b - 1));
        a = ((a.array() - mu) / (sd + 1e-8)).matrix();
      }

      policy.refresh(policy.spec().spectral_norm.train_iterations);
      ad::Tape tape;
      const policies::Bound p = policies::Bound::on(tape, policy.params());
      std::vector<Tensor> vars;
      vars.reserve(trainable.size());
      for (std::size_t i : trainable) vars.push_back(p[i]);

      std::vector<Matrix> grads;
      double total_v = 0, rl_v = 0, reg_v = 0, pol_v = 0, val_v = 0, ent_v = 0, clipped = 0;
      try {
        const Tensor s(obs);
        const auto fwd = policy.actor(p, s);
        const Tensor logp = policies::gaussian_log_prob(fwd.mean, fwd.log_std, Tensor(actions));
        const Tensor ratio = ad::exp(ad::sub(logp, Tensor(old_lp)));
        const Tensor policy_loss = clipped_surrogate_loss(ratio, Tensor(a), cfg.clip_ratio);
        const Tensor v = policy.value(p, s);
        const Tensor value_loss = ad::mean(ad::square(ad::sub(v, Tensor(ret))));
        const Tensor entropy = ad::add_scalar(ad::sum(fwd.log_std), entropy_const);
        const Tensor rl = ad::sub(ad::add(policy_loss, ad::scale(value_loss, cfg.value_coef)),
                                  ad::scale(entropy, cfg.entropy_coef));

        Tensor total = rl;
        Tensor reg = Tensor::zeros(1, 1);
        if (!method.regularizers.empty()) {
          regularizers::RegularizerBatch batch;
          batch.pi = [&](const Tensor& x) { return policy.actor(p, x).mean; };
          batch.value = [&](const Tensor& x) { return policy.value(p, x); };
          batch.s = s;
          batch.s_next = Tensor(next_obs);
          batch.pi_s = fwd.mean;
          batch.v_s = v;
          batch.arch_penalty = fwd.penalty;
          reg = regularizers::regularization(method, batch, *ctx.reg_rng);
          total = ad::add(rl, reg);
        }
        total_v = total.item();
        if (!std::isfinite(total_v)) throw NumericError("loss is " + std::to_string(total_v));
        rl_v = rl.item();
        reg_v = reg.item();
        pol_v = policy_loss.item();
        val_v = value_loss.item();
        ent_v = entropy.item();
        clipped = ((ratio.value().array() - 1.0).abs() > cfg.clip_ratio).cast<double>().mean();
        const auto g = ad::grad(total, std::span<const Tensor>(vars));
        grads.reserve(g.size());
        for (const auto& t : g) grads.push_back(t.value());
      } catch (const NumericError& e) {
        std::string where;
        dump_minibatch(ctx.diagnostic_dir, obs, actions, adv_raw, ret_raw, where);
        throw NumericError(std::string("non-finite loss in PPO update: ") + e.what() + where);
      }

      clip_global_norm(grads, cfg.max_grad_norm);
      ctx.optimizer->step(policy.params(), grads);

      stats.total += total_v;
      stats.rl += rl_v;
      stats.reg += reg_v;
      stats.policy += pol_v;
      stats.value += val_v;
      stats.entropy += ent_v;
      stats.clip_fraction += clipped;
      ++stats.minibatches;
    }
  }
  const double m = stats.minibatches;
  for (double* f : {&stats.total, &stats.rl, &stats.reg, &stats.policy, &stats.value, &stats.entropy,
                    &stats.clip_fraction}) {
    *f /= m;
  }
  return stats;
}

namespace {
std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
}  // namespace

void write_training_curve(const std::filesystem::path& path, const std::vector<CurveRow>& rows) {
  std::string out = "step,mean_episode_return,loss_total,loss_rl,loss_reg\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + "," + fmt(r.mean_episode_return) + "," + fmt(r.loss_total) + "," +
           fmt(r.loss_rl) + "," + fmt(r.loss_reg) + "\n";
  }
  write_file_atomic(path, out);
}

std::vector<CurveRow> read_training_curve(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "step,mean_episode_return,loss_total,loss_rl,loss_reg") {
    throw IoError(path.string() + ": not a training curve file");
  }
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CurveRow r;
    std::array<double, 5> f{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::size_t end = i + 1 == f.size() ? line.size() : line.find(',', pos);
      if (end == std::string::npos) throw IoError(path.string() + ": short row: " + line);
      const auto res = std::from_chars(line.data() + pos, line.data() + end, f[i]);
      if (res.ec != std::errc()) throw IoError(path.string() + ": bad number in row: " + line);
      pos = end + 1;
    }
    r.step = static_cast<long>(f[0]);
    r.mean_episode_return = f[1];
    r.loss_total = f[2];
    r.loss_rl = f[3];
    r.loss_reg = f[4];
    rows.push_back(r);
  }
  return rows;
}

TrainResult train(const TrainSpec& spec, const ProgressFn& progress) {
  spec.ppo.validate();
  spec.method.validate();
  std::unique_ptr<envs::Environment> env = envs::make_environment(spec.env, make_stream(spec.seed, "env")());
  if (spec.randomization) env = envs::randomize(std::move(env), *spec.randomization, make_stream(spec.seed, "dr"));

  TrainResult result{policies::ActorCritic::create(
                         spec.method.policy_spec(env->observation_dim(), env->action_dim()), spec.seed),
                     {}, 0};
  policies::ActorCritic& policy = result.policy;
  Adam optimizer(policy.params(), spec.ppo.learning_rate, 0.9, 0.999, spec.ppo.adam_epsilon);
  Rng act_rng = make_stream(spec.seed, "act");
  Rng shuffle_rng = make_stream(spec.seed, "shuffle");
  Rng reg_rng = make_stream(spec.seed, "reg");
  UpdateContext ctx{&optimizer, &shuffle_rng, &reg_rng, spec.diagnostic_dir};
  RolloutState state{env.get(), {}, 0.0, true};

  double last_return = std::nan("");
  while (result.steps < spec.ppo.total_steps) {
    const int length =
        static_cast<int>(std::min<long>(spec.ppo.rollout_length, spec.ppo.total_steps - result.steps));
    const Trajectory traj = collect_rollout(policy, state, length, act_rng);
    result.steps += length;
    const Advantages adv = compute_gae(traj, spec.ppo.gamma, spec.ppo.gae_lambda);
    const LossStats stats = ppo_update(policy, traj, adv, spec.ppo, spec.method, ctx);
    if (!traj.episode_returns.empty()) {
      last_return = std::accumulate(traj.episode_returns.begin(), traj.episode_returns.end(), 0.0) /
                    static_cast<double>(traj.episode_returns.size());
    }
    CurveRow row{result.steps, last_return, stats.total, stats.rl, stats.reg};
    result.curve.push_back(row);
    if (progress) progress(row);
  }
  return result;
}

}  // namespace smoothrl::ppo
