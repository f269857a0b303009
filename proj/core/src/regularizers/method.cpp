#include "smoothrl/regularizers/method.hpp"

#include "smoothrl/error.hpp"

#include <charconv>
#include <sstream>

namespace smoothrl::regularizers {

void CapsConfig::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("caps: sigma must be > 0");
  if (!(lambda_t >= 0.0) || !(lambda_s >= 0.0)) throw ConfigError("caps: weights must be >= 0");
}

void L2c2Config::validate() const {
  if (!(sigma > 0.0)) throw ConfigError("l2c2: sigma must be > 0");
  if (!(lambda_pi >= 0.0) || !(lambda_v >= 0.0) || !(lambda_lower >= 0.0) || !(lambda_upper >= 0.0) || !(beta >= 0.0)) {
    throw ConfigError("l2c2: weights must be >= 0");
  }
}

std::string_view to_string(Regularizer r) {
  switch (r) {
    case Regularizer::kCaps: return "caps";
    case Regularizer::kL2c2: return "l2c2";
    case Regularizer::kLiuLoss: return "liu_loss";
    case Regularizer::kLipsNetKLoss: return "lipsnet_k_loss";
  }
  return "?";
}

std::string_view method_grammar() { return "vanilla | caps | l2c2 | local_sn | liu | lipsnet | lipsnet+caps | lipsnet+l2c2"; }

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"vanilla", "caps",    "l2c2",         "local_sn",
                                              "liu",     "lipsnet", "lipsnet+caps", "lipsnet+l2c2"};
  return names;
}

void MethodSpec::validate() const {
  if (has(Regularizer::kLiuLoss) != (architecture == Architecture::kLiu)) {
    throw ConfigError("method " + name + ": liu_loss must be active exactly when the architecture is liu");
  }
  if (has(Regularizer::kLipsNetKLoss) != (architecture == Architecture::kLipsNet)) {
    throw ConfigError("method " + name + ": lipsnet_k_loss must be active exactly when the architecture is lipsnet");
  }
  if (has(Regularizer::kCaps) && has(Regularizer::kL2c2)) {
    throw ConfigError("method " + name + ": caps and l2c2 cannot both be active");
  }
  caps.validate();
  l2c2.validate();
  if (!(liu.c_init_softplus > 0.0) || !(liu.c_loss_weight >= 0.0)) throw ConfigError("method " + name + ": invalid liu settings");
  lipsnet.validate();
}

MethodSpec MethodSpec::neutralized() const {
  MethodSpec m = *this;
  m.name = name + "@0";
  m.architecture = Architecture::kPlain;
  m.regularizers.erase(Regularizer::kLiuLoss);
  m.regularizers.erase(Regularizer::kLipsNetKLoss);
  m.caps.lambda_t = m.caps.lambda_s = 0.0;
  m.l2c2.lambda_pi = m.l2c2.lambda_v = 0.0;
  return m;
}

MethodSpec MethodSpec::parse(std::string_view text) {
  MethodSpec m;
  m.name = std::string(text);
  if (text == "vanilla") {
  } else if (text == "caps") {
    m.regularizers = {Regularizer::kCaps};
  } else if (text == "l2c2") {
    m.regularizers = {Regularizer::kL2c2};
  } else if (text == "local_sn") {
    m.architecture = Architecture::kLocalSn;
  } else if (text == "liu") {
    m.architecture = Architecture::kLiu;
    m.regularizers = {Regularizer::kLiuLoss};
  } else if (text == "lipsnet") {
    m.architecture = Architecture::kLipsNet;
    m.regularizers = {Regularizer::kLipsNetKLoss};
  } else if (text == "lipsnet+caps") {
    m.architecture = Architecture::kLipsNet;
    m.regularizers = {Regularizer::kLipsNetKLoss, Regularizer::kCaps};
  } else if (text == "lipsnet+l2c2") {
    m.architecture = Architecture::kLipsNet;
    m.regularizers = {Regularizer::kLipsNetKLoss, Regularizer::kL2c2};
  } else {
    throw ConfigError("unknown method '" + std::string(text) + "'; expected " + std::string(method_grammar()));
  }
  return m;
}

policies::PolicySpec MethodSpec::policy_spec(int obs_dim, int act_dim) const {
  validate();
  policies::PolicySpec p;
  p.architecture = architecture;
  p.obs_dim = obs_dim;
  p.act_dim = act_dim;
  p.liu = liu;
  p.lipsnet = lipsnet;
  p.validate();
  return p;
}

namespace {
std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string widths(const std::vector<int>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}
}  // namespace

std::string MethodSpec::canonical() const {
  std::ostringstream o;
  o << "name=" << name << ";architecture=" << policies::to_string(architecture) << ";regularizers=";
  bool first = true;
  for (auto r : regularizers) {
    o << (first ? "" : ",") << to_string(r);
    first = false;
  }
  if (has(Regularizer::kCaps)) {
    o << ";caps.sigma=" << num(caps.sigma) << ";caps.lambda_t=" << num(caps.lambda_t)
      << ";caps.lambda_s=" << num(caps.lambda_s);
  }
  if (has(Regularizer::kL2c2)) {
    o << ";l2c2.sigma=" << num(l2c2.sigma) << ";l2c2.lambda_pi=" << num(l2c2.lambda_pi)
      << ";l2c2.lambda_v=" << num(l2c2.lambda_v) << ";l2c2.lambda_lower=" << num(l2c2.lambda_lower)
      << ";l2c2.lambda_upper=" << num(l2c2.lambda_upper) << ";l2c2.beta=" << num(l2c2.beta);
  }
  if (architecture == Architecture::kLiu) {
    o << ";liu.c_init_softplus=" << num(liu.c_init_softplus) << ";liu.c_loss_weight=" << num(liu.c_loss_weight);
  }
  if (architecture == Architecture::kLipsNet) {
    o << ";lipsnet.f_hidden=" << widths(lipsnet.f_hidden) << ";lipsnet.k_hidden=" << widths(lipsnet.k_hidden)
      << ";lipsnet.epsilon=" << num(lipsnet.epsilon) << ";lipsnet.k_init=" << num(lipsnet.k_init)
      << ";lipsnet.k_loss_weight=" << num(lipsnet.k_loss_weight);
  }
  return o.str();
}

}  // namespace smoothrl::regularizers
