#include "smoothrl/envs/environment.hpp"

#include "smoothrl/envs/pendulum.hpp"
#include "smoothrl/envs/reacher.hpp"
#include "smoothrl/error.hpp"

namespace smoothrl::envs {

std::vector<std::string> environment_names() { return {"pendulum", "reacher"}; }

std::unique_ptr<Environment> make_environment(std::string_view name, std::uint64_t seed) {
  if (name == "pendulum") return std::make_unique<Pendulum>(seed);
  if (name == "reacher") return std::make_unique<Reacher>(seed);
  throw ConfigError("unknown environment '" + std::string(name) + "' (expected pendulum|reacher)");
}

}  // namespace smoothrl::envs
