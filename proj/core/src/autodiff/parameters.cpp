#include "smoothrl/autodiff/parameters.hpp"

#include "smoothrl/error.hpp"
#include "smoothrl/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace smoothrl::ad {

std::size_t ParameterStore::add(std::string name, Matrix value, bool trainable) {
  if (find(name)) throw InputError("duplicate parameter name '" + name + "'");
  entries_.push_back({std::move(name), std::make_shared<Matrix>(std::move(value)), trainable});
  return entries_.size() - 1;
}

Matrix& ParameterStore::mutable_value(std::size_t i) {
  auto& slot = entries_[i].value;
  if (slot.use_count() > 1) slot = std::make_shared<Matrix>(*slot);
  return *slot;
}

void ParameterStore::set(std::size_t i, Matrix value) {
  entries_[i].value = std::make_shared<Matrix>(std::move(value));
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParameterStore::index(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw InputError("no parameter named '" + std::string(name) + "'");
}

std::vector<Tensor> ParameterStore::bind(Tape& tape) const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    out.push_back(e.trainable ? tape.variable(std::shared_ptr<const Matrix>(e.value))
                              : Tensor(std::shared_ptr<const Matrix>(e.value), nullptr, kNoNode));
  }
  return out;
}

std::vector<Tensor> ParameterStore::constants() const {
  std::vector<Tensor> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.emplace_back(std::shared_ptr<const Matrix>(e.value), nullptr, kNoNode);
  return out;
}

std::vector<std::size_t> ParameterStore::trainable_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].trainable) out.push_back(i);
  }
  return out;
}

std::size_t ParameterStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.trainable ? static_cast<std::size_t>(e.value->size()) : 0;
  return n;
}

bool ParameterStore::operator==(const ParameterStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.trainable != b.trainable) return false;
    if (a.value->rows() != b.value->rows() || a.value->cols() != b.value->cols()) return false;
    if (*a.value != *b.value) return false;
  }
  return true;
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  std::string out = "smoothrl-checkpoint " + std::to_string(kCheckpointFormatVersion) + "\n";
  for (const auto& [key, value] : checkpoint.meta) {
    if (key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw InputError("checkpoint meta entries must be single-line, keys without spaces");
    }
    out += "meta " + key + " " + value + "\n";
  }
  const auto& p = checkpoint.params;
  char buf[64];
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Matrix& m = p.value(i);
    out += "tensor " + p.name(i) + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " +
           (p.trainable(i) ? "1" : "0") + "\n";
    for (Index k = 0; k < m.size(); ++k) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), m.data()[k]);
      if (k > 0) out += ' ';
      out.append(buf, end);
    }
    out += "\n";
  }
  out += "end\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [](const std::string& why) -> Checkpoint { throw IoError("malformed checkpoint: " + why); };
  if (!std::getline(in, line) || line != "smoothrl-checkpoint " + std::to_string(kCheckpointFormatVersion)) {
    return fail("bad header");
  }
  Checkpoint cp;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      ended = true;
      break;
    }
    if (line.rfind("meta ", 0) == 0) {
      const auto space = line.find(' ', 5);
      if (space == std::string::npos) return fail("meta line without value");
      cp.meta[line.substr(5, space - 5)] = line.substr(space + 1);
    } else if (line.rfind("tensor ", 0) == 0) {
      std::istringstream hdr(line.substr(7));
      std::string name;
      Index rows = 0, cols = 0;
      int trainable = 1;
      if (!(hdr >> name >> rows >> cols >> trainable) || rows < 0 || cols < 0) return fail("bad tensor header");
      std::string values;
      if (!std::getline(in, values)) return fail("missing values for " + name);
      Matrix m(rows, cols);
      const char* at = values.data();
      const char* end = values.data() + values.size();
      for (Index k = 0; k < m.size(); ++k) {
        while (at < end && *at == ' ') ++at;
        auto [next, ec] = std::from_chars(at, end, m.data()[k]);
        if (ec != std::errc()) return fail("bad value in " + name);
        at = next;
      }
      cp.params.add(name, std::move(m), trainable != 0);
    } else if (!line.empty()) {
      return fail("unexpected line '" + line.substr(0, 32) + "'");
    }
  }
  if (!ended) return fail("missing end marker");
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

std::string checkpoint_hash(const Checkpoint& checkpoint) { return fnv1a_hex(serialize_checkpoint(checkpoint)); }

}  // namespace smoothrl::ad
