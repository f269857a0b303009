#pragma once

#include "smoothrl/autodiff/tensor.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smoothrl::ad {

/// Ordered collection of named matrices: trainable parameters plus
/// non-trainable buffers (running statistics, power-iteration vectors).
/// Values are shared with bound tensors and copied on write, so binding a
/// store to a tape is cheap.
class ParameterStore {
 public:
  std::size_t add(std::string name, Matrix value, bool trainable = true);

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].name; }
  bool trainable(std::size_t i) const { return entries_[i].trainable; }
  const Matrix& value(std::size_t i) const { return *entries_[i].value; }
  Matrix& mutable_value(std::size_t i);
  void set(std::size_t i, Matrix value);

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws InputError when absent.
  std::size_t index(std::string_view name) const;

  /// Leaf tensors in store order: trainable entries become tape variables,
  /// buffers become constants.
  std::vector<Tensor> bind(Tape& tape) const;
  /// Every entry as a constant tensor.
  std::vector<Tensor> constants() const;

  std::vector<std::size_t> trainable_indices() const;
  std::size_t trainable_count() const;

  bool operator==(const ParameterStore& other) const;

 private:
  struct Entry {
    std::string name;
    std::shared_ptr<Matrix> value;
    bool trainable = true;
  };
  std::vector<Entry> entries_;
};

/// Parameter checkpoint: metadata strings plus the store contents.
///
/// On disk (format_version 1, UTF-8 text, one record per line):
///
///     smoothrl-checkpoint 1
///     meta <key> <value to end of line>
///     tensor <name> <rows> <cols> <trainable:0|1>
///     <rows*cols row-major float64 values, shortest round-trip decimal>
///     end
///
/// Values are written with std::to_chars so a save/load cycle is bit-exact.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  ParameterStore params;
};

inline constexpr int kCheckpointFormatVersion = 1;

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text);
/// Writes through a temporary file and an atomic rename.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over the serialized form; equal checkpoints hash equal.
std::string checkpoint_hash(const Checkpoint& checkpoint);

}  // namespace smoothrl::ad
