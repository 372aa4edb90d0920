#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "medgan/common.hpp"
#include "medgan/tensor.hpp"

namespace medgan {

template <typename S>
struct ParamEntry {
  std::string name;
  Tensor<S> value;
  bool trainable = true;
};

// Ordered, named collection of tensors. The order is fixed by the network
// spec that produced the store and is the canonical order for initialization
// draws, optimizer state, and checkpoint serialization.
template <typename S>
class ParamStore {
 public:
  int add(std::string name, Tensor<S> value, bool trainable = true) {
    if (index_.count(name)) {
      throw ShapeError("ParamStore: duplicate entry '" + name + "'");
    }
    const int i = int(entries_.size());
    index_.emplace(name, i);
    entries_.push_back(ParamEntry<S>{std::move(name), std::move(value), trainable});
    return i;
  }

  int size() const { return int(entries_.size()); }
  ParamEntry<S>& entry(int i) { return entries_[i]; }
  const ParamEntry<S>& entry(int i) const { return entries_[i]; }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  Tensor<S>& operator[](const std::string& name) {
    return entries_[find(name)].value;
  }
  const Tensor<S>& operator[](const std::string& name) const {
    return entries_[find(name)].value;
  }

  std::int64_t param_count(bool trainable_only = true) const {
    std::int64_t total = 0;
    for (const auto& e : entries_) {
      if (!trainable_only || e.trainable) total += e.value.size();
    }
    return total;
  }

  // Same names/shapes/flags, zero values. Used for gradient accumulation.
  ParamStore<S> zeros_like() const {
    ParamStore<S> out;
    for (const auto& e : entries_) {
      out.add(e.name, Tensor<S>(e.value.shape()), e.trainable);
    }
    return out;
  }

  template <typename Other>
  ParamStore<Other> cast() const {
    ParamStore<Other> out;
    for (const auto& e : entries_) {
      out.add(e.name, e.value.template cast<Other>(), e.trainable);
    }
    return out;
  }

  void accumulate(const ParamStore<S>& other) {
    if (other.size() != size()) {
      throw ShapeError("ParamStore::accumulate: entry count mismatch");
    }
    for (int i = 0; i < size(); ++i) {
      entries_[i].value.array() += other.entry(i).value.array();
    }
  }

  // Hash over all raw value bytes, in canonical order.
  std::uint64_t content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& e : entries_) {
      h = fnv1a(e.value.data(), std::size_t(e.value.size()) * sizeof(S), h);
    }
    return h;
  }

 private:
  int find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw ShapeError("ParamStore: no entry named '" + name + "'");
    }
    return it->second;
  }

  std::vector<ParamEntry<S>> entries_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace medgan
