#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <ranges>
#include <unordered_map>
#include <vector>

#include "superrag/error.hpp"

namespace superrag {

template <typename Key, typename Value>
struct CacheEntry {
  Key key;
  Value value;
  std::size_t size_units = 1;
  std::uint64_t last_access = 0;
};

/// Bounded least-recently-used map, resizable at runtime.
///
/// Capacity counts entries. Every operation takes the internal lock, and a
/// lookup refreshes recency, so readers are writers as far as locking goes.
/// `Value` may be any copyable type; sized ranges must be nonempty on insert
/// and report their length as `size_units`.
template <typename Key, typename Value, typename Hash = std::hash<Key>>
class LruCache {
public:
  using entry_type = CacheEntry<Key, Value>;

  explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

  LruCache(const LruCache& other) {
    std::scoped_lock lock(other.mu_);
    copy_from(other);
  }
  LruCache& operator=(const LruCache& other) {
    if (this != &other) {
      std::scoped_lock lock(mu_, other.mu_);
      copy_from(other);
    }
    return *this;
  }

  std::optional<Value> lookup(const Key& key) {
    std::scoped_lock lock(mu_);
    auto it = slots_.find(key);
    if (it == slots_.end()) return std::nullopt;
    touch(it->second);
    return it->second->value;
  }

  bool contains(const Key& key) const {
    std::scoped_lock lock(mu_);
    return slots_.contains(key);
  }

  /// Inserts or replaces; returns keys evicted, oldest first.
  std::vector<Key> insert(const Key& key, Value value) {
    const std::size_t units = units_of(value);
    std::scoped_lock lock(mu_);
    if (auto it = slots_.find(key); it != slots_.end()) {
      total_units_ -= it->second->size_units;
      it->second->value = std::move(value);
      it->second->size_units = units;
      total_units_ += units;
      touch(it->second);
      return {};
    }
    order_.push_front(entry_type{key, std::move(value), units, ++clock_});
    slots_.emplace(key, order_.begin());
    total_units_ += units;
    return evict_to(capacity_);
  }

  /// Sets capacity and evicts LRU-first down to it. Growth evicts nothing.
  std::vector<Key> resize(std::size_t new_capacity) {
    std::scoped_lock lock(mu_);
    capacity_ = new_capacity;
    return evict_to(capacity_);
  }

  std::size_t capacity() const {
    std::scoped_lock lock(mu_);
    return capacity_;
  }
  std::size_t size() const {
    std::scoped_lock lock(mu_);
    return slots_.size();
  }
  std::uint64_t clock() const {
    std::scoped_lock lock(mu_);
    return clock_;
  }

  /// Mean size_units over resident entries, 0 when empty.
  double mean_size_units() const {
    std::scoped_lock lock(mu_);
    if (slots_.empty()) return 0.0;
    return static_cast<double>(total_units_) / static_cast<double>(slots_.size());
  }

  /// Resident entries from most to least recently used.
  std::vector<entry_type> snapshot() const {
    std::scoped_lock lock(mu_);
    return {order_.begin(), order_.end()};
  }

private:
  using list_type = std::list<entry_type>;

  static std::size_t units_of(const Value& value) {
    if constexpr (std::ranges::sized_range<const Value>) {
      const auto n = static_cast<std::size_t>(std::ranges::size(value));
      if (n == 0) throw empty_value();
      return n;
    } else {
      return 1;
    }
  }

  void touch(typename list_type::iterator it) {
    it->last_access = ++clock_;
    order_.splice(order_.begin(), order_, it);
  }

  std::vector<Key> evict_to(std::size_t limit) {
    std::vector<Key> evicted;
    while (slots_.size() > limit) {
      auto& victim = order_.back();
      evicted.push_back(victim.key);
      total_units_ -= victim.size_units;
      slots_.erase(victim.key);
      order_.pop_back();
    }
    return evicted;
  }

  void copy_from(const LruCache& other) {
    capacity_ = other.capacity_;
    clock_ = other.clock_;
    total_units_ = other.total_units_;
    order_ = other.order_;
    slots_.clear();
    for (auto it = order_.begin(); it != order_.end(); ++it) slots_.emplace(it->key, it);
  }

  mutable std::mutex mu_;
  std::size_t capacity_ = 0;
  std::uint64_t clock_ = 0;
  std::size_t total_units_ = 0;
  list_type order_;
  std::unordered_map<Key, typename list_type::iterator, Hash> slots_;
};

}  // namespace superrag
