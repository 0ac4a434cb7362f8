#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "ser/random.hpp"
#include "ser/transition.hpp"

namespace ser {

// Occupancy and redundancy counters for a replay memory.
struct ReplayStats {
  std::size_t size = 0;
  std::size_t capacity = 0;
  std::size_t num_keys = 0;
  std::size_t max_multiplicity = 0;
  double redundancy_fraction = 0.0;

  bool operator==(const ReplayStats&) const = default;
};

// Fixed-capacity ring buffer with uniform sampling; the baseline memory.
// Overwrites strictly oldest-first once full.
class UniformReplayMemory {
 public:
  explicit UniformReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
  }

  void insert(const Transition& t) {
    if (storage_.size() < capacity_) {
      storage_.push_back(t);
    } else {
      storage_[cursor_] = t;
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  // Each occupied slot is returned with probability 1/size. Consumes exactly
  // one engine value.
  Transition sample(Rng& rng) const {
    if (storage_.empty()) throw std::logic_error("sample from empty replay memory");
    return storage_[rand_index(rng, storage_.size())];
  }

  // m independent draws with replacement.
  std::vector<Transition> sample_batch(Rng& rng, std::size_t m) const {
    std::vector<Transition> batch;
    if (m == 0) return batch;
    if (storage_.empty()) throw std::logic_error("sample from empty replay memory");
    batch.reserve(m);
    for (std::size_t i = 0; i < m; ++i) batch.push_back(sample(rng));
    return batch;
  }

  ReplayStats stats() const {
    ReplayStats s;
    s.size = storage_.size();
    s.capacity = capacity_;
    std::unordered_map<TransitionKey, std::size_t, TransitionKeyHash> counts;
    for (const Transition& t : storage_) ++counts[TransitionKey(t)];
    s.num_keys = counts.size();
    for (const auto& [key, count] : counts)
      s.max_multiplicity = std::max(s.max_multiplicity, count);
    if (s.size > 0)
      s.redundancy_fraction =
          static_cast<double>(s.size - s.num_keys) / static_cast<double>(s.size);
    return s;
  }

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }
  const Transition& transition_at(std::size_t slot) const { return storage_.at(slot); }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> storage_;
};

// Replay memory with two-step stratified sampling: a uniform draw over the
// distinct (state, action) keys currently stored, then a uniform draw among
// that key's slots. Both insert and sample are O(1); no operation walks the
// slot array or the key set.
//
// Layout: slot array D, a hash index from key to an indexable FIFO of slot
// indices, and a dense key registry with a reverse position map so a uniform
// key draw is a single vector lookup. Deletion swap-removes from the registry.
class StratifiedReplayMemory {
 public:
  explicit StratifiedReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
  }

  // Once full, first evicts the globally oldest transition (the one at the
  // write cursor): its index is popped from the front of its key's queue and
  // the key is dropped when the queue empties. Then the new transition is
  // written at the cursor and its index pushed onto the back of its queue.
  void insert(const Transition& t) {
    if (storage_.size() == capacity_) {
      evict_slot(cursor_);
      storage_[cursor_] = t;
    } else {
      storage_.push_back(t);
    }
    const TransitionKey key(t);
    auto [it, inserted] = index_.try_emplace(key);
    if (inserted) {
      it->second.registry_pos = registry_.size();
      registry_.push_back(key);
    }
    it->second.slots.push_back(static_cast<std::uint32_t>(cursor_));
    cursor_ = (cursor_ + 1) % capacity_;
  }

  // Two uniform draws, in order: a key from the registry, then a slot from
  // that key's queue. Consumes exactly two engine values.
  Transition sample(Rng& rng) const {
    if (storage_.empty()) throw std::logic_error("sample from empty replay memory");
    const TransitionKey key = registry_[rand_index(rng, registry_.size())];
    const auto& slots = index_.find(key)->second.slots;
    return storage_[slots[rand_index(rng, slots.size())]];
  }

  // m independent draws with replacement, each following the two-step law.
  std::vector<Transition> sample_batch(Rng& rng, std::size_t m) const {
    std::vector<Transition> batch;
    if (m == 0) return batch;
    if (storage_.empty()) throw std::logic_error("sample from empty replay memory");
    batch.reserve(m);
    for (std::size_t i = 0; i < m; ++i) batch.push_back(sample(rng));
    return batch;
  }

  // Analytic sampling law: occupied slot j with key k has probability
  // 1 / (num_keys * queue_length(k)). Empty memory gives an empty map.
  std::map<std::size_t, double> exact_distribution() const {
    std::map<std::size_t, double> law;
    if (registry_.empty()) return law;
    const double key_mass = 1.0 / static_cast<double>(registry_.size());
    for (const auto& [key, entry] : index_) {
      const double slot_mass = key_mass / static_cast<double>(entry.slots.size());
      for (std::uint32_t slot : entry.slots) law[slot] = slot_mass;
    }
    return law;
  }

  ReplayStats stats() const {
    ReplayStats s;
    s.size = storage_.size();
    s.capacity = capacity_;
    s.num_keys = registry_.size();
    for (const auto& [key, entry] : index_)
      s.max_multiplicity = std::max(s.max_multiplicity, entry.slots.size());
    if (s.size > 0)
      s.redundancy_fraction =
          static_cast<double>(s.size - s.num_keys) / static_cast<double>(s.size);
    return s;
  }

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }
  std::size_t num_keys() const { return registry_.size(); }
  const Transition& transition_at(std::size_t slot) const { return storage_.at(slot); }

  // Keys in registry order (the order uniform key draws index into).
  const std::vector<TransitionKey>& keys() const { return registry_; }

  // Slot indices stored for a key, oldest first.
  const std::deque<std::uint32_t>& queue_for(const TransitionKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw std::out_of_range("key not present in memory");
    return it->second.slots;
  }

  std::size_t registry_position(const TransitionKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw std::out_of_range("key not present in memory");
    return it->second.registry_pos;
  }

 private:
  struct KeyEntry {
    std::deque<std::uint32_t> slots;  // oldest first
    std::size_t registry_pos = 0;
  };

  void evict_slot(std::size_t slot) {
    const TransitionKey key(storage_[slot]);
    auto it = index_.find(key);
    // Circular overwrite order means the evicted slot is its key's oldest.
    assert(!it->second.slots.empty() && it->second.slots.front() == slot);
    it->second.slots.pop_front();
    if (it->second.slots.empty()) {
      const std::size_t pos = it->second.registry_pos;
      registry_[pos] = registry_.back();
      index_.find(registry_[pos])->second.registry_pos = pos;
      registry_.pop_back();
      index_.erase(it);
    }
  }

  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> storage_;
  std::unordered_map<TransitionKey, KeyEntry, TransitionKeyHash> index_;
  std::vector<TransitionKey> registry_;
};

}  // namespace ser
