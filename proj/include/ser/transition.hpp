#pragma once

#include <cstddef>
#include <cstdint>

#include "ser/random.hpp"

namespace ser {

// One environment interaction. `terminal` is true only when next_state ended
// the episode through the environment's own dynamics; step-limit truncation
// stores terminal = false so the TD target keeps bootstrapping.
struct Transition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

// Canonical 8-byte encoding of a (state, action) pair. The packing is
// injective over all int-valued pairs, so keys compare equal iff the pairs do.
// Rewards are deliberately not part of the key.
class TransitionKey {
 public:
  TransitionKey(int state, int action)
      : packed_((static_cast<std::uint64_t>(static_cast<std::uint32_t>(state)) << 32) |
                static_cast<std::uint64_t>(static_cast<std::uint32_t>(action))) {}
  explicit TransitionKey(const Transition& t) : TransitionKey(t.state, t.action) {}

  std::uint64_t packed() const { return packed_; }
  int state() const { return static_cast<std::int32_t>(packed_ >> 32); }
  int action() const { return static_cast<std::int32_t>(packed_ & 0xffffffffull); }

  bool operator==(const TransitionKey&) const = default;

 private:
  std::uint64_t packed_;
};

struct TransitionKeyHash {
  std::size_t operator()(const TransitionKey& k) const {
    return static_cast<std::size_t>(splitmix64(k.packed()));
  }
};

}  // namespace ser
