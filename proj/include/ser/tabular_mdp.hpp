#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ser/random.hpp"

namespace ser {

// One possible outcome of taking an action: successor state, its probability,
// the reward R(s,a,s'), and whether the successor ends the episode.
struct OutcomeEntry {
  double probability = 0.0;
  int next_state = 0;
  double reward = 0.0;
  bool terminal = false;
};

// Explicit finite MDP. The full model is exposed so oracles can enumerate it;
// episodes run through reset/step below. Immutable after construction.
//
// Entries for each (s, a) are normalized at construction: sorted by successor,
// duplicates merged, probabilities validated to sum to 1 within 1e-12. The
// terminal flag must be a property of the successor state (all entries into a
// state agree on it); terminal states are absorbing.
class TabularMdp {
 public:
  TabularMdp(int num_states, int num_actions,
             std::vector<std::vector<OutcomeEntry>> model,
             std::vector<double> initial_distribution, double gamma_default)
      : num_states_(num_states),
        num_actions_(num_actions),
        model_(std::move(model)),
        initial_(std::move(initial_distribution)),
        gamma_default_(gamma_default) {
    if (num_states_ < 1 || num_actions_ < 1)
      throw std::invalid_argument("MDP needs at least one state and one action");
    if (model_.size() != static_cast<std::size_t>(num_states_) * num_actions_)
      throw std::invalid_argument("model must have one entry list per (s,a)");
    if (initial_.size() != static_cast<std::size_t>(num_states_))
      throw std::invalid_argument("initial distribution size mismatch");
    if (gamma_default_ < 0.0 || gamma_default_ > 1.0)
      throw std::invalid_argument("discount must lie in [0,1]");

    for (auto& entries : model_) {
      if (entries.empty())
        throw std::invalid_argument("every (s,a) needs at least one outcome");
      std::sort(entries.begin(), entries.end(),
                [](const OutcomeEntry& a, const OutcomeEntry& b) {
                  return a.next_state < b.next_state;
                });
      std::vector<OutcomeEntry> merged;
      for (const OutcomeEntry& e : entries) {
        if (e.probability < 0.0)
          throw std::invalid_argument("negative transition probability");
        if (e.next_state < 0 || e.next_state >= num_states_)
          throw std::invalid_argument("successor state out of range");
        if (!merged.empty() && merged.back().next_state == e.next_state) {
          if (merged.back().reward != e.reward || merged.back().terminal != e.terminal)
            throw std::invalid_argument("conflicting duplicate outcome entries");
          merged.back().probability += e.probability;
        } else {
          merged.push_back(e);
        }
      }
      double total = 0.0;
      for (const OutcomeEntry& e : merged) total += e.probability;
      if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("outcome probabilities must sum to 1");
      entries = std::move(merged);
    }

    double init_total = 0.0;
    for (double p : initial_) {
      if (p < 0.0) throw std::invalid_argument("negative initial probability");
      init_total += p;
    }
    if (std::abs(init_total - 1.0) > 1e-12)
      throw std::invalid_argument("initial distribution must sum to 1");

    terminal_state_.assign(num_states_, false);
    std::vector<bool> seen(num_states_, false);
    for (const auto& entries : model_) {
      for (const OutcomeEntry& e : entries) {
        if (seen[e.next_state] && terminal_state_[e.next_state] != e.terminal)
          throw std::invalid_argument("terminal flag inconsistent across entries");
        seen[e.next_state] = true;
        terminal_state_[e.next_state] = e.terminal;
      }
    }
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double gamma_default() const { return gamma_default_; }

  std::span<const OutcomeEntry> entries(int state, int action) const {
    return model_[index(state, action)];
  }
  const std::vector<double>& initial_distribution() const { return initial_; }
  bool is_terminal_state(int state) const { return terminal_state_.at(state); }

  // Pr(s' | s, a); zero when s' is not a listed successor.
  double transition_prob(int state, int action, int next_state) const {
    for (const OutcomeEntry& e : entries(state, action))
      if (e.next_state == next_state) return e.probability;
    return 0.0;
  }

 private:
  std::size_t index(int state, int action) const {
    if (state < 0 || state >= num_states_) throw std::out_of_range("state out of range");
    if (action < 0 || action >= num_actions_) throw std::out_of_range("action out of range");
    return static_cast<std::size_t>(state) * num_actions_ + action;
  }

  int num_states_;
  int num_actions_;
  std::vector<std::vector<OutcomeEntry>> model_;
  std::vector<double> initial_;
  double gamma_default_;
  std::vector<bool> terminal_state_;
};

// Mutable per-episode state. An episode must be reset before stepping and
// cannot be stepped past its end.
struct EpisodeContext {
  explicit EpisodeContext(int step_limit) : step_limit(step_limit) {
    if (step_limit < 1) throw std::invalid_argument("step limit must be >= 1");
  }

  int current_state = -1;
  int steps_taken = 0;
  int step_limit;
  bool finished = true;  // true until the first reset
};

struct StepResult {
  int next_state = 0;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;
};

// Draws the start state from the initial distribution. Consumes one engine
// value regardless of the distribution's support.
inline int reset(const TabularMdp& mdp, EpisodeContext& ctx, Rng& rng) {
  const double u = rand_unit(rng);
  double cumulative = 0.0;
  int state = -1;
  for (int s = 0; s < mdp.num_states(); ++s) {
    const double p = mdp.initial_distribution()[s];
    if (p > 0.0) state = s;  // rounding fallback: last positive-mass state
    cumulative += p;
    if (u < cumulative) {
      state = s;
      break;
    }
  }
  ctx.current_state = state;
  ctx.steps_taken = 0;
  ctx.finished = false;
  return state;
}

// Draws the successor from the model's outcome list. Truncation fires when the
// step limit is reached without a terminal transition; truncated episodes are
// finished but their transitions keep terminal = false.
inline StepResult step(const TabularMdp& mdp, EpisodeContext& ctx, Rng& rng, int action) {
  if (ctx.finished)
    throw std::logic_error("step called on a finished episode");
  const auto outcomes = mdp.entries(ctx.current_state, action);

  const double u = rand_unit(rng);
  double cumulative = 0.0;
  const OutcomeEntry* chosen = nullptr;
  for (const OutcomeEntry& e : outcomes) {
    if (e.probability > 0.0) chosen = &e;  // rounding fallback: last live outcome
    cumulative += e.probability;
    if (u < cumulative) {
      chosen = &e;
      break;
    }
  }

  ++ctx.steps_taken;
  StepResult result;
  result.next_state = chosen->next_state;
  result.reward = chosen->reward;
  result.terminal = chosen->terminal;
  result.truncated = ctx.steps_taken >= ctx.step_limit && !result.terminal;
  ctx.current_state = result.next_state;
  ctx.finished = result.terminal || result.truncated;
  return result;
}

// One-hot encoding of a discrete state, used as network input.
inline std::vector<double> one_hot_encode(int state, int num_states) {
  if (state < 0 || state >= num_states)
    throw std::out_of_range("state out of range for one-hot encoding");
  std::vector<double> v(num_states, 0.0);
  v[state] = 1.0;
  return v;
}

// Plain-text model listing, one row per outcome entry, ordered by (s, a, s').
inline void dump_model(const TabularMdp& mdp, std::ostream& out) {
  char line[128];
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int a = 0; a < mdp.num_actions(); ++a) {
      for (const OutcomeEntry& e : mdp.entries(s, a)) {
        std::snprintf(line, sizeof(line), "%d %d %.17g %d %.17g %d\n", s, a,
                      e.probability, e.next_state, e.reward, e.terminal ? 1 : 0);
        out << line;
      }
    }
  }
}

}  // namespace ser
