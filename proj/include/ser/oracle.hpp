#pragma once

// Brute-force ground truth for sampling-bias questions on enumerable MDPs:
// long-run (s,a) occupancy under a fixed behavior policy, the ideal uniform
// sampling law, and exact expected updates for both tabular and network
// learners under uniform or stratified replay sampling.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "ser/mlp.hpp"
#include "ser/qfunction.hpp"
#include "ser/random.hpp"
#include "ser/tabular_mdp.hpp"
#include "ser/transition.hpp"

namespace ser {

// Per-state action distribution the data-collecting agent follows.
class BehaviorPolicy {
 public:
  BehaviorPolicy(int num_states, int num_actions, std::vector<double> probs)
      : num_states_(num_states), num_actions_(num_actions), probs_(std::move(probs)) {
    if (num_states < 1 || num_actions < 1)
      throw std::invalid_argument("policy needs at least one state and action");
    if (probs_.size() != static_cast<std::size_t>(num_states) * num_actions)
      throw std::invalid_argument("policy matrix size mismatch");
    for (int s = 0; s < num_states; ++s) {
      double total = 0.0;
      for (int a = 0; a < num_actions; ++a) {
        const double p = probs_[static_cast<std::size_t>(s) * num_actions + a];
        if (p < 0.0) throw std::invalid_argument("negative action probability");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("policy row must sum to 1");
    }
  }

  static BehaviorPolicy uniform(int num_states, int num_actions) {
    std::vector<double> probs(static_cast<std::size_t>(num_states) * num_actions,
                              1.0 / num_actions);
    return BehaviorPolicy(num_states, num_actions, std::move(probs));
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double action_prob(int state, int action) const {
    return probs_.at(static_cast<std::size_t>(state) * num_actions_ + action);
  }

  // One engine value per draw, like the other samplers.
  int sample(int state, Rng& rng) const {
    const double u = rand_unit(rng);
    double cumulative = 0.0;
    int chosen = -1;
    for (int a = 0; a < num_actions_; ++a) {
      const double p = action_prob(state, a);
      if (p > 0.0) chosen = a;
      cumulative += p;
      if (u < cumulative) return a;
    }
    return chosen;
  }

 private:
  int num_states_;
  int num_actions_;
  std::vector<double> probs_;
};

// Long-run fraction of time spent in each (s,a) pair.
class OccupancyDistribution {
 public:
  OccupancyDistribution(int num_states, int num_actions)
      : num_states_(num_states),
        num_actions_(num_actions),
        prob_(static_cast<std::size_t>(num_states) * num_actions, 0.0) {}

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double pr(int state, int action) const {
    return prob_.at(static_cast<std::size_t>(state) * num_actions_ + action);
  }
  double& pr(int state, int action) {
    return prob_.at(static_cast<std::size_t>(state) * num_actions_ + action);
  }
  const std::vector<double>& values() const { return prob_; }

  // Pairs with strictly positive long-run mass.
  int support_size() const {
    int count = 0;
    for (double p : prob_)
      if (p > 0.0) ++count;
    return count;
  }

 private:
  int num_states_;
  int num_actions_;
  std::vector<double> prob_;
};

// Long-run (s,a) occupancy of the behavior policy, with episodes restarted
// from the initial distribution the moment a terminal state is entered (so
// terminal states themselves carry no occupancy). Plain power iteration from
// a uniform start over non-terminal states, to L1 residual 1e-10; throws if
// the chain fails to settle within the iteration cap, which signals a
// periodic or degenerate construction.
inline OccupancyDistribution stationary_distribution(const TabularMdp& mdp,
                                                     const BehaviorPolicy& mu,
                                                     double residual_tol = 1e-10,
                                                     long long max_iterations = 1000000) {
  const int S = mdp.num_states(), A = mdp.num_actions();
  if (mu.num_states() != S || mu.num_actions() != A)
    throw std::invalid_argument("policy shape does not match the MDP");
  for (int s = 0; s < S; ++s)
    if (mdp.is_terminal_state(s) && mdp.initial_distribution()[s] > 0.0)
      throw std::invalid_argument("initial distribution puts mass on a terminal state");

  // Sparse restart chain: per-state direct edges to non-terminal successors,
  // plus one scalar of restart mass that funnels through the initial
  // distribution.
  struct Edge {
    int to;
    double prob;
  };
  std::vector<std::vector<Edge>> direct(S);
  std::vector<double> restart(S, 0.0);
  int live_states = 0;
  for (int s = 0; s < S; ++s) {
    if (mdp.is_terminal_state(s)) continue;
    ++live_states;
    for (int a = 0; a < A; ++a) {
      const double pa = mu.action_prob(s, a);
      if (pa == 0.0) continue;
      for (const OutcomeEntry& e : mdp.entries(s, a)) {
        if (e.probability == 0.0) continue;
        if (e.terminal)
          restart[s] += pa * e.probability;
        else
          direct[s].push_back({e.next_state, pa * e.probability});
      }
    }
  }
  if (live_states == 0) throw std::invalid_argument("every state is terminal");

  std::vector<double> pi(S, 0.0), next(S, 0.0);
  for (int s = 0; s < S; ++s)
    if (!mdp.is_terminal_state(s)) pi[s] = 1.0 / live_states;

  for (long long iter = 0; iter < max_iterations; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    double restart_mass = 0.0;
    for (int s = 0; s < S; ++s) {
      if (pi[s] == 0.0) continue;
      for (const Edge& e : direct[s]) next[e.to] += pi[s] * e.prob;
      restart_mass += pi[s] * restart[s];
    }
    if (restart_mass > 0.0)
      for (int s = 0; s < S; ++s) next[s] += restart_mass * mdp.initial_distribution()[s];

    double residual = 0.0;
    for (int s = 0; s < S; ++s) residual += std::abs(next[s] - pi[s]);
    pi.swap(next);
    if (residual <= residual_tol) {
      OccupancyDistribution occupancy(S, A);
      for (int s = 0; s < S; ++s) {
        if (pi[s] == 0.0) continue;
        for (int a = 0; a < A; ++a) occupancy.pr(s, a) = pi[s] * mu.action_prob(s, a);
      }
      return occupancy;
    }
  }
  throw std::runtime_error("stationary distribution did not converge");
}

struct IdealEntry {
  int state = 0;
  int action = 0;
  int next_state = 0;
  double probability = 0.0;
};

// The multiplicity-free sampling law: every (s,a) pair carries equal mass
// 1/(|S|*|A|), split across successors by the model probabilities. Ordered by
// (s, a, s').
inline std::vector<IdealEntry> ideal_distribution(const TabularMdp& mdp) {
  const double pair_mass =
      1.0 / (static_cast<double>(mdp.num_states()) * mdp.num_actions());
  std::vector<IdealEntry> out;
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a)
      for (const OutcomeEntry& e : mdp.entries(s, a))
        out.push_back({s, a, e.next_state, pair_mass * e.probability});
  return out;
}

// Successor-averaged temporal-difference error sum_{s'} Pr(s'|s,a) * delta.
template <class QOnline, class QTarget>
double expected_delta(const TabularMdp& mdp, QOnline& q_online, QTarget& q_target,
                      double gamma, int state, int action) {
  double acc = 0.0;
  for (const OutcomeEntry& e : mdp.entries(state, action))
    acc += e.probability *
           td_error({state, action, e.reward, e.next_state, e.terminal}, q_online,
                    q_target, gamma);
  return acc;
}

// Exact expectation of one tabular update at (s,a), bootstrapping from the
// table itself: alpha * sum_{s'} Pr(s'|s,a) * delta(s,a,s').
inline double expected_q_update(const TabularMdp& mdp, const QTable& table, int state,
                                int action) {
  return table.learning_rate() *
         expected_delta(mdp, table, table, table.discount(), state, action);
}

enum class SamplingMode { uniform, stratified };

// Per-pair weights the replay sampler induces: long-run occupancy for uniform
// draws, a flat 1/K over the K occupied pairs for stratified draws.
inline std::vector<double> sampling_weights(const OccupancyDistribution& occupancy,
                                            SamplingMode mode) {
  std::vector<double> w(occupancy.values());
  if (mode == SamplingMode::stratified) {
    const int k = occupancy.support_size();
    for (double& v : w) v = v > 0.0 ? 1.0 / k : 0.0;
  }
  return w;
}

// Expected network update alpha * sum_{(s,a)} w(s,a) sum_{s'} Pr(s'|s,a) *
// delta * dQ(s,a)/dtheta, with w from sampling_weights. The returned vector is
// an update (ascent direction on delta), shaped like net.params().
inline std::vector<double> expected_dqn_update(const TabularMdp& mdp,
                                               const BehaviorPolicy& mu, Mlp& net,
                                               Mlp& target_net, double gamma,
                                               double alpha, SamplingMode mode) {
  const OccupancyDistribution occupancy = stationary_distribution(mdp, mu);
  const std::vector<double> w = sampling_weights(occupancy, mode);

  std::vector<double> update(net.num_params(), 0.0);
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const double weight = w[static_cast<std::size_t>(s) * mdp.num_actions() + a];
      if (weight == 0.0) continue;
      const double d = expected_delta(mdp, net, target_net, gamma, s, a);
      net.forward_state(s);
      net.backprop_last_forward(a, alpha * weight * d, update);
    }
  return update;
}

// Tabular parameterization of the same quantity: the gradient of Q(s,a) with
// respect to its own table entry is the indicator, so the update at (s,a) is
// alpha * w(s,a) * sum_{s'} Pr(s'|s,a) * delta.
inline std::vector<double> expected_dqn_update(const TabularMdp& mdp,
                                               const BehaviorPolicy& mu,
                                               const QTable& online, const QTable& target,
                                               double gamma, double alpha,
                                               SamplingMode mode) {
  const OccupancyDistribution occupancy = stationary_distribution(mdp, mu);
  const std::vector<double> w = sampling_weights(occupancy, mode);

  std::vector<double> update(w.size(), 0.0);
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const std::size_t i = static_cast<std::size_t>(s) * mdp.num_actions() + a;
      if (w[i] == 0.0) continue;
      update[i] = alpha * w[i] * expected_delta(mdp, online, target, gamma, s, a);
    }
  return update;
}

// Frequency tables over repeated sample() draws: marginal per (s,a) key and
// conditional successor frequencies within each key.
struct SamplingFrequencies {
  std::map<std::uint64_t, double> by_key;
  std::map<std::uint64_t, std::map<int, double>> next_within_key;
};

template <class Memory>
SamplingFrequencies empirical_sampling_distribution(const Memory& memory, Rng& rng,
                                                    std::size_t draws) {
  if (draws < 1) throw std::invalid_argument("draw count must be >= 1");
  std::map<std::uint64_t, std::size_t> key_counts;
  std::map<std::uint64_t, std::map<int, std::size_t>> next_counts;
  for (std::size_t i = 0; i < draws; ++i) {
    const Transition t = memory.sample(rng);
    const std::uint64_t key = TransitionKey(t).packed();
    ++key_counts[key];
    ++next_counts[key][t.next_state];
  }

  SamplingFrequencies freq;
  for (const auto& [key, count] : key_counts) {
    freq.by_key[key] = static_cast<double>(count) / draws;
    for (const auto& [next, n] : next_counts[key])
      freq.next_within_key[key][next] = static_cast<double>(n) / count;
  }
  return freq;
}

}  // namespace ser
