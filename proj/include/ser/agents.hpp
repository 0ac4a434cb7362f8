#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ser/adam.hpp"
#include "ser/mlp.hpp"
#include "ser/qfunction.hpp"
#include "ser/random.hpp"
#include "ser/transition.hpp"

namespace ser {

// Linear interpolation from start to end over the first decay_steps steps,
// constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  long long decay_steps = 0;

  EpsilonSchedule() = default;
  EpsilonSchedule(double start, double end, long long decay_steps)
      : start(start), end(end), decay_steps(decay_steps) {
    if (!(0.0 <= end && end <= start && start <= 1.0))
      throw std::invalid_argument("epsilon schedule needs 0 <= end <= start <= 1");
    if (decay_steps < 0) throw std::invalid_argument("decay_steps must be >= 0");
  }

  double value(long long step) const {
    if (step >= decay_steps || decay_steps == 0) return end;
    return start + (end - start) * (static_cast<double>(step) / decay_steps);
  }
};

// Lowest-index argmax.
inline int greedy_action(std::span<const double> q_values) {
  if (q_values.empty()) throw std::invalid_argument("empty action-value vector");
  int best = 0;
  for (std::size_t a = 1; a < q_values.size(); ++a)
    if (q_values[a] > q_values[best]) best = static_cast<int>(a);
  return best;
}

// With probability epsilon a uniform action, otherwise the greedy one.
// Consumes one engine value, plus one more when exploring.
inline int epsilon_greedy_action(std::span<const double> q_values, double epsilon,
                                 Rng& rng) {
  if (q_values.empty()) throw std::invalid_argument("empty action-value vector");
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("epsilon must lie in [0,1]");
  if (rand_unit(rng) < epsilon)
    return static_cast<int>(rand_index(rng, q_values.size()));
  return greedy_action(q_values);
}

struct DqnConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  double discount = 0.99;
  int warmup = 500;          // minimum stored transitions before training
  int train_frequency = 1;   // train every n-th step
  int sync_period = 500;     // gradient steps between target refreshes
  int hidden1 = 64;
  int hidden2 = 64;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  EpsilonSchedule exploration;

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (warmup < 1) throw std::invalid_argument("warmup must be >= 1");
    if (train_frequency < 1) throw std::invalid_argument("train_frequency must be >= 1");
    if (sync_period < 1) throw std::invalid_argument("sync_period must be >= 1");
    if (hidden1 < 1 || hidden2 < 1)
      throw std::invalid_argument("hidden sizes must be >= 1");
    if (discount < 0.0 || discount > 1.0)
      throw std::invalid_argument("discount must lie in [0,1]");
  }
};

// Q-network plus time-delayed target copy, Adam, and an exploration schedule.
// One-hot state inputs; single owner per trial.
class DqnAgent {
 public:
  DqnAgent(int num_states, int num_actions, const DqnConfig& config, Rng& init_rng)
      : config_(checked(config)),
        online_(Mlp::random_init(num_states, config.hidden1, config.hidden2,
                                 num_actions, init_rng)),
        target_(online_),
        adam_(online_.num_params(),
              AdamConfig{config.learning_rate, config.adam_beta1, config.adam_beta2,
                         config.adam_epsilon}) {}

  int act(int state, long long env_step, Rng& rng) {
    return epsilon_greedy_action(online_.forward_state(state),
                                 config_.exploration.value(env_step), rng);
  }

  int eval_action(int state, Rng&) { return greedy_action(online_.forward_state(state)); }

  // No-op until the memory holds warmup transitions and this is a
  // train_frequency-th call; otherwise one minibatch Adam update. The target
  // network becomes an exact copy after every sync_period gradient steps.
  template <class Memory>
  std::optional<double> train_step(Memory& memory, Rng& rng) {
    ++calls_;
    if (memory.size() < static_cast<std::size_t>(config_.warmup) ||
        calls_ % config_.train_frequency != 0)
      return std::nullopt;
    batch_.clear();
    for (int i = 0; i < config_.batch_size; ++i) batch_.push_back(memory.sample(rng));
    const double loss =
        mlp_td_gradient(online_, target_, batch_, config_.discount, grad_);
    adam_step(adam_, online_.params(), grad_);
    if (++gradient_steps_ % config_.sync_period == 0) target_.copy_params_from(online_);
    return loss;
  }

  const DqnConfig& config() const { return config_; }
  Mlp& online() { return online_; }
  Mlp& target() { return target_; }
  long long gradient_steps() const { return gradient_steps_; }

 private:
  static const DqnConfig& checked(const DqnConfig& config) {
    config.validate();
    return config;
  }

  DqnConfig config_;
  Mlp online_;
  Mlp target_;
  AdamState adam_;
  long long calls_ = 0;
  long long gradient_steps_ = 0;
  std::vector<Transition> batch_;
  std::vector<double> grad_;
};

struct TabularConfig {
  double learning_rate = 0.1;
  int batch_size = 1;
  double discount = 0.99;
  int warmup = 1;
  EpsilonSchedule exploration;

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (warmup < 1) throw std::invalid_argument("warmup must be >= 1");
  }
};

// Q-learning on a lookup table, replaying sampled transitions.
class TabularAgent {
 public:
  TabularAgent(int num_states, int num_actions, const TabularConfig& config)
      : config_(config),
        table_(num_states, num_actions, config.learning_rate, config.discount) {
    config.validate();
  }

  int act(int state, long long env_step, Rng& rng) {
    return epsilon_greedy_action(q_row(state), config_.exploration.value(env_step), rng);
  }

  int eval_action(int state, Rng&) { return greedy_action(q_row(state)); }

  template <class Memory>
  std::optional<double> train_step(Memory& memory, Rng& rng) {
    ++calls_;
    if (memory.size() < static_cast<std::size_t>(config_.warmup)) return std::nullopt;
    double loss = 0.0;
    for (int i = 0; i < config_.batch_size; ++i) {
      const Transition t = memory.sample(rng);
      const double delta = td_error(t, table_, table_, table_.discount());
      loss += 0.5 * delta * delta;
      q_learning_step(table_, t);
    }
    return loss / config_.batch_size;
  }

  const TabularConfig& config() const { return config_; }
  QTable& table() { return table_; }

 private:
  std::span<const double> q_row(int state) const {
    return {&table_.values()[static_cast<std::size_t>(state) * table_.num_actions()],
            static_cast<std::size_t>(table_.num_actions())};
  }

  TabularConfig config_;
  QTable table_;
  long long calls_ = 0;
};

// Uniform-random behavior at every step; the do-nothing baseline the other
// agents are scored against.
class RandomAgent {
 public:
  explicit RandomAgent(int num_actions) : num_actions_(num_actions) {
    if (num_actions < 1) throw std::invalid_argument("need at least one action");
  }

  int act(int, long long, Rng& rng) {
    return static_cast<int>(rand_index(rng, num_actions_));
  }
  int eval_action(int, Rng& rng) {
    return static_cast<int>(rand_index(rng, num_actions_));
  }
  template <class Memory>
  std::optional<double> train_step(Memory&, Rng&) {
    return std::nullopt;
  }

 private:
  int num_actions_;
};

}  // namespace ser
