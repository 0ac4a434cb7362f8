#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "ser/transition.hpp"

namespace ser {

// Lookup-table action values with the step size and discount that drive
// q_learning_step.
class QTable {
 public:
  QTable(int num_states, int num_actions, double learning_rate, double discount)
      : num_states_(num_states),
        num_actions_(num_actions),
        learning_rate_(learning_rate),
        discount_(discount),
        values_(static_cast<std::size_t>(num_states) * num_actions, 0.0) {
    if (num_states < 1 || num_actions < 1)
      throw std::invalid_argument("table needs at least one state and action");
    if (learning_rate < 0.0 || learning_rate > 1.0)
      throw std::invalid_argument("learning rate must lie in [0,1]");
    if (discount < 0.0 || discount > 1.0)
      throw std::invalid_argument("discount must lie in [0,1]");
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double alpha) {
    if (alpha < 0.0 || alpha > 1.0)
      throw std::invalid_argument("learning rate must lie in [0,1]");
    learning_rate_ = alpha;
  }
  double discount() const { return discount_; }

  double value(int state, int action) const { return values_[index(state, action)]; }
  double& value(int state, int action) { return values_[index(state, action)]; }

  double max_value(int state) const {
    double best = value(state, 0);
    for (int a = 1; a < num_actions_; ++a) best = std::max(best, value(state, a));
    return best;
  }

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t index(int state, int action) const {
    if (state < 0 || state >= num_states_) throw std::out_of_range("state out of range");
    if (action < 0 || action >= num_actions_)
      throw std::out_of_range("action out of range");
    return static_cast<std::size_t>(state) * num_actions_ + action;
  }

  int num_states_;
  int num_actions_;
  double learning_rate_;
  double discount_;
  std::vector<double> values_;
};

// Temporal-difference error r + gamma * max_a' Q_target(s',a') - Q_online(s,a).
// The bootstrap term is dropped on terminal transitions. Works for any pair of
// action-value representations exposing value() and max_value().
template <class QOnline, class QTarget>
double td_error(const Transition& t, QOnline& q_online, QTarget& q_target, double gamma) {
  const double bootstrap = t.terminal ? 0.0 : q_target.max_value(t.next_state);
  return t.reward + gamma * bootstrap - q_online.value(t.state, t.action);
}

// One tabular update Q(s,a) += alpha * delta, bootstrapping from the table
// itself.
inline void q_learning_step(QTable& table, const Transition& t) {
  const double delta = td_error(t, table, table, table.discount());
  table.value(t.state, t.action) += table.learning_rate() * delta;
}

}  // namespace ser
