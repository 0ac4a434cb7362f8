#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ser/random.hpp"
#include "ser/transition.hpp"

namespace ser {

// Fully connected [in, h1, h2, out] network with tanh hidden layers and a
// linear output head, on one flat parameter vector (layout: W1, b1, W2, b2,
// W3, b3, weight matrices row-major by output unit).
//
// forward_state is the one-hot fast path: for a one-hot input only one column
// of W1 contributes, and the accumulation order makes the result identical to
// the generic forward on the expanded vector. Scratch buffers for activations
// live inside the object, so an Mlp is single-owner like the rest of a trial.
class Mlp {
 public:
  Mlp(int in, int h1, int h2, int out)
      : in_(in), h1_(h1), h2_(h2), out_(out) {
    if (in < 1 || h1 < 1 || h2 < 1 || out < 1)
      throw std::invalid_argument("all layer sizes must be >= 1");
    w1_ = 0;
    b1_ = w1_ + static_cast<std::size_t>(h1) * in;
    w2_ = b1_ + h1;
    b2_ = w2_ + static_cast<std::size_t>(h2) * h1;
    w3_ = b2_ + h2;
    b3_ = w3_ + static_cast<std::size_t>(out) * h2;
    params_.assign(b3_ + out, 0.0);
    act1_.assign(h1, 0.0);
    act2_.assign(h2, 0.0);
    output_.assign(out, 0.0);
    dz2_.assign(h2, 0.0);
  }

  // Weights drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases
  // zero; consumes one engine value per weight in layout order.
  static Mlp random_init(int in, int h1, int h2, int out, Rng& rng) {
    Mlp net(in, h1, h2, out);
    net.init_layer(net.w1_, h1, in, rng);
    net.init_layer(net.w2_, h2, h1, rng);
    net.init_layer(net.w3_, out, h2, rng);
    return net;
  }

  int input_size() const { return in_; }
  int output_size() const { return out_; }
  std::size_t num_params() const { return params_.size(); }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  const std::vector<double>& forward(std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(in_))
      throw std::invalid_argument("input size mismatch");
    for (int j = 0; j < h1_; ++j) {
      double acc = params_[b1_ + j];
      const double* row = &params_[w1_ + static_cast<std::size_t>(j) * in_];
      for (int i = 0; i < in_; ++i) acc += row[i] * x[i];
      act1_[j] = std::tanh(acc);
    }
    last_state_ = -1;
    finish_forward();
    return output_;
  }

  // One-hot input given by state index.
  const std::vector<double>& forward_state(int state) {
    if (state < 0 || state >= in_) throw std::out_of_range("state out of range");
    for (int j = 0; j < h1_; ++j) {
      double acc = params_[b1_ + j];
      acc += params_[w1_ + static_cast<std::size_t>(j) * in_ + state];
      act1_[j] = std::tanh(acc);
    }
    last_state_ = state;
    finish_forward();
    return output_;
  }

  double value(int state, int action) { return forward_state(state)[action]; }
  double max_value(int state) {
    const std::vector<double>& q = forward_state(state);
    return *std::max_element(q.begin(), q.end());
  }

  // Accumulates coeff * d output[action] / d params into grad, reusing the
  // activations of the immediately preceding forward_state call.
  void backprop_last_forward(int action, double coeff, std::vector<double>& grad) {
    if (last_state_ < 0)
      throw std::logic_error("backprop requires a preceding forward_state");
    if (action < 0 || action >= out_) throw std::out_of_range("action out of range");
    if (grad.size() != params_.size())
      throw std::invalid_argument("gradient size mismatch");

    grad[b3_ + action] += coeff;
    const double* w3_row = &params_[w3_ + static_cast<std::size_t>(action) * h2_];
    for (int k = 0; k < h2_; ++k) {
      grad[w3_ + static_cast<std::size_t>(action) * h2_ + k] += coeff * act2_[k];
      dz2_[k] = coeff * w3_row[k] * (1.0 - act2_[k] * act2_[k]);
    }
    for (int k = 0; k < h2_; ++k) {
      grad[b2_ + k] += dz2_[k];
      double* g_row = &grad[w2_ + static_cast<std::size_t>(k) * h1_];
      for (int j = 0; j < h1_; ++j) g_row[j] += dz2_[k] * act1_[j];
    }
    for (int j = 0; j < h1_; ++j) {
      double dh = 0.0;
      for (int k = 0; k < h2_; ++k)
        dh += dz2_[k] * params_[w2_ + static_cast<std::size_t>(k) * h1_ + j];
      const double dz1 = dh * (1.0 - act1_[j] * act1_[j]);
      grad[b1_ + j] += dz1;
      grad[w1_ + static_cast<std::size_t>(j) * in_ + last_state_] += dz1;
    }
  }

  void copy_params_from(const Mlp& other) {
    if (other.params_.size() != params_.size() || other.in_ != in_ ||
        other.h1_ != h1_ || other.h2_ != h2_ || other.out_ != out_)
      throw std::invalid_argument("parameter shape mismatch");
    params_ = other.params_;
  }

  // Text checkpoint: a shape header then one parameter per line in layout
  // order, printed so that reading them back restores identical doubles.
  void save_params(std::ostream& out) const {
    char line[64];
    std::snprintf(line, sizeof(line), "mlp %d %d %d %d\n", in_, h1_, h2_, out_);
    out << line;
    for (double p : params_) {
      std::snprintf(line, sizeof(line), "%.17g\n", p);
      out << line;
    }
  }

  static Mlp load_params(std::istream& in) {
    std::string tag;
    int sizes[4];
    if (!(in >> tag >> sizes[0] >> sizes[1] >> sizes[2] >> sizes[3]) || tag != "mlp")
      throw std::invalid_argument("malformed checkpoint header");
    Mlp net(sizes[0], sizes[1], sizes[2], sizes[3]);
    for (double& p : net.params_)
      if (!(in >> p)) throw std::invalid_argument("truncated checkpoint");
    return net;
  }

 private:
  void finish_forward() {
    for (int k = 0; k < h2_; ++k) {
      double acc = params_[b2_ + k];
      const double* row = &params_[w2_ + static_cast<std::size_t>(k) * h1_];
      for (int j = 0; j < h1_; ++j) acc += row[j] * act1_[j];
      act2_[k] = std::tanh(acc);
    }
    for (int o = 0; o < out_; ++o) {
      double acc = params_[b3_ + o];
      const double* row = &params_[w3_ + static_cast<std::size_t>(o) * h2_];
      for (int k = 0; k < h2_; ++k) acc += row[k] * act2_[k];
      output_[o] = acc;
    }
  }

  void init_layer(std::size_t offset, int rows, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * fan_in; ++i)
      params_[offset + i] = rand_range(rng, -bound, bound);
  }

  int in_, h1_, h2_, out_;
  std::size_t w1_, b1_, w2_, b2_, w3_, b3_;
  std::vector<double> params_;
  std::vector<double> act1_, act2_, output_, dz2_;
  int last_state_ = -1;
};

// Semi-gradient of the mean batch loss (1/m) sum 1/2 delta^2 with the target
// term held constant: grad = -(1/m) sum delta * dQ(s,a)/dtheta. Returns the
// mean loss. No gradient flows into target_net.
inline double mlp_td_gradient(Mlp& net, Mlp& target_net,
                              std::span<const Transition> batch, double gamma,
                              std::vector<double>& grad) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  grad.assign(net.num_params(), 0.0);
  const double m = static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Transition& t : batch) {
    const double bootstrap = t.terminal ? 0.0 : target_net.max_value(t.next_state);
    const double q_sa = net.forward_state(t.state)[t.action];
    const double delta = t.reward + gamma * bootstrap - q_sa;
    loss += 0.5 * delta * delta;
    net.backprop_last_forward(t.action, -delta / m, grad);
  }
  return loss / m;
}

}  // namespace ser
