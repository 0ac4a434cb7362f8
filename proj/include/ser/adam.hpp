#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ser {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam moment estimates for one flat parameter vector.
class AdamState {
 public:
  AdamState(std::size_t num_params, AdamConfig config)
      : config_(config), m_(num_params, 0.0), v_(num_params, 0.0) {
    if (config.learning_rate < 0.0)
      throw std::invalid_argument("learning rate must be >= 0");
    if (config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 ||
        config.beta2 >= 1.0)
      throw std::invalid_argument("adam betas must lie in [0,1)");
    if (config.epsilon <= 0.0) throw std::invalid_argument("adam epsilon must be > 0");
  }

  const AdamConfig& config() const { return config_; }
  long long step_count() const { return t_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

  friend void adam_step(AdamState& opt, std::vector<double>& params,
                        const std::vector<double>& grad);

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long long t_ = 0;
};

// One Adam update with bias correction: params -= lr * m_hat / (sqrt(v_hat) + eps).
inline void adam_step(AdamState& opt, std::vector<double>& params,
                      const std::vector<double>& grad) {
  if (params.size() != opt.m_.size() || grad.size() != opt.m_.size())
    throw std::invalid_argument("adam_step shape mismatch");
  ++opt.t_;
  const AdamConfig& c = opt.config_;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(opt.t_));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(opt.t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    opt.m_[i] = c.beta1 * opt.m_[i] + (1.0 - c.beta1) * grad[i];
    opt.v_[i] = c.beta2 * opt.v_[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    const double m_hat = opt.m_[i] / bias1;
    const double v_hat = opt.v_[i] / bias2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace ser
