// Trains the lookup-table agent on the slippery lake twice, once per sampler,
// and prints the two learning curves side by side.

#include <cstdio>

#include "ser/experiment.hpp"

int main() {
  ser::ExperimentConfig config;
  config.env = "frozenlake";
  config.agent = "tabular";
  config.total_env_steps = 30000;
  config.eval_every = 5000;
  config.eval_episodes = 100;
  config.batch_size = 8;
  config.warmup = 1;
  config.epsilon_end = 0.2;
  config.epsilon_decay_steps = 10000;

  config.sampler = "uniform";
  const ser::TrialResult uniform = ser::run_trial(config, 0);
  config.sampler = "stratified";
  const ser::TrialResult stratified = ser::run_trial(config, 0);

  std::printf("env step  uniform  stratified\n");
  for (std::size_t i = 0; i < uniform.points.size(); ++i)
    std::printf("%8lld  %7.3f  %10.3f\n", uniform.points[i].env_step,
                uniform.points[i].eval_return, stratified.points[i].eval_return);

  std::printf("\nAUC uniform %.1f, stratified %.1f\n",
              ser::trapezoid_auc(uniform.points),
              ser::trapezoid_auc(stratified.points));
  return 0;
}
