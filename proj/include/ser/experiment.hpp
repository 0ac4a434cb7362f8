#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ser/agents.hpp"
#include "ser/envs.hpp"
#include "ser/replay.hpp"
#include "ser/report.hpp"

namespace ser {

// Everything a benchmark run depends on, as one flat value. Fields map 1:1 to
// config-file keys and CLI flags; see visit_config_fields for the key names.
struct ExperimentConfig {
  std::string env = "taxi";        // taxi | frozenlake | random
  std::string sampler = "uniform"; // uniform | stratified
  std::string agent = "dqn";       // tabular | dqn | random
  int num_seeds = 1;
  long long total_env_steps = 20000;
  long long eval_every = 1000;
  int eval_episodes = 20;
  long long capacity = 0;          // 0: hold every transition of the run
  std::string out_dir;
  int jobs = 1;

  double learning_rate = 1e-3;         // network agent (Adam)
  double tabular_learning_rate = 0.1;  // lookup-table agent
  int batch_size = 32;
  double discount = 0.99;
  int warmup = 500;
  int train_frequency = 1;
  int sync_period = 500;
  int hidden1 = 64;
  int hidden2 = 64;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long long epsilon_decay_steps = -1;  // -1: first 10% of total_env_steps
  int step_limit = 0;                  // 0: environment default
  int random_num_states = 10;
  int random_num_actions = 2;
  int random_branching = 2;
  unsigned long long random_model_seed = 9001;  // shared by every trial

  void validate() const {
    const auto one_of = [](const std::string& v, std::initializer_list<const char*> allowed) {
      for (const char* a : allowed)
        if (v == a) return true;
      return false;
    };
    if (!one_of(env, {"taxi", "frozenlake", "random"}))
      throw std::invalid_argument("env must be taxi, frozenlake, or random");
    if (!one_of(sampler, {"uniform", "stratified"}))
      throw std::invalid_argument("sampler must be uniform or stratified");
    if (!one_of(agent, {"tabular", "dqn", "random"}))
      throw std::invalid_argument("agent must be tabular, dqn, or random");
    if (num_seeds < 1) throw std::invalid_argument("seeds must be >= 1");
    if (total_env_steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
    if (total_env_steps > 0 && eval_every > total_env_steps)
      throw std::invalid_argument("eval_every must not exceed steps");
    if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be >= 1");
    if (capacity < 0) throw std::invalid_argument("capacity must be >= 0");
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    if (step_limit < 0) throw std::invalid_argument("step_limit must be >= 0");
    // Agent numeric fields are validated by the agent configs at trial start;
    // the schedule shape is checked here so errors surface before any work.
    EpsilonSchedule(epsilon_start, epsilon_end, resolved_epsilon_decay());
  }

  long long resolved_capacity() const {
    return capacity > 0 ? capacity : std::max<long long>(total_env_steps, 1);
  }
  long long resolved_epsilon_decay() const {
    return epsilon_decay_steps >= 0 ? epsilon_decay_steps : total_env_steps / 10;
  }
  int resolved_step_limit() const {
    if (step_limit > 0) return step_limit;
    if (env == "frozenlake") return kFrozenLakeStepLimit;
    return kTaxiStepLimit;  // taxi and random MDPs share the longer default
  }
};

// Single source of truth tying config fields to their key names. Both the
// config-file parser and the provenance writer walk this list, so the two can
// never drift apart.
template <class Config, class Visitor>
void visit_config_fields(Config& c, Visitor&& f) {
  f("env", c.env);
  f("sampler", c.sampler);
  f("agent", c.agent);
  f("seeds", c.num_seeds);
  f("steps", c.total_env_steps);
  f("eval_every", c.eval_every);
  f("eval_episodes", c.eval_episodes);
  f("capacity", c.capacity);
  f("out", c.out_dir);
  f("jobs", c.jobs);
  f("learning_rate", c.learning_rate);
  f("tabular_learning_rate", c.tabular_learning_rate);
  f("batch_size", c.batch_size);
  f("discount", c.discount);
  f("warmup", c.warmup);
  f("train_frequency", c.train_frequency);
  f("sync_period", c.sync_period);
  f("hidden1", c.hidden1);
  f("hidden2", c.hidden2);
  f("adam_beta1", c.adam_beta1);
  f("adam_beta2", c.adam_beta2);
  f("adam_epsilon", c.adam_epsilon);
  f("epsilon_start", c.epsilon_start);
  f("epsilon_end", c.epsilon_end);
  f("epsilon_decay_steps", c.epsilon_decay_steps);
  f("step_limit", c.step_limit);
  f("random_num_states", c.random_num_states);
  f("random_num_actions", c.random_num_actions);
  f("random_branching", c.random_branching);
  f("random_model_seed", c.random_model_seed);
}

namespace detail {

inline void format_config_value(std::ostream& out, const std::string& v) { out << v; }
inline void format_config_value(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}
template <class Int>
void format_config_value(std::ostream& out, Int v) {
  out << v;
}

inline void parse_config_value(const std::string& text, std::string& v) { v = text; }
inline void parse_config_value(const std::string& text, int& v) {
  std::size_t used = 0;
  v = std::stoi(text, &used);
  if (used != text.size()) throw std::invalid_argument("trailing characters");
}
inline void parse_config_value(const std::string& text, long long& v) {
  std::size_t used = 0;
  v = std::stoll(text, &used);
  if (used != text.size()) throw std::invalid_argument("trailing characters");
}
inline void parse_config_value(const std::string& text, unsigned long long& v) {
  std::size_t used = 0;
  v = std::stoull(text, &used);
  if (used != text.size()) throw std::invalid_argument("trailing characters");
}
inline void parse_config_value(const std::string& text, double& v) {
  std::size_t used = 0;
  v = std::stod(text, &used);
  if (used != text.size()) throw std::invalid_argument("trailing characters");
}

}  // namespace detail

// Flat key=value dump of every field, one per line, in a fixed order. Written
// next to run outputs so a result directory records what produced it.
inline void write_config(const ExperimentConfig& config, std::ostream& out) {
  visit_config_fields(config, [&out](const char* key, const auto& value) {
    out << key << '=';
    detail::format_config_value(out, value);
    out << '\n';
  });
}

// Applies key=value lines to an existing config, so later sources (a config
// file, then CLI flags) override earlier ones. Blank lines and '#' comments
// are skipped; an unknown key or unparsable value is an error.
inline void parse_config(ExperimentConfig& config, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " is not key=value: " + line);
    const std::string key = line.substr(first, eq - first);
    const std::string value = line.substr(eq + 1);
    bool found = false;
    visit_config_fields(config, [&](const char* name, auto& field) {
      if (found || key != name) return;
      found = true;
      try {
        detail::parse_config_value(value, field);
      } catch (const std::exception&) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": bad value for " + key + ": " + value);
      }
    });
    if (!found)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key " + key);
  }
}

struct CurvePoint {
  long long env_step = 0;
  double eval_return = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

// One seed's learning curve plus the final state of its replay memory.
struct TrialResult {
  int seed = 0;
  std::vector<CurvePoint> points;
  ReplayStats replay_stats;

  bool operator==(const TrialResult&) const = default;
};

// Per-evaluation-point statistics across seeds, plus one area-under-curve
// value per seed for scalar comparisons.
struct Summary {
  std::vector<long long> steps;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> std_error;
  std::vector<double> auc;
};

// Trapezoid area under the curve; zero when there is at most one point.
inline double trapezoid_auc(std::span<const CurvePoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    area += static_cast<double>(points[i].env_step - points[i - 1].env_step) *
            0.5 * (points[i].eval_return + points[i - 1].eval_return);
  return area;
}

inline Summary summarize(std::span<const TrialResult> trials) {
  if (trials.empty()) throw std::invalid_argument("no trials to summarize");
  const std::size_t num_points = trials.front().points.size();
  Summary s;
  for (std::size_t i = 0; i < num_points; ++i) {
    const long long step = trials.front().points[i].env_step;
    double sum = 0.0;
    for (const TrialResult& t : trials) {
      if (t.points.size() != num_points || t.points[i].env_step != step)
        throw std::invalid_argument("trials disagree on evaluation points");
      sum += t.points[i].eval_return;
    }
    const double n = static_cast<double>(trials.size());
    const double mean = sum / n;
    double sq = 0.0;
    for (const TrialResult& t : trials) {
      const double d = t.points[i].eval_return - mean;
      sq += d * d;
    }
    const double var = trials.size() > 1 ? sq / (n - 1.0) : 0.0;
    s.steps.push_back(step);
    s.mean.push_back(mean);
    s.stddev.push_back(std::sqrt(var));
    s.std_error.push_back(std::sqrt(var / n));
  }
  for (const TrialResult& t : trials) s.auc.push_back(trapezoid_auc(t.points));
  return s;
}

inline double mean_of(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of nothing");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Percentage of the uniform baseline's improvement over the random baseline
// that the stratified run achieves: 100 when equal to uniform, above 100 when
// better. Undefined when uniform and random coincide.
inline double relative_score(double stratified, double uniform, double random_baseline) {
  if (uniform == random_baseline)
    throw std::invalid_argument(
        "relative score undefined: uniform equals the random baseline");
  return 100.0 * (stratified - random_baseline) / (uniform - random_baseline);
}

// The environment model for a config. Trials share one model: the random MDP
// is seeded by random_model_seed, never by the trial seed, so every seed runs
// the same environment.
inline TabularMdp make_experiment_env(const ExperimentConfig& config) {
  if (config.env == "taxi") return make_taxi();
  if (config.env == "frozenlake") return make_frozenlake();
  Rng model_rng(config.random_model_seed);
  return make_random_mdp(model_rng, config.random_num_states, config.random_num_actions,
                         config.random_branching);
}

namespace detail {

// Mean undiscounted return of the greedy policy over fresh episodes. Runs on
// its own episode context and stream, leaving the training episode untouched.
template <class Agent>
double evaluate_policy(const TabularMdp& mdp, Agent& agent, int episodes,
                       int step_limit, Rng& rng) {
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    EpisodeContext ctx(step_limit);
    int state = reset(mdp, ctx, rng);
    while (!ctx.finished) {
      const StepResult r = step(mdp, ctx, rng, agent.eval_action(state, rng));
      total += r.reward;
      state = r.next_state;
    }
  }
  return total / episodes;
}

// The interact/store/train loop for one seed. Streams: 0 environment,
// 1 agent init (consumed by the caller), 2 exploration, 3 replay sampling,
// 4 evaluation. Everything the trial touches lives in this frame, so trials
// can run on any thread.
template <class Agent, class Memory>
TrialResult run_trial_impl(const ExperimentConfig& config, const TabularMdp& mdp,
                           int seed, Agent agent, Memory memory) {
  Rng env_rng = make_stream(seed, 0);
  Rng explore_rng = make_stream(seed, 2);
  Rng replay_rng = make_stream(seed, 3);
  Rng eval_rng = make_stream(seed, 4);

  const int step_limit = config.resolved_step_limit();
  TrialResult result;
  result.seed = seed;

  EpisodeContext ctx(step_limit);
  int state = reset(mdp, ctx, env_rng);
  result.points.push_back(
      {0, evaluate_policy(mdp, agent, config.eval_episodes, step_limit, eval_rng)});

  for (long long t = 0; t < config.total_env_steps; ++t) {
    const int action = agent.act(state, t, explore_rng);
    const StepResult r = step(mdp, ctx, env_rng, action);
    memory.insert(Transition{state, action, r.reward, r.next_state, r.terminal});
    agent.train_step(memory, replay_rng);
    state = ctx.finished ? reset(mdp, ctx, env_rng) : r.next_state;
    if ((t + 1) % config.eval_every == 0)
      result.points.push_back({t + 1, evaluate_policy(mdp, agent, config.eval_episodes,
                                                      step_limit, eval_rng)});
  }

  result.replay_stats = memory.stats();
  return result;
}

template <class Memory>
TrialResult run_trial_with_memory(const ExperimentConfig& config, const TabularMdp& mdp,
                                  int seed, Memory memory) {
  Rng init_rng = make_stream(seed, 1);
  const EpsilonSchedule schedule(config.epsilon_start, config.epsilon_end,
                                 config.resolved_epsilon_decay());
  if (config.agent == "dqn") {
    DqnConfig dc;
    dc.learning_rate = config.learning_rate;
    dc.batch_size = config.batch_size;
    dc.discount = config.discount;
    dc.warmup = config.warmup;
    dc.train_frequency = config.train_frequency;
    dc.sync_period = config.sync_period;
    dc.hidden1 = config.hidden1;
    dc.hidden2 = config.hidden2;
    dc.adam_beta1 = config.adam_beta1;
    dc.adam_beta2 = config.adam_beta2;
    dc.adam_epsilon = config.adam_epsilon;
    dc.exploration = schedule;
    return run_trial_impl(config, mdp, seed,
                          DqnAgent(mdp.num_states(), mdp.num_actions(), dc, init_rng),
                          std::move(memory));
  }
  if (config.agent == "tabular") {
    TabularConfig tc;
    tc.learning_rate = config.tabular_learning_rate;
    tc.batch_size = config.batch_size;
    tc.discount = config.discount;
    tc.warmup = config.warmup;
    tc.exploration = schedule;
    return run_trial_impl(config, mdp, seed,
                          TabularAgent(mdp.num_states(), mdp.num_actions(), tc),
                          std::move(memory));
  }
  return run_trial_impl(config, mdp, seed, RandomAgent(mdp.num_actions()),
                        std::move(memory));
}

}  // namespace detail

// One full trial for one seed, deterministic in (config, seed). All
// randomness comes from five fixed streams derived from the seed, so a
// sampler swap changes replay draws and nothing else.
inline TrialResult run_trial(const ExperimentConfig& config, const TabularMdp& mdp,
                             int seed) {
  config.validate();
  const auto cap = static_cast<std::size_t>(config.resolved_capacity());
  if (config.sampler == "stratified")
    return detail::run_trial_with_memory(config, mdp, seed, StratifiedReplayMemory(cap));
  return detail::run_trial_with_memory(config, mdp, seed, UniformReplayMemory(cap));
}

inline TrialResult run_trial(const ExperimentConfig& config, int seed) {
  const TabularMdp mdp = make_experiment_env(config);
  return run_trial(config, mdp, seed);
}

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;  // seeds 0..num_seeds-1, in order
  Summary summary;
};

// Runs seeds 0..num_seeds-1 and aggregates. jobs > 1 distributes whole trials
// over threads; each trial owns all its mutable state, so the result is
// byte-identical to a serial run.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const TabularMdp mdp = make_experiment_env(config);
  std::vector<TrialResult> trials(config.num_seeds);

  const int jobs = std::min(config.jobs, config.num_seeds);
  if (jobs <= 1) {
    for (int seed = 0; seed < config.num_seeds; ++seed)
      trials[seed] = run_trial(config, mdp, seed);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(config.num_seeds);
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        while (true) {
          const int seed = next.fetch_add(1);
          if (seed >= config.num_seeds) return;
          try {
            trials[seed] = run_trial(config, mdp, seed);
          } catch (...) {
            errors[seed] = std::current_exception();
          }
        }
      });
    for (std::thread& th : pool) th.join();
    for (int seed = 0; seed < config.num_seeds; ++seed) {
      if (!errors[seed]) continue;
      try {
        std::rethrow_exception(errors[seed]);
      } catch (const std::exception& e) {
        throw std::runtime_error("trial for seed " + std::to_string(seed) +
                                 " failed: " + e.what());
      }
    }
  }

  ExperimentResult out{config, std::move(trials), {}};
  out.summary = summarize(out.trials);
  return out;
}

// CSV rows for a result set, ordered by (seed, env_step).
inline std::vector<CsvRow> to_csv_rows(const ExperimentConfig& config,
                                       std::span<const TrialResult> trials) {
  std::vector<CsvRow> rows;
  for (const TrialResult& t : trials)
    for (const CurvePoint& p : t.points)
      rows.push_back({config.env, config.sampler, config.agent, t.seed, p.env_step,
                      p.eval_return});
  return rows;
}

inline PlotSeries to_plot_series(std::string label, const Summary& s) {
  return PlotSeries{std::move(label), s.steps, s.mean, s.std_error};
}

}  // namespace ser
