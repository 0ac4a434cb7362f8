// Command-line front end: `run` executes a benchmark and writes its artifacts,
// `oracle` prints the exact sampling-bias tables for an environment, and
// `compare` merges finished runs into one figure with relative scores.
// Every flag can also come from an SER_-prefixed environment variable.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ser/experiment.hpp"
#include "ser/oracle.hpp"
#include "ser/stat_tests.hpp"

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ---------------------------------------------------------------- run

struct RunFlags {
  std::optional<std::string> env, sampler, agent, out, config_file;
  std::optional<int> seeds, eval_episodes, jobs;
  std::optional<long long> steps, eval_every, capacity;
};

void add_run_flags(CLI::App& cmd, RunFlags& f) {
  cmd.add_option("--env", f.env, "environment: taxi, frozenlake, or random")
      ->envname("SER_ENV");
  cmd.add_option("--sampler", f.sampler, "replay sampler: uniform or stratified")
      ->envname("SER_SAMPLER");
  cmd.add_option("--agent", f.agent, "agent: tabular, dqn, or random")
      ->envname("SER_AGENT");
  cmd.add_option("--seeds", f.seeds, "number of trials, seeds 0..n-1")
      ->envname("SER_SEEDS");
  cmd.add_option("--steps", f.steps, "environment steps per trial")
      ->envname("SER_STEPS");
  cmd.add_option("--eval-every", f.eval_every, "environment steps between evaluations")
      ->envname("SER_EVAL_EVERY");
  cmd.add_option("--eval-episodes", f.eval_episodes, "episodes per evaluation point")
      ->envname("SER_EVAL_EPISODES");
  cmd.add_option("--capacity", f.capacity, "replay capacity, 0 keeps the whole run")
      ->envname("SER_CAPACITY");
  cmd.add_option("--out", f.out, "output directory")->envname("SER_OUT");
  cmd.add_option("--config", f.config_file, "key=value config file, flags override it")
      ->envname("SER_CONFIG");
  cmd.add_option("--jobs", f.jobs, "worker threads for trials")->envname("SER_JOBS");
}

ser::ExperimentConfig resolve_config(const RunFlags& f) {
  ser::ExperimentConfig config;
  if (f.config_file) {
    std::ifstream in(*f.config_file);
    if (!in) throw std::invalid_argument("cannot read config file " + *f.config_file);
    ser::parse_config(config, in);
  }
  if (f.env) config.env = *f.env;
  if (f.sampler) config.sampler = *f.sampler;
  if (f.agent) config.agent = *f.agent;
  if (f.seeds) config.num_seeds = *f.seeds;
  if (f.steps) config.total_env_steps = *f.steps;
  if (f.eval_every) config.eval_every = *f.eval_every;
  if (f.eval_episodes) config.eval_episodes = *f.eval_episodes;
  if (f.capacity) config.capacity = *f.capacity;
  if (f.out) config.out_dir = *f.out;
  if (f.jobs) config.jobs = *f.jobs;
  config.validate();
  if (config.out_dir.empty())
    throw std::invalid_argument("an output directory is required (--out)");
  return config;
}

int cmd_run(const RunFlags& flags) {
  const ser::ExperimentConfig config = resolve_config(flags);
  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);

  const ser::ExperimentResult result = ser::run_experiment(config);

  // Resolved provenance: the raw fields, reparseable, plus the values that
  // defaulted fields actually took.
  std::ostringstream config_text;
  ser::write_config(config, config_text);
  config_text << "# resolved_capacity=" << config.resolved_capacity() << '\n';
  config_text << "# resolved_epsilon_decay_steps=" << config.resolved_epsilon_decay()
              << '\n';
  config_text << "# resolved_step_limit=" << config.resolved_step_limit() << '\n';
  write_text_file(out_dir / "config.txt", config_text.str());

  std::ostringstream csv;
  ser::emit_csv(ser::to_csv_rows(config, result.trials), csv);
  write_text_file(out_dir / "results.csv", csv.str());

  const std::string label = config.env + "/" + config.sampler + "/" + config.agent;
  if (result.summary.steps.size() >= 2) {  // a single point has no curve to draw
    std::ostringstream svg;
    ser::emit_svg_plot(
        std::vector<ser::PlotSeries>{ser::to_plot_series(label, result.summary)}, svg,
        label);
    write_text_file(out_dir / "curve.svg", svg.str());
  }

  const ser::Summary& s = result.summary;
  std::cout << "wrote " << (out_dir / "results.csv").string() << " ("
            << result.trials.size() << " trials, " << s.steps.size()
            << " points each)\n";
  std::cout << "final return mean " << fmt_double(s.mean.back()) << " +- "
            << fmt_double(s.std_error.back()) << " (stderr), mean AUC "
            << fmt_double(ser::mean_of(s.auc)) << "\n";
  return 0;
}

// ---------------------------------------------------------------- oracle

int cmd_oracle(const std::string& env, const std::string& policy) {
  if (policy != "uniform")
    throw std::invalid_argument("only the uniform behavior policy is supported");
  ser::ExperimentConfig env_only;
  env_only.env = env;
  env_only.validate();
  const ser::TabularMdp mdp = ser::make_experiment_env(env_only);

  const ser::BehaviorPolicy mu =
      ser::BehaviorPolicy::uniform(mdp.num_states(), mdp.num_actions());
  const ser::OccupancyDistribution occupancy = ser::stationary_distribution(mdp, mu);
  const auto uniform_w = ser::sampling_weights(occupancy, ser::SamplingMode::uniform);
  const auto strat_w = ser::sampling_weights(occupancy, ser::SamplingMode::stratified);

  std::cout << "occupancy  env=" << env << "  policy=" << policy << "\n";
  std::cout << "state action pr_sa uniform_draw stratified_draw\n";
  double min_pos = 1.0, max_pos = 0.0;
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const double p = occupancy.pr(s, a);
      if (p <= 0.0) continue;
      min_pos = std::min(min_pos, p);
      max_pos = std::max(max_pos, p);
      const std::size_t i = static_cast<std::size_t>(s) * mdp.num_actions() + a;
      std::cout << s << ' ' << a << ' ' << fmt_double(p) << ' '
                << fmt_double(uniform_w[i]) << ' ' << fmt_double(strat_w[i]) << "\n";
    }
  std::cout << "support " << occupancy.support_size() << " of "
            << static_cast<long long>(mdp.num_states()) * mdp.num_actions()
            << " pairs, occupancy ratio max/min " << fmt_double(max_pos / min_pos)
            << "\n\n";

  std::cout << "ideal law  env=" << env << "\n";
  std::cout << "state action next_state pr_ideal\n";
  for (const ser::IdealEntry& e : ser::ideal_distribution(mdp))
    std::cout << e.state << ' ' << e.action << ' ' << e.next_state << ' '
              << fmt_double(e.probability) << "\n";
  return 0;
}

// ---------------------------------------------------------------- compare

struct RunGroup {
  std::string env, sampler, agent;
  std::vector<ser::TrialResult> trials;
  ser::Summary summary;
};

std::vector<RunGroup> load_groups(const std::vector<std::string>& dirs) {
  std::vector<ser::CsvRow> rows;
  for (const std::string& dir : dirs) {
    const std::filesystem::path path = std::filesystem::path(dir) / "results.csv";
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path.string());
    for (ser::CsvRow& r : ser::parse_csv(in)) rows.push_back(std::move(r));
  }

  std::map<std::string, RunGroup> by_label;
  std::map<std::string, std::map<int, std::vector<ser::CurvePoint>>> curves;
  for (const ser::CsvRow& r : rows) {
    const std::string label = r.env + "/" + r.sampler + "/" + r.agent;
    RunGroup& g = by_label[label];
    g.env = r.env;
    g.sampler = r.sampler;
    g.agent = r.agent;
    curves[label][r.seed].push_back({r.env_step, r.eval_return});
  }
  std::vector<RunGroup> groups;
  for (auto& [label, g] : by_label) {
    for (auto& [seed, points] : curves[label]) {
      std::sort(points.begin(), points.end(),
                [](const ser::CurvePoint& x, const ser::CurvePoint& y) {
                  return x.env_step < y.env_step;
                });
      g.trials.push_back({seed, std::move(points), {}});
    }
    g.summary = ser::summarize(g.trials);
    groups.push_back(std::move(g));
  }
  return groups;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_path) {
  const std::vector<RunGroup> groups = load_groups(dirs);
  if (groups.empty()) throw std::invalid_argument("no curves found in the inputs");

  for (const RunGroup& g : groups)
    std::cout << g.env << "/" << g.sampler << "/" << g.agent << ": "
              << g.trials.size() << " trials, mean AUC "
              << fmt_double(ser::mean_of(g.summary.auc)) << "\n";

  // Stratified vs uniform significance, then the normalized score whenever a
  // random-agent baseline ran on the same environment.
  const auto find = [&groups](const std::string& env, const std::string& sampler,
                              const std::string& agent) -> const RunGroup* {
    for (const RunGroup& g : groups)
      if (g.env == env && g.sampler == sampler && g.agent == agent) return &g;
    return nullptr;
  };
  for (const RunGroup& g : groups) {
    if (g.sampler != "stratified" || g.agent == "random") continue;
    const RunGroup* uniform = find(g.env, "uniform", g.agent);
    if (!uniform) continue;
    if (g.summary.auc.size() >= 2 && uniform->summary.auc.size() >= 2) {
      const ser::WelchResult w =
          ser::welch_one_sided(g.summary.auc, uniform->summary.auc);
      std::cout << g.env << "/" << g.agent
                << ": one-sided p(stratified AUC > uniform AUC) = "
                << fmt_double(w.p_value) << "\n";
    }
    const RunGroup* random_baseline = nullptr;
    for (const RunGroup& cand : groups)
      if (cand.env == g.env && cand.agent == "random") random_baseline = &cand;
    if (random_baseline) {
      const double score =
          ser::relative_score(ser::mean_of(g.summary.auc),
                              ser::mean_of(uniform->summary.auc),
                              ser::mean_of(random_baseline->summary.auc));
      std::cout << g.env << "/" << g.agent << ": relative score "
                << fmt_double(score) << "\n";
    }
  }

  const std::filesystem::path out(out_path);
  if (out.extension() == ".csv") {
    std::vector<ser::CsvRow> merged;
    for (const RunGroup& g : groups)
      for (const ser::TrialResult& t : g.trials)
        for (const ser::CurvePoint& p : t.points)
          merged.push_back({g.env, g.sampler, g.agent, t.seed, p.env_step,
                            p.eval_return});
    std::ostringstream csv;
    ser::emit_csv(merged, csv);
    write_text_file(out, csv.str());
  } else {
    std::vector<ser::PlotSeries> series;
    for (const RunGroup& g : groups)
      series.push_back(
          ser::to_plot_series(g.env + "/" + g.sampler + "/" + g.agent, g.summary));
    std::ostringstream svg;
    ser::emit_svg_plot(series, svg, "learning curves");
    write_text_file(out, svg.str());
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratified experience replay benchmark"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "run a benchmark and write artifacts");
  add_run_flags(*run_cmd, run_flags);

  std::string oracle_env = "frozenlake";
  std::string oracle_policy = "uniform";
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "print exact sampling-bias tables");
  oracle_cmd->add_option("--env", oracle_env, "environment: taxi, frozenlake, or random")
      ->envname("SER_ENV");
  oracle_cmd->add_option("--policy", oracle_policy, "behavior policy (uniform)")
      ->envname("SER_POLICY");

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "merge runs into one figure with scores");
  compare_cmd->add_option("dirs", compare_dirs, "run output directories")
      ->required()
      ->expected(-1);
  compare_cmd->add_option("--out", compare_out, "output file (.svg or .csv)")
      ->required()
      ->envname("SER_OUT");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_flags);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_env, oracle_policy);
    return cmd_compare(compare_dirs, compare_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
