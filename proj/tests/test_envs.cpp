#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "ser/envs.hpp"
#include "ser/random.hpp"
#include "ser/tabular_mdp.hpp"
#include "support/value_iteration.hpp"

using ser::EpisodeContext;
using ser::OutcomeEntry;
using ser::Rng;
using ser::TabularMdp;

namespace {

// Taxi state packing: ((row * 5 + col) * 5 + passenger) * 4 + destination.
int taxi_encode(int row, int col, int pass, int dest) {
  return ((row * 5 + col) * 5 + pass) * 4 + dest;
}

// Single deterministic outcome shorthand for the Taxi checks.
void check_taxi_move(const TabularMdp& taxi, int state, int action, int expect_next,
                     double expect_reward, bool expect_terminal) {
  auto entries = taxi.entries(state, action);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].probability == 1.0);
  CHECK(entries[0].next_state == expect_next);
  CHECK(entries[0].reward == expect_reward);
  CHECK(entries[0].terminal == expect_terminal);
}

TabularMdp make_two_state_chain() {
  // State 0 loops under action 0 and jumps to terminal state 1 under action 1.
  std::vector<std::vector<OutcomeEntry>> model(4);
  model[0] = {{1.0, 0, 0.0, false}};
  model[1] = {{1.0, 1, 1.0, true}};
  model[2] = {{1.0, 1, 0.0, true}};
  model[3] = {{1.0, 1, 0.0, true}};
  return TabularMdp(2, 2, std::move(model), {1.0, 0.0}, 0.5);
}

}  // namespace

TEST_CASE("taxi model shape") {
  const TabularMdp taxi = ser::make_taxi();
  CHECK(taxi.num_states() == 500);
  CHECK(taxi.num_actions() == 6);
  CHECK(taxi.gamma_default() == 0.99);

  for (int s = 0; s < 500; ++s)
    for (int a = 0; a < 6; ++a) {
      auto entries = taxi.entries(s, a);
      REQUIRE(entries.size() == 1);
      CHECK(entries[0].probability == 1.0);
    }

  // Exactly the passenger-delivered states are terminal, one per taxi cell
  // and matching landmark pair.
  int terminal_count = 0;
  for (int s = 0; s < 500; ++s) {
    const int dest = s % 4, pass = (s / 4) % 5;
    CHECK(taxi.is_terminal_state(s) == (pass == dest));
    if (taxi.is_terminal_state(s)) ++terminal_count;
  }
  CHECK(terminal_count == 100);
}

TEST_CASE("taxi start distribution covers exactly the undelivered out-of-taxi states") {
  const TabularMdp taxi = ser::make_taxi();
  int support = 0;
  for (int s = 0; s < 500; ++s) {
    const double p = taxi.initial_distribution()[s];
    const int dest = s % 4, pass = (s / 4) % 5;
    if (pass < 4 && pass != dest) {
      CHECK(p == 1.0 / 300.0);
      ++support;
    } else {
      CHECK(p == 0.0);
    }
  }
  CHECK(support == 300);
}

TEST_CASE("taxi movement, walls, pickup and dropoff rules") {
  const TabularMdp taxi = ser::make_taxi();

  // Pickup at the passenger's landmark moves them into the taxi.
  check_taxi_move(taxi, taxi_encode(0, 0, 0, 1), 4, taxi_encode(0, 0, 4, 1), -1.0, false);
  // Pickup anywhere else is illegal.
  check_taxi_move(taxi, taxi_encode(0, 1, 0, 1), 4, taxi_encode(0, 1, 0, 1), -10.0, false);
  check_taxi_move(taxi, taxi_encode(0, 0, 4, 1), 4, taxi_encode(0, 0, 4, 1), -10.0, false);

  // South from the top row; north bumps against the wall.
  check_taxi_move(taxi, taxi_encode(0, 0, 4, 1), 0, taxi_encode(1, 0, 4, 1), -1.0, false);
  check_taxi_move(taxi, taxi_encode(0, 0, 4, 1), 1, taxi_encode(0, 0, 4, 1), -1.0, false);
  // The barrier east of (0,1) blocks both directions.
  check_taxi_move(taxi, taxi_encode(0, 1, 4, 0), 2, taxi_encode(0, 1, 4, 0), -1.0, false);
  check_taxi_move(taxi, taxi_encode(0, 2, 4, 0), 3, taxi_encode(0, 2, 4, 0), -1.0, false);
  // Open corridor at row 2.
  check_taxi_move(taxi, taxi_encode(2, 1, 4, 0), 2, taxi_encode(2, 2, 4, 0), -1.0, false);

  // Dropoff at the destination ends the episode with the bonus.
  check_taxi_move(taxi, taxi_encode(0, 4, 4, 1), 5, taxi_encode(0, 4, 1, 1), 20.0, true);
  // Dropoff at a different landmark sets the passenger down there.
  check_taxi_move(taxi, taxi_encode(4, 0, 4, 1), 5, taxi_encode(4, 0, 2, 1), -1.0, false);
  // Dropoff away from any landmark is illegal.
  check_taxi_move(taxi, taxi_encode(2, 2, 4, 0), 5, taxi_encode(2, 2, 4, 0), -10.0, false);
  // Dropoff without the passenger aboard is illegal even at a landmark.
  check_taxi_move(taxi, taxi_encode(0, 4, 0, 3), 5, taxi_encode(0, 4, 0, 3), -10.0, false);

  // Delivered states absorb with zero reward.
  const int done = taxi_encode(3, 2, 1, 1);
  for (int a = 0; a < 6; ++a) check_taxi_move(taxi, done, a, done, 0.0, true);
}

TEST_CASE("taxi reset is uniform over the 300 start states") {
  const TabularMdp taxi = ser::make_taxi();
  Rng rng = ser::make_stream(2024, 0);
  EpisodeContext ctx(ser::kTaxiStepLimit);

  std::map<int, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const int s = ser::reset(taxi, ctx, rng);
    const int dest = s % 4, pass = (s / 4) % 5;
    REQUIRE(pass < 4);
    REQUIRE(pass != dest);
    ++counts[s];
  }
  REQUIRE(counts.size() == 300);
  // Mean 333.3 draws per state, sd 18.2; a 7 sd corridor.
  for (const auto& [state, n] : counts) {
    CHECK(n > 200);
    CHECK(n < 500);
  }
}

TEST_CASE("taxi greedy planning delivers from every start state") {
  const TabularMdp taxi = ser::make_taxi();
  const std::vector<double> q = ser::testing::value_iteration_q(taxi, 0.99, 1e-10);

  for (int start = 0; start < 500; ++start) {
    if (taxi.initial_distribution()[start] == 0.0) continue;
    int s = start;
    bool delivered = false;
    for (int t = 0; t < ser::kTaxiStepLimit; ++t) {
      const int a = ser::testing::greedy_action(q, 6, s);
      const OutcomeEntry& e = taxi.entries(s, a)[0];
      s = e.next_state;
      if (e.terminal) {
        CHECK(e.reward == 20.0);
        delivered = true;
        break;
      }
    }
    REQUIRE(delivered);
  }
}

TEST_CASE("frozenlake model shape and slip structure") {
  const TabularMdp lake = ser::make_frozenlake();
  CHECK(lake.num_states() == 16);
  CHECK(lake.num_actions() == 4);
  CHECK(lake.gamma_default() == 0.99);

  // Holes and the goal are the only terminal states and they absorb.
  const std::vector<int> terminals = {5, 7, 11, 12, 15};
  for (int s = 0; s < 16; ++s) {
    const bool expect = std::find(terminals.begin(), terminals.end(), s) != terminals.end();
    CHECK(lake.is_terminal_state(s) == expect);
    if (expect)
      for (int a = 0; a < 4; ++a) {
        auto entries = lake.entries(s, a);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].next_state == s);
        CHECK(entries[0].probability == 1.0);
        CHECK(entries[0].reward == 0.0);
        CHECK(entries[0].terminal);
      }
  }

  for (int s = 0; s < 16; ++s)
    for (int a = 0; a < 4; ++a) {
      double total = 0.0;
      for (const OutcomeEntry& e : lake.entries(s, a)) {
        total += e.probability;
        CHECK(e.probability >= 1.0 / 3.0 - 1e-15);
      }
      CHECK(total == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("frozenlake slip outcomes at hand-checked cells") {
  const TabularMdp lake = ser::make_frozenlake();

  // Moving left from the start cell: up and left both bounce back, down slips
  // to state 4, so the self-transition carries 2/3.
  {
    auto entries = lake.entries(0, 0);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].next_state == 0);
    CHECK(entries[0].probability == Catch::Approx(2.0 / 3.0).margin(1e-15));
    CHECK_FALSE(entries[0].terminal);
    CHECK(entries[1].next_state == 4);
    CHECK(entries[1].probability == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(entries[1].reward == 0.0);
  }

  // Moving right next to the goal: slips to 10, bounces to 14, or reaches the
  // goal with the unit reward.
  {
    auto entries = lake.entries(14, 2);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].next_state == 10);
    CHECK_FALSE(entries[0].terminal);
    CHECK(entries[1].next_state == 14);
    CHECK_FALSE(entries[1].terminal);
    CHECK(entries[2].next_state == 15);
    CHECK(entries[2].reward == 1.0);
    CHECK(entries[2].terminal);
    for (const OutcomeEntry& e : entries)
      CHECK(e.probability == Catch::Approx(1.0 / 3.0).margin(1e-15));
  }

  // Moving right beside a hole: the downward slip lands in it.
  {
    auto entries = lake.entries(8, 2);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].next_state == 4);
    CHECK(entries[1].next_state == 9);
    CHECK(entries[2].next_state == 12);
    CHECK(entries[2].terminal);
  }
}

TEST_CASE("frozenlake always starts at the top-left cell") {
  const TabularMdp lake = ser::make_frozenlake();
  CHECK(lake.initial_distribution()[0] == 1.0);
  Rng rng = ser::make_stream(7, 0);
  EpisodeContext ctx(ser::kFrozenLakeStepLimit);
  for (int i = 0; i < 100; ++i) CHECK(ser::reset(lake, ctx, rng) == 0);
}

TEST_CASE("step frequencies match the declared outcome probabilities") {
  const TabularMdp lake = ser::make_frozenlake();
  Rng rng = ser::make_stream(99, 0);
  EpisodeContext ctx(ser::kFrozenLakeStepLimit);

  std::map<int, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    ctx.current_state = 8;
    ctx.steps_taken = 0;
    ctx.finished = false;
    const ser::StepResult r = ser::step(lake, ctx, rng, 2);
    ++counts[r.next_state];
  }

  double tv = 0.0;
  for (const OutcomeEntry& e : lake.entries(8, 2)) {
    const double freq = static_cast<double>(counts[e.next_state]) / draws;
    tv += 0.5 * std::abs(freq - e.probability);
  }
  CHECK(tv <= 0.01);
}

TEST_CASE("episodes are reproducible from the seed") {
  const TabularMdp taxi = ser::make_taxi();
  auto run = [&](std::uint64_t seed) {
    Rng rng = ser::make_stream(seed, 3);
    EpisodeContext ctx(ser::kTaxiStepLimit);
    std::vector<int> visited = {ser::reset(taxi, ctx, rng)};
    for (int t = 0; t < 50 && !ctx.finished; ++t)
      visited.push_back(ser::step(taxi, ctx, rng, t % 6).next_state);
    return visited;
  };
  CHECK(run(11) == run(11));
  CHECK(run(11) != run(12));
}

TEST_CASE("episode truncation and termination bookkeeping") {
  const TabularMdp chain = make_two_state_chain();
  Rng rng(1);

  SECTION("stepping before any reset is an error") {
    EpisodeContext ctx(10);
    CHECK_THROWS_AS(ser::step(chain, ctx, rng, 0), std::logic_error);
  }

  SECTION("the step limit truncates a live episode") {
    EpisodeContext ctx(3);
    ser::reset(chain, ctx, rng);
    for (int t = 0; t < 2; ++t) {
      const ser::StepResult r = ser::step(chain, ctx, rng, 0);
      CHECK_FALSE(r.terminal);
      CHECK_FALSE(r.truncated);
      CHECK_FALSE(ctx.finished);
    }
    const ser::StepResult r = ser::step(chain, ctx, rng, 0);
    CHECK_FALSE(r.terminal);
    CHECK(r.truncated);
    CHECK(ctx.finished);
    CHECK_THROWS_AS(ser::step(chain, ctx, rng, 0), std::logic_error);
  }

  SECTION("a terminal transition at the limit counts as terminal, not truncated") {
    EpisodeContext ctx(1);
    ser::reset(chain, ctx, rng);
    const ser::StepResult r = ser::step(chain, ctx, rng, 1);
    CHECK(r.terminal);
    CHECK_FALSE(r.truncated);
    CHECK(r.reward == 1.0);
    CHECK(ctx.finished);
  }

  SECTION("reset revives a finished episode") {
    EpisodeContext ctx(1);
    ser::reset(chain, ctx, rng);
    ser::step(chain, ctx, rng, 0);
    CHECK(ctx.finished);
    CHECK(ser::reset(chain, ctx, rng) == 0);
    CHECK_FALSE(ctx.finished);
    CHECK(ctx.steps_taken == 0);
  }

  SECTION("the step limit must be positive") {
    CHECK_THROWS_AS(EpisodeContext(0), std::invalid_argument);
  }
}

TEST_CASE("model construction rejects malformed input") {
  using Model = std::vector<std::vector<OutcomeEntry>>;

  CHECK_THROWS_AS(TabularMdp(1, 1, Model{{{0.9, 0, 0.0, false}}}, {1.0}, 0.99),
                  std::invalid_argument);  // probabilities sum to 0.9
  CHECK_THROWS_AS(TabularMdp(1, 1, Model{{}}, {1.0}, 0.99),
                  std::invalid_argument);  // no outcomes
  CHECK_THROWS_AS(TabularMdp(1, 1, Model{{{1.0, 1, 0.0, false}}}, {1.0}, 0.99),
                  std::invalid_argument);  // successor out of range
  CHECK_THROWS_AS(TabularMdp(1, 1, Model{{{-0.5, 0, 0.0, false}, {1.5, 0, 0.0, false}}},
                             {1.0}, 0.99),
                  std::invalid_argument);  // negative probability
  CHECK_THROWS_AS(TabularMdp(1, 1, Model{{{0.5, 0, 1.0, false}, {0.5, 0, 2.0, false}}},
                             {1.0}, 0.99),
                  std::invalid_argument);  // duplicate successor, conflicting reward
  CHECK_THROWS_AS(
      TabularMdp(2, 1,
                 Model{{{0.5, 1, 0.0, true}, {0.5, 0, 0.0, false}}, {{1.0, 1, 0.0, false}}},
                 {1.0, 0.0}, 0.99),
      std::invalid_argument);  // state 1 both terminal and not
  CHECK_THROWS_AS(TabularMdp(1, 1, Model{{{1.0, 0, 0.0, false}}}, {0.5}, 0.99),
                  std::invalid_argument);  // initial mass not 1
  CHECK_THROWS_AS(TabularMdp(1, 1, Model{{{1.0, 0, 0.0, false}}}, {1.0}, 1.5),
                  std::invalid_argument);  // discount out of range

  // Duplicate successors with matching reward and flag merge cleanly.
  const TabularMdp merged(1, 1, Model{{{0.25, 0, 0.0, false}, {0.75, 0, 0.0, false}}},
                          {1.0}, 0.99);
  REQUIRE(merged.entries(0, 0).size() == 1);
  CHECK(merged.entries(0, 0)[0].probability == 1.0);
  CHECK(merged.transition_prob(0, 0, 0) == 1.0);
}

TEST_CASE("random models are seed reproducible and well formed") {
  Rng rng_a = ser::make_stream(5, 1);
  Rng rng_b = ser::make_stream(5, 1);
  Rng rng_c = ser::make_stream(6, 1);
  const TabularMdp a = ser::make_random_mdp(rng_a, 8, 3, 2);
  const TabularMdp b = ser::make_random_mdp(rng_b, 8, 3, 2);
  const TabularMdp c = ser::make_random_mdp(rng_c, 8, 3, 2);

  std::ostringstream text_a, text_b, text_c;
  ser::dump_model(a, text_a);
  ser::dump_model(b, text_b);
  ser::dump_model(c, text_c);
  CHECK(text_a.str() == text_b.str());
  CHECK(text_a.str() != text_c.str());

  for (int s = 0; s < 8; ++s)
    for (int act = 0; act < 3; ++act) {
      auto entries = a.entries(s, act);
      REQUIRE(entries.size() == 2);
      CHECK(entries[0].next_state != entries[1].next_state);
      double total = 0.0;
      for (const OutcomeEntry& e : entries) {
        CHECK(e.probability > 0.0);
        CHECK(e.reward >= -1.0);
        CHECK(e.reward <= 1.0);
        CHECK_FALSE(e.terminal);
        total += e.probability;
      }
      CHECK(total == Catch::Approx(1.0).margin(1e-12));
    }
  for (int s = 0; s < 8; ++s) CHECK(a.initial_distribution()[s] == 1.0 / 8.0);
}

TEST_CASE("random model argument validation") {
  Rng rng(1);
  CHECK_THROWS_AS(ser::make_random_mdp(rng, 0, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(ser::make_random_mdp(rng, 4, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ser::make_random_mdp(rng, 4, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(ser::make_random_mdp(rng, 4, 2, 5), std::invalid_argument);

  const TabularMdp single = ser::make_random_mdp(rng, 4, 2, 1);
  for (int s = 0; s < 4; ++s)
    for (int a = 0; a < 2; ++a) {
      REQUIRE(single.entries(s, a).size() == 1);
      CHECK(single.entries(s, a)[0].probability == 1.0);
    }
}

TEST_CASE("one-hot encoding") {
  const std::vector<double> v = ser::one_hot_encode(2, 4);
  CHECK(v == std::vector<double>{0.0, 0.0, 1.0, 0.0});
  CHECK(ser::one_hot_encode(0, 1) == std::vector<double>{1.0});
  CHECK_THROWS_AS(ser::one_hot_encode(4, 4), std::out_of_range);
  CHECK_THROWS_AS(ser::one_hot_encode(-1, 4), std::out_of_range);
}

TEST_CASE("model dump is exact and ordered") {
  std::vector<std::vector<OutcomeEntry>> model(2);
  model[0] = {{0.5, 1, 0.25, true}, {0.5, 0, 1.0, false}};
  model[1] = {{1.0, 1, 0.0, true}};
  const TabularMdp mdp(2, 1, std::move(model), {1.0, 0.0}, 0.99);

  std::ostringstream out;
  ser::dump_model(mdp, out);
  CHECK(out.str() ==
        "0 0 0.5 0 1 0\n"
        "0 0 0.5 1 0.25 1\n"
        "1 0 1 1 0 1\n");
}

TEST_CASE("planning oracle reproduces closed-form action values") {
  const TabularMdp chain = make_two_state_chain();
  // Action 1 from state 0 pays 1 and ends; the loop action is worth
  // gamma * max_a Q(0, a) = 0.5.
  const std::vector<double> q = ser::testing::value_iteration_q(chain, 0.5);
  CHECK(q[0] == Catch::Approx(0.5).margin(1e-10));
  CHECK(q[1] == Catch::Approx(1.0).margin(1e-12));
  CHECK(q[2] == 0.0);  // terminal state
  CHECK(q[3] == 0.0);

  // Stochastic restart: Q = 0.5 * 2 + 0.5 * gamma * Q with gamma = 0.5.
  std::vector<std::vector<OutcomeEntry>> model(2);
  model[0] = {{0.5, 1, 2.0, true}, {0.5, 0, 0.0, false}};
  model[1] = {{1.0, 1, 0.0, true}};
  const TabularMdp restart(2, 1, std::move(model), {1.0, 0.0}, 0.5);
  const std::vector<double> q2 = ser::testing::value_iteration_q(restart, 0.5);
  CHECK(q2[0] == Catch::Approx(4.0 / 3.0).margin(1e-10));
}

TEST_CASE("frozenlake optimal start value is in the plausible band") {
  const TabularMdp lake = ser::make_frozenlake();
  const std::vector<double> q = ser::testing::value_iteration_q(lake, 0.99, 1e-12);
  double v0 = q[0];
  for (int a = 1; a < 4; ++a) v0 = std::max(v0, q[a]);
  // The slip model caps the success probability well below 1 but an optimal
  // policy still reaches the goal most of the time.
  CHECK(v0 > 0.3);
  CHECK(v0 < 0.95);
}
