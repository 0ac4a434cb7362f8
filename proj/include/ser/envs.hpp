#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "ser/random.hpp"
#include "ser/tabular_mdp.hpp"

namespace ser {

inline constexpr int kTaxiStepLimit = 200;
inline constexpr int kFrozenLakeStepLimit = 100;

// 5x5 grid Taxi: 500 states (25 taxi positions x 5 passenger locations x 4
// destinations), 6 actions (south, north, east, west, pickup, dropoff).
// Deterministic dynamics; -1 per step, +20 for a successful dropoff, -10 for
// an illegal pickup or dropoff. States with the passenger already delivered
// (passenger location == destination) are terminal.
inline TabularMdp make_taxi() {
  constexpr int kRows = 5, kCols = 5;
  constexpr int kNumStates = 500, kNumActions = 6;
  // Landmarks in (row, col): R, G, Y, B.
  constexpr std::array<std::array<int, 2>, 4> kLocs = {{{0, 0}, {0, 4}, {4, 0}, {4, 3}}};
  // Cell columns sit at string position 2*col+1; a '|' between two cells
  // blocks east/west movement.
  constexpr std::array<const char*, 5> kMap = {
      "|R: | : :G|",
      "| : | : : |",
      "| : : : : |",
      "| | : | : |",
      "|Y| : |B: |",
  };

  const auto encode = [](int row, int col, int pass, int dest) {
    return ((row * kCols + col) * 5 + pass) * 4 + dest;
  };
  const auto wall_right = [&](int row, int col) {
    return kMap[row][2 * col + 2] == '|';
  };
  const auto landmark_at = [&](int row, int col) {
    for (int i = 0; i < 4; ++i)
      if (kLocs[i][0] == row && kLocs[i][1] == col) return i;
    return -1;
  };

  std::vector<std::vector<OutcomeEntry>> model(
      static_cast<std::size_t>(kNumStates) * kNumActions);
  std::vector<double> initial(kNumStates, 0.0);

  for (int row = 0; row < kRows; ++row) {
    for (int col = 0; col < kCols; ++col) {
      for (int pass = 0; pass < 5; ++pass) {
        for (int dest = 0; dest < 4; ++dest) {
          const int state = encode(row, col, pass, dest);
          const bool delivered = pass == dest;
          for (int action = 0; action < kNumActions; ++action) {
            auto& entries = model[static_cast<std::size_t>(state) * kNumActions + action];
            if (delivered) {
              entries.push_back({1.0, state, 0.0, true});
              continue;
            }
            int new_row = row, new_col = col, new_pass = pass;
            double reward = -1.0;
            bool terminal = false;
            switch (action) {
              case 0:  // south
                if (row < kRows - 1) new_row = row + 1;
                break;
              case 1:  // north
                if (row > 0) new_row = row - 1;
                break;
              case 2:  // east
                if (col < kCols - 1 && !wall_right(row, col)) new_col = col + 1;
                break;
              case 3:  // west
                if (col > 0 && !wall_right(row, col - 1)) new_col = col - 1;
                break;
              case 4:  // pickup
                if (pass < 4 && kLocs[pass][0] == row && kLocs[pass][1] == col) {
                  new_pass = 4;
                } else {
                  reward = -10.0;
                }
                break;
              case 5: {  // dropoff
                const int here = landmark_at(row, col);
                if (pass == 4 && here == dest) {
                  new_pass = dest;
                  reward = 20.0;
                  terminal = true;
                } else if (pass == 4 && here >= 0) {
                  new_pass = here;
                } else {
                  reward = -10.0;
                }
                break;
              }
            }
            entries.push_back({1.0, encode(new_row, new_col, new_pass, dest), reward, terminal});
          }
          if (!delivered && pass < 4) initial[state] = 1.0;
        }
      }
    }
  }

  double mass = 0.0;
  for (double p : initial) mass += p;
  for (double& p : initial) p /= mass;  // uniform over the 300 valid starts
  return TabularMdp(kNumStates, kNumActions, std::move(model), std::move(initial), 0.99);
}

// 4x4 slippery FrozenLake: 16 states, 4 actions (left, down, right, up).
// The agent moves in the intended direction or either perpendicular one with
// probability 1/3 each. Reaching the goal pays 1; holes and the goal are
// terminal; every other reward is 0. Episodes always start at state 0.
inline TabularMdp make_frozenlake() {
  constexpr int kSize = 4;
  constexpr int kNumStates = 16, kNumActions = 4;
  constexpr std::array<const char*, 4> kMap = {"SFFF", "FHFH", "FFFH", "HFFG"};

  const auto cell = [&](int s) { return kMap[s / kSize][s % kSize]; };
  const auto move = [&](int row, int col, int dir) {
    switch (dir) {
      case 0: col = std::max(col - 1, 0); break;          // left
      case 1: row = std::min(row + 1, kSize - 1); break;  // down
      case 2: col = std::min(col + 1, kSize - 1); break;  // right
      case 3: row = std::max(row - 1, 0); break;          // up
    }
    return row * kSize + col;
  };

  std::vector<std::vector<OutcomeEntry>> model(
      static_cast<std::size_t>(kNumStates) * kNumActions);
  for (int s = 0; s < kNumStates; ++s) {
    const bool terminal_here = cell(s) == 'H' || cell(s) == 'G';
    for (int a = 0; a < kNumActions; ++a) {
      auto& entries = model[static_cast<std::size_t>(s) * kNumActions + a];
      if (terminal_here) {
        entries.push_back({1.0, s, 0.0, true});
        continue;
      }
      for (const int dir : {(a + 3) % 4, a, (a + 1) % 4}) {
        const int next = move(s / kSize, s % kSize, dir);
        const char c = cell(next);
        entries.push_back({1.0 / 3.0, next, c == 'G' ? 1.0 : 0.0, c == 'H' || c == 'G'});
      }
    }
  }

  std::vector<double> initial(kNumStates, 0.0);
  initial[0] = 1.0;
  return TabularMdp(kNumStates, kNumActions, std::move(model), std::move(initial), 0.99);
}

// Seeded random MDP: every (s,a) gets `branching` distinct successors with
// probabilities from a normalized positive draw and rewards uniform in [-1,1].
// No terminal states; uniform initial distribution.
inline TabularMdp make_random_mdp(Rng& rng, int num_states, int num_actions, int branching) {
  if (num_states < 1 || num_actions < 1 || branching < 1)
    throw std::invalid_argument("num_states, num_actions, branching must be >= 1");
  if (branching > num_states)
    throw std::invalid_argument("branching cannot exceed num_states");

  std::vector<std::vector<OutcomeEntry>> model(
      static_cast<std::size_t>(num_states) * num_actions);
  std::vector<int> pool(num_states);
  for (auto& entries : model) {
    for (int i = 0; i < num_states; ++i) pool[i] = i;
    // Partial Fisher-Yates draw of `branching` distinct successors.
    for (int i = 0; i < branching; ++i) {
      const std::size_t j = i + rand_index(rng, num_states - i);
      std::swap(pool[i], pool[j]);
    }
    double total = 0.0;
    entries.reserve(branching);
    for (int i = 0; i < branching; ++i) {
      const double weight = rand_range(rng, 0.05, 1.0);
      entries.push_back({weight, pool[i], rand_range(rng, -1.0, 1.0), false});
      total += weight;
    }
    for (OutcomeEntry& e : entries) e.probability /= total;
  }

  std::vector<double> initial(num_states, 1.0 / num_states);
  return TabularMdp(num_states, num_actions, std::move(model), std::move(initial), 0.99);
}

}  // namespace ser
