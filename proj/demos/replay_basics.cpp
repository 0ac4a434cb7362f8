// Feeds both memories the same skewed transition stream and prints what each
// one actually samples: the uniform memory mirrors how often a pair was
// visited, the stratified memory flattens the draw across distinct pairs.

#include <cstdio>

#include "ser/random.hpp"
#include "ser/replay.hpp"

int main() {
  ser::UniformReplayMemory uniform(1024);
  ser::StratifiedReplayMemory stratified(1024);

  // Pair (0,0) appears 100 times, (1,0) ten times, (2,1) once.
  ser::Rng rng = ser::make_stream(7, 0);
  const auto visit = [&](int state, int action, int count) {
    for (int i = 0; i < count; ++i) {
      const ser::Transition t{state, action, -1.0, (state + 1) % 3, false};
      uniform.insert(t);
      stratified.insert(t);
    }
  };
  visit(0, 0, 100);
  visit(1, 0, 10);
  visit(2, 1, 1);

  const int draws = 100000;
  int uniform_hits[3] = {0, 0, 0};
  int stratified_hits[3] = {0, 0, 0};
  for (int i = 0; i < draws; ++i) {
    uniform_hits[uniform.sample(rng).state]++;
    stratified_hits[stratified.sample(rng).state]++;
  }

  std::printf("pair       stored  uniform freq  stratified freq\n");
  const int stored[3] = {100, 10, 1};
  for (int s = 0; s < 3; ++s)
    std::printf("(%d,%d)  %9d  %12.4f  %15.4f\n", s, s == 2 ? 1 : 0, stored[s],
                static_cast<double>(uniform_hits[s]) / draws,
                static_cast<double>(stratified_hits[s]) / draws);

  const ser::ReplayStats stats = stratified.stats();
  std::printf("\n%zu transitions over %zu keys, redundancy %.3f\n", stats.size,
              stats.num_keys, stats.redundancy_fraction);
  return 0;
}
