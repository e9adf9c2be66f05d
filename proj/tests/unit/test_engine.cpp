#include <catch_amalgamated.hpp>

#include <algorithm>

#include "ddsim/engine.hpp"
#include "ddsim/rng.hpp"

using namespace ddsim;

TEST_CASE("events at the same instant dispatch in scheduling order") {
  Simulator sim;
  std::vector<int> order;
  for (int i = 0; i < 5; ++i) sim.schedule(at_us(100), Target::kTest, [&order, i] { order.push_back(i); });
  sim.schedule(at_us(50), Target::kTest, [&order] { order.push_back(-1); });
  sim.run_until(at_us(1000));
  CHECK(order == std::vector<int>{-1, 0, 1, 2, 3, 4});
  CHECK(sim.now() == at_us(1000));
}

TEST_CASE("cancelled events never fire") {
  Simulator sim;
  bool fired = false;
  const auto h = sim.schedule(at_us(10), Target::kTest, [&] { fired = true; });
  CHECK(sim.is_pending(h));
  CHECK(sim.cancel(h));
  CHECK_FALSE(sim.cancel(h));
  sim.run_until(at_us(20));
  CHECK_FALSE(fired);
  CHECK(sim.cancelled() == 1);
}

TEST_CASE("scheduling in the past is an error") {
  Simulator sim;
  sim.run_until(at_us(500));
  CHECK_THROWS_AS(sim.schedule(at_us(499), Target::kTest, [] {}), SchedulingError);
  sim.schedule(at_us(600), Target::kTest, [&] { sim.schedule(at_us(10), Target::kTest, [] {}); });
  CHECK_THROWS_AS(sim.run_until(at_us(700)), SchedulingError);
}

TEST_CASE("run_until leaves later events queued") {
  Simulator sim;
  int n = 0;
  sim.schedule(at_us(5), Target::kTest, [&] { ++n; });
  sim.schedule(at_us(15), Target::kTest, [&] { ++n; });
  sim.run_until(at_us(10));
  CHECK(n == 1);
  CHECK(sim.pending() == 1);
  sim.run_until(at_us(15));
  CHECK(n == 2);
}

namespace {

// Random self-scheduling workload; returns the dispatch trace.
std::vector<DispatchRecord> workload(std::uint64_t seed, std::uint64_t* fired, std::uint64_t* cancels) {
  Simulator sim;
  std::vector<DispatchRecord> trace;
  sim.set_trace(&trace);
  Rng rng = make_stream(seed, "engine-test");
  std::vector<EventHandle> handles;
  std::function<void()> spawn = [&] {
    ++*fired;
    const int children = static_cast<int>(rng() % 3);
    for (int i = 0; i < children && sim.scheduled() < 5000; ++i) {
      handles.push_back(sim.schedule_in(us(static_cast<std::int64_t>(rng() % 1000)), Target::kTest, spawn));
    }
    if (!handles.empty() && rng() % 4 == 0) {
      if (sim.cancel(handles[rng() % handles.size()])) ++*cancels;
    }
  };
  for (int i = 0; i < 20; ++i) sim.schedule(at_us(static_cast<std::int64_t>(rng() % 100)), Target::kTest, spawn);
  sim.run_until(at_seconds(10));
  CHECK(sim.scheduled() == sim.dispatched() + sim.cancelled() + sim.pending());
  return trace;
}

}  // namespace

TEST_CASE("dispatch order is reproducible and time never runs backwards") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::uint64_t f1 = 0, c1 = 0, f2 = 0, c2 = 0;
    const auto a = workload(seed, &f1, &c1);
    const auto b = workload(seed, &f2, &c2);
    CHECK(a == b);
    CHECK(f1 == a.size());
    CHECK(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) {
      return x.at < y.at || (x.at == y.at && x.seq < y.seq);
    }));
  }
}
