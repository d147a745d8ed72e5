#include <random>

#include "besc/chain.hpp"
#include "besc/engine.hpp"
#include "besc/sim.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace besc;
using bdd::Bdd;
using dsl::TriState;

namespace {

std::vector<std::string> strings_of(const std::vector<TriState>& states) {
  std::vector<std::string> out;
  for (const auto& s : states) out.push_back(s.to_string());
  return out;
}

// One layer of the symbolic frontier equals a set of explicit states.
void check_layer(const encode::SymbolicTS& ts, Bdd layer,
                 const sim::ExplicitGraph& g,
                 const std::vector<uint32_t>& ids) {
  CHECK(ts.count_states(layer) == doctest::Approx(ids.size()));
  for (uint32_t id : ids) CHECK(ts.contains(layer, g.states[id]));
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("frontier abort on the racing example") {
  auto ts = encode::build_ts(test::load_fixture("example1.bes"));
  auto [frontiers, hit] = engine::reach_frontiers(ts, ts.conflict_any);
  REQUIRE(hit.has_value());
  CHECK(hit->layer == 1);
  CHECK(ts.count_states(hit->states) == doctest::Approx(1));
  CHECK(ts.pick_state(hit->states).to_string() == "101");
}

TEST_CASE("frontier layers of the settling example") {
  auto ts = encode::build_ts(test::load_fixture("example2.bes"));
  auto [frontiers, hit] = engine::reach_frontiers(ts, std::nullopt);
  CHECK_FALSE(hit.has_value());
  CHECK(frontiers.depth() == 6);
  std::vector<std::string> expected{"1???", "11?1", "0101", "0001",
                                    "0011", "0111", "0100"};
  REQUIRE(frontiers.layers.size() == expected.size());
  for (size_t i = 0; i < expected.size(); ++i) {
    CHECK(ts.count_states(frontiers.layers[i]) == doctest::Approx(1));
    CHECK(ts.pick_state(frontiers.layers[i]).to_string() == expected[i]);
  }
}

TEST_CASE("frontier invariants against breadth-first layers") {
  std::mt19937_64 rng(71);
  std::vector<dsl::Bes> systems{test::load_fixture("example1.bes"),
                                test::load_fixture("example2_free.bes"),
                                test::load_fixture("example3.bes")};
  for (int i = 0; i < 15; ++i) systems.push_back(test::random_bes(rng, 5, 8));

  for (const auto& bes : systems) {
    auto ts = encode::build_ts(bes);
    auto [frontiers, hit] = engine::reach_frontiers(ts, std::nullopt);
    auto g = sim::explicit_reach(bes);

    REQUIRE(frontiers.layers.size() == g.layers.size());
    for (size_t i = 0; i < g.layers.size(); ++i)
      check_layer(ts, frontiers.layers[i], g, g.layers[i]);
    CHECK(ts.count_states(frontiers.reach) ==
          doctest::Approx(g.states.size()));

    // Layers are pairwise disjoint and union to reach.
    Bdd seen = ts.mgr->bdd_false();
    for (const auto& layer : frontiers.layers) {
      CHECK((layer & seen).is_false());
      seen = seen | layer;
    }
    CHECK(seen == frontiers.reach);
  }
}

TEST_CASE("consistency verdicts") {
  auto bad = encode::build_ts(test::load_fixture("example1.bes"));
  auto res = engine::check_consistency(bad);
  CHECK_FALSE(res.consistent);
  CHECK(res.variable == 2);
  CHECK(res.layer == 1);

  auto good = encode::build_ts(test::load_fixture("example2.bes"));
  CHECK(engine::check_consistency(good).consistent);

  auto ring = encode::build_ts(dsl::parse_bes(chain::gen_chain(4, 1)));
  CHECK(engine::check_consistency(ring).consistent);
}

TEST_CASE("strict categories") {
  // The ring flips its known head variable.
  auto ring = encode::build_ts(dsl::parse_bes(chain::gen_chain(4, 0)));
  auto cons = engine::check_consistency(ring);
  REQUIRE(cons.consistent);
  auto strict = engine::check_strict(ring, cons.frontiers);
  CHECK_FALSE(strict.category2_ok);
  CHECK(strict.cat2_variable == 0);

  // With the input free, the settling example overwrites it.
  auto free = encode::build_ts(test::load_fixture("example2_free.bes"));
  auto cons2 = engine::check_consistency(free);
  REQUIRE(cons2.consistent);
  auto strict2 = engine::check_strict(free, cons2.frontiers);
  CHECK_FALSE(strict2.category2_ok);
  CHECK(strict2.cat2_variable == 0);

  // No rule writes a known variable: category 2 holds.
  auto quiet = encode::build_ts(
      dsl::parse_bes("known a = true; unknown b; rule a -> b;"));
  auto cons3 = engine::check_consistency(quiet);
  auto strict3 = engine::check_strict(quiet, cons3.frontiers);
  CHECK(strict3.category2_ok);
  CHECK(strict3.category3_ok);
}

TEST_CASE("category 3 catches re-determined unknowns") {
  // The settling example is consistent only under the relaxed conditions:
  // its run 11?1 -> 0101 -> 0001 rewrites both the known input and the
  // already-determined b.
  auto ts = encode::build_ts(test::load_fixture("example2.bes"));
  auto cons = engine::check_consistency(ts);
  REQUIRE(cons.consistent);
  auto strict = engine::check_strict(ts, cons.frontiers);
  CHECK_FALSE(strict.category2_ok);
  CHECK(strict.cat2_variable == 0);
  CHECK_FALSE(strict.category3_ok);
  CHECK(strict.cat3_variable == 1);
}

TEST_CASE("stability verdicts") {
  auto ex2 = encode::build_ts(test::load_fixture("example2.bes"));
  auto cons = engine::check_consistency(ex2);
  auto stab = engine::check_stability(ex2, cons.frontiers);
  CHECK(stab.verdict == engine::Stability::Stable);
  CHECK(ex2.count_states(stab.self_loop_states) == doctest::Approx(1));
  CHECK(ex2.pick_state(stab.self_loop_states).to_string() == "0100");

  auto free = encode::build_ts(test::load_fixture("example2_free.bes"));
  auto cons_free = engine::check_consistency(free);
  auto stab_free = engine::check_stability(free, cons_free.frontiers);
  CHECK(stab_free.verdict == engine::Stability::Stable);
  CHECK(free.contains(stab_free.self_loop_states,
                      TriState::from_string("0???")));

  auto ring = encode::build_ts(dsl::parse_bes(chain::gen_chain(4, 1)));
  auto cons_ring = engine::check_consistency(ring);
  auto stab_ring = engine::check_stability(ring, cons_ring.frontiers);
  CHECK(stab_ring.verdict == engine::Stability::Unstable);

  auto idle = encode::build_ts(dsl::parse_bes("unknown b; rule b -> b;"));
  auto cons_idle = engine::check_consistency(idle);
  CHECK(engine::check_stability(idle, cons_idle.frontiers).verdict ==
        engine::Stability::Stable);
}

TEST_CASE("identity cuts the transition relation down to stable self-loops") {
  for (const char* name : {"example2.bes", "example2_free.bes"}) {
    dsl::Bes bes = test::load_fixture(name);
    auto ts = encode::build_ts(bes);
    Bdd identity = ts.mgr->identity_relation(ts.cur_vars, ts.nxt_vars);
    Bdd self_loops = ts.mgr->exists(ts.nxt_vars, ts.trans & identity);

    auto g = sim::explicit_reach(bes);
    for (uint32_t id = 0; id < g.states.size(); ++id) {
      bool stable = g.successors[id].size() == 1 &&
                    g.successors[id][0] == id;
      CHECK(ts.contains(self_loops, g.states[id]) == stable);
    }
  }
}

TEST_CASE("shortest conflict trace of the racing example") {
  auto ts = encode::build_ts(test::load_fixture("example1.bes"));
  auto res = engine::check_consistency(ts);
  REQUIRE(res.hit.has_value());
  auto trace = engine::shortest_conflict_trace(ts, res.frontiers, *res.hit);
  CHECK(strings_of(trace.states) == std::vector<std::string>{"1??", "101"});
  CHECK(trace.variable == 2);
  CHECK(trace.rules == std::vector<size_t>{0, 1});
}

TEST_CASE("conflict already initial gives a one-state trace") {
  auto ts = encode::build_ts(
      dsl::parse_bes("known a = true; unknown b; rule a -> b; rule a -> !b;"));
  auto res = engine::check_consistency(ts);
  REQUIRE(res.hit.has_value());
  CHECK(res.hit->layer == 0);
  auto trace = engine::shortest_conflict_trace(ts, res.frontiers, *res.hit);
  CHECK(strings_of(trace.states) == std::vector<std::string>{"1?"});
}

TEST_CASE("conflict traces replay and are minimal") {
  std::mt19937_64 rng(73);
  int seen_inconsistent = 0;
  for (int i = 0; i < 120 && seen_inconsistent < 25; ++i) {
    dsl::Bes bes = test::random_bes(rng);
    auto ts = encode::build_ts(bes);
    auto res = engine::check_consistency(ts);
    if (res.consistent) continue;
    ++seen_inconsistent;
    auto trace = engine::shortest_conflict_trace(ts, res.frontiers, *res.hit);

    // Each step is a real transition and the last state conflicts.
    for (size_t j = 0; j + 1 < trace.states.size(); ++j) {
      auto succ = sim::sync_successors(bes, trace.states[j]);
      CHECK(std::find(succ.begin(), succ.end(), trace.states[j + 1]) !=
            succ.end());
    }
    CHECK(sim::find_conflict(bes, trace.states.back()).has_value());
    CHECK(ts.contains(ts.init, trace.states.front()));

    // Minimality: no conflicting state in any earlier layer.
    for (size_t l = 0; l + 1 < trace.states.size(); ++l)
      CHECK((res.frontiers.layers[l] & ts.conflict_any).is_false());
  }
  CHECK(seen_inconsistent >= 25);
}

TEST_CASE("single unstable loop of the small ring") {
  auto ts = encode::build_ts(dsl::parse_bes(chain::gen_chain(4, 0)));
  auto cons = engine::check_consistency(ts);
  REQUIRE(cons.consistent);
  auto stab = engine::check_stability(ts, cons.frontiers);
  REQUIRE(stab.verdict == engine::Stability::Unstable);

  auto loops = engine::unstable_loops(ts, cons.frontiers, stab);
  REQUIRE(loops.size() == 1);
  CHECK(loops[0].loop_len == 8);
  // Both initial values flow into the same alternating wave.
  CHECK(loops[0].states.size() == loops[0].stem_len + 8);
}

TEST_CASE("no loops in a stable system") {
  auto ts = encode::build_ts(test::load_fixture("example2.bes"));
  auto cons = engine::check_consistency(ts);
  auto stab = engine::check_stability(ts, cons.frontiers);
  CHECK(engine::unstable_loops(ts, cons.frontiers, stab).empty());
}

TEST_CASE("extracted loops validate and are pairwise disjoint") {
  // Two independent 2-rings; their product carries two disjoint cycles
  // (in-phase and out-of-phase waves).
  const char* double_ring =
      "known p0; unknown p1; known q0; unknown q1;"
      "rule p0 -> p1; rule p1 -> !p0; rule !p0 -> !p1; rule !p1 -> p0;"
      "rule q0 -> q1; rule q1 -> !q0; rule !q0 -> !q1; rule !q1 -> q0;";

  std::vector<dsl::Bes> systems{
      dsl::parse_bes(double_ring),
      dsl::parse_bes(chain::gen_chain(2, 0)),
      dsl::parse_bes(chain::gen_chain(3, 0)),
      dsl::parse_bes(chain::gen_chain(4, 1)),
      test::load_fixture("case_study_circular.bes")};
  std::mt19937_64 rng(79);
  for (int i = 0; i < 100; ++i) systems.push_back(test::random_bes(rng, 5, 8));

  int unstable_seen = 0;
  for (size_t n = 0; n < systems.size(); ++n) {
    const auto& bes = systems[n];
    auto ts = encode::build_ts(bes);
    auto res = engine::check_consistency(ts);
    if (!res.consistent) continue;
    auto stab = engine::check_stability(ts, res.frontiers);
    if (stab.verdict != engine::Stability::Unstable) continue;
    ++unstable_seen;

    auto loops = engine::unstable_loops(ts, res.frontiers, stab);
    REQUIRE(!loops.empty());
    if (n == 0) CHECK(loops.size() == 2);  // the double ring
    std::unordered_map<std::string, int> membership;
    for (const auto& loop : loops) {
      REQUIRE(loop.loop_len >= 1);
      REQUIRE(loop.states.size() == loop.stem_len + loop.loop_len);
      // Consecutive states step; the loop closes back to its entry.
      for (size_t j = 0; j + 1 < loop.states.size(); ++j) {
        auto succ = sim::sync_successors(bes, loop.states[j]);
        REQUIRE(succ.size() == 1);
        CHECK(succ[0] == loop.states[j + 1]);
      }
      auto back = sim::sync_successors(bes, loop.states.back());
      REQUIRE(back.size() == 1);
      CHECK(back[0] == loop.states[loop.stem_len]);
      for (size_t j = loop.stem_len; j < loop.states.size(); ++j)
        ++membership[loop.states[j].to_string()];
    }
    for (const auto& [state, count] : membership) CHECK(count == 1);
  }
  CHECK(unstable_seen >= 5);
}

TEST_CASE("full check reports") {
  auto r1 = engine::full_check(test::load_fixture("example1.bes"));
  CHECK_FALSE(r1.consistent);
  CHECK(r1.stable == engine::Stability::NotApplicable);
  REQUIRE(r1.traces.size() == 1);
  CHECK(strings_of(r1.traces[0].states) ==
        std::vector<std::string>{"1??", "101"});

  auto r2 = engine::full_check(test::load_fixture("example2.bes"));
  CHECK(r2.consistent);
  CHECK(r2.stable == engine::Stability::Stable);
  CHECK(r2.reachable_count == doctest::Approx(7));
  CHECK(r2.frontier_depth == 6);
  CHECK(r2.traces.empty());

  engine::CheckOptions strict;
  strict.strict = true;
  auto r3 = engine::full_check(test::load_fixture("case_study.bes"), strict);
  CHECK(r3.consistent);
  REQUIRE(r3.strict.has_value());
  CHECK_FALSE(r3.strict->category2_ok);
  CHECK(r3.strict->category3_ok);
  REQUIRE(!r3.traces.empty());
  CHECK(r3.traces[0].kind == engine::Trace::Kind::Flip);
}

TEST_CASE("recurring runs imply strict inconsistency") {
  std::mt19937_64 rng(83);
  engine::CheckOptions options;
  options.strict = true;
  options.want_traces = false;
  for (int i = 0; i < 60; ++i) {
    dsl::Bes bes = test::random_bes(rng);
    bool recurs = false;
    for (const auto& init : sim::initial_states(bes)) {
      auto run = sim::sync_run(bes, init);
      recurs = recurs || run.kind == sim::RunOutcome::Kind::Recurrence;
    }
    if (!recurs) continue;
    auto report = engine::full_check(bes, options);
    bool strict_inconsistent =
        !report.consistent ||
        (report.strict &&
         !(report.strict->category2_ok && report.strict->category3_ok));
    CHECK(strict_inconsistent);
  }
}

TEST_CASE("chain generator output re-parses to the same system") {
  for (auto [m, k] : {std::pair{2u, 0u}, {4u, 1u}, {8u, 2u}}) {
    std::string text = chain::gen_chain(m, k);
    dsl::Bes bes = dsl::parse_bes(text);
    CHECK(bes.decls.size() == m * (k + 1));
    CHECK(bes.rules.size() == 2 * m * (k + 1));
    CHECK(dsl::parse_bes(dsl::pretty_print(bes)) == bes);
  }
  CHECK_THROWS_AS(chain::gen_chain(1, 0), std::invalid_argument);
}

TEST_CASE("chain bit widths match the variable split") {
  auto ts = encode::build_ts(dsl::parse_bes(chain::gen_chain(32, 1)));
  CHECK(ts.bes.decls.size() == 64);
  CHECK(ts.num_state_bits == 95);
  auto ts10 = encode::build_ts(dsl::parse_bes(chain::gen_chain(32, 10)));
  CHECK(ts10.bes.decls.size() == 352);
  CHECK(ts10.num_state_bits == 383);
}

}  // TEST_SUITE
