#include "besc/engine.hpp"

#include <chrono>
#include <stdexcept>

#include "besc/sim.hpp"

namespace besc::engine {

using bdd::Bdd;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  auto dt = std::chrono::steady_clock::now() - t0;
  return std::chrono::duration<double, std::milli>(dt).count();
}

// Next-state copies of the value atoms, used for flip detection.
Bdd next_true_atom(const encode::SymbolicTS& ts, size_t v) {
  const auto& b = ts.bits[v];
  auto& m = *ts.mgr;
  return b.is_unknown ? m.nvar(b.nxt0) & m.var(b.nxt1) : m.var(b.nxt0);
}

Bdd next_false_atom(const encode::SymbolicTS& ts, size_t v) {
  const auto& b = ts.bits[v];
  auto& m = *ts.mgr;
  return b.is_unknown ? m.nvar(b.nxt0) & m.nvar(b.nxt1) : m.nvar(b.nxt0);
}

// Reachable states with a successor that flips the value of v.
Bdd flip_sources(const encode::SymbolicTS& ts, const Frontiers& frontiers,
                 size_t v) {
  Bdd flip = (ts.atom_true_v[v] & next_false_atom(ts, v)) |
             (ts.atom_false_v[v] & next_true_atom(ts, v));
  Bdd sources = ts.mgr->exists(ts.nxt_vars, ts.trans & flip);
  return sources & frontiers.reach;
}

dsl::TriState unique_successor(const encode::SymbolicTS& ts,
                               const dsl::TriState& s) {
  return ts.pick_state(ts.image(ts.state_cube(s)));
}

Trace strict_flip_trace(const encode::SymbolicTS& ts,
                        const Frontiers& frontiers, size_t v) {
  Bdd sources = flip_sources(ts, frontiers, v);
  size_t k = 0;
  Bdd hit_set = ts.mgr->bdd_false();
  for (; k < frontiers.layers.size(); ++k) {
    hit_set = frontiers.layers[k] & sources;
    if (!hit_set.is_false()) break;
  }
  if (hit_set.is_false())
    throw std::logic_error("flip trace requested for a non-flipping variable");

  Trace trace;
  trace.kind = Trace::Kind::Flip;
  trace.variable = static_cast<int>(v);

  std::vector<dsl::TriState> states{ts.pick_state(hit_set)};
  for (size_t j = k; j > 0; --j) {
    Bdd prev = ts.preimage(ts.state_cube(states.back())) &
               frontiers.layers[j - 1];
    states.push_back(ts.pick_state(prev));
  }
  std::reverse(states.begin(), states.end());

  const dsl::TriState& sk = states.back();
  bool was_true = sk.values[v] == dsl::Tri::True;
  for (size_t r : dsl::enabled_rules(sk, ts.bes)) {
    for (const auto& a : ts.bes.rules[r].assignments) {
      if (static_cast<size_t>(a.var) == v && a.value != was_true)
        trace.rules.push_back(r);
    }
  }

  Bdd flipped = ts.image(ts.state_cube(sk)) &
                (was_true ? ts.atom_false_v[v] : ts.atom_true_v[v]);
  states.push_back(ts.pick_state(flipped));
  trace.states = std::move(states);
  return trace;
}

}  // namespace

std::pair<Frontiers, std::optional<Hit>> reach_frontiers(
    const encode::SymbolicTS& ts, std::optional<bdd::Bdd> abort_on) {
  Frontiers f;
  f.reach = ts.mgr->bdd_false();
  Bdd layer = ts.init;
  std::optional<Hit> hit;
  while (!layer.is_false()) {
    f.layers.push_back(layer);
    f.reach = f.reach | layer;
    if (abort_on) {
      Bdd bad = layer & *abort_on;
      if (!bad.is_false()) {
        hit = Hit{f.layers.size() - 1, bad};
        break;
      }
    }
    layer = ts.image(layer) - f.reach;
  }
  return {std::move(f), std::move(hit)};
}

ConsistencyResult check_consistency(const encode::SymbolicTS& ts) {
  ConsistencyResult res;
  auto [frontiers, hit] = reach_frontiers(ts, ts.conflict_any);
  res.frontiers = std::move(frontiers);
  res.hit = std::move(hit);
  if (res.hit) {
    res.consistent = false;
    res.layer = res.hit->layer;
    for (size_t v = 0; v < ts.bes.decls.size(); ++v) {
      if (!(res.hit->states & ts.conflict[v]).is_false()) {
        res.variable = static_cast<int>(v);
        break;
      }
    }
  }
  return res;
}

StrictResult check_strict(const encode::SymbolicTS& ts,
                          const Frontiers& frontiers) {
  StrictResult res;
  for (size_t v = 0; v < ts.bes.decls.size(); ++v) {
    bool known = ts.bes.decls[v].kind == dsl::VarKind::Known;
    if (known && !res.category2_ok) continue;
    if (!known && !res.category3_ok) continue;
    if (flip_sources(ts, frontiers, v).is_false()) continue;
    if (known) {
      res.category2_ok = false;
      res.cat2_variable = static_cast<int>(v);
    } else {
      res.category3_ok = false;
      res.cat3_variable = static_cast<int>(v);
    }
  }
  return res;
}

StabilityResult check_stability(const encode::SymbolicTS& ts,
                                const Frontiers& frontiers) {
  StabilityResult res;
  auto& m = *ts.mgr;

  Bdd identity = m.identity_relation(ts.cur_vars, ts.nxt_vars);
  Bdd moves = m.exists(ts.nxt_vars, ts.trans & !identity);
  res.self_loop_states = frontiers.reach - moves;

  Bdd y = res.self_loop_states;
  for (;;) {
    Bdd grown = y | (ts.preimage(y) & frontiers.reach);
    if (grown == y) break;
    y = grown;
  }
  res.can_reach_stable = y;
  res.verdict =
      (ts.init - y).is_false() ? Stability::Stable : Stability::Unstable;
  return res;
}

Trace shortest_conflict_trace(const encode::SymbolicTS& ts,
                              const Frontiers& frontiers, const Hit& hit) {
  if (hit.states.is_false())
    throw std::invalid_argument("conflict trace requested with an empty hit");

  std::vector<dsl::TriState> states{ts.pick_state(hit.states)};
  for (size_t j = hit.layer; j > 0; --j) {
    Bdd prev = ts.preimage(ts.state_cube(states.back())) &
               frontiers.layers[j - 1];
    states.push_back(ts.pick_state(prev));
  }
  std::reverse(states.begin(), states.end());

  Trace trace;
  trace.kind = Trace::Kind::Conflict;
  auto info = sim::find_conflict(ts.bes, states.back());
  if (info) {
    trace.variable = info->variable;
    trace.rules = info->rules;
  }
  trace.states = std::move(states);
  return trace;
}

std::vector<Trace> unstable_loops(const encode::SymbolicTS& ts,
                                  const Frontiers& frontiers,
                                  const StabilityResult& stability) {
  std::vector<Trace> out;
  Bdd remaining = frontiers.reach - stability.can_reach_stable;

  while (!remaining.is_false()) {
    // Deterministic successor-following until a state repeats; consistent
    // systems have exactly one successor per reachable state.
    std::vector<dsl::TriState> path;
    std::unordered_map<dsl::TriState, size_t, dsl::TriStateHash> pos;
    dsl::TriState cur = ts.pick_state(remaining);
    size_t cycle_start;
    for (;;) {
      auto it = pos.find(cur);
      if (it != pos.end()) {
        cycle_start = it->second;
        break;
      }
      pos.emplace(cur, path.size());
      path.push_back(cur);
      cur = unique_successor(ts, cur);
    }
    std::vector<dsl::TriState> cycle(
        path.begin() + static_cast<ptrdiff_t>(cycle_start), path.end());

    Bdd cycle_set = ts.mgr->bdd_false();
    for (const auto& s : cycle) cycle_set = cycle_set | ts.state_cube(s);

    size_t entry_layer = 0;
    dsl::TriState entry;
    for (size_t i = 0; i < frontiers.layers.size(); ++i) {
      Bdd meet = frontiers.layers[i] & cycle_set;
      if (!meet.is_false()) {
        entry_layer = i;
        entry = ts.pick_state(meet);
        break;
      }
    }

    size_t offset = 0;
    while (cycle[offset] != entry) ++offset;
    std::rotate(cycle.begin(),
                cycle.begin() + static_cast<ptrdiff_t>(offset), cycle.end());

    std::vector<dsl::TriState> stem{entry};
    for (size_t j = entry_layer; j > 0; --j) {
      Bdd prev = ts.preimage(ts.state_cube(stem.back())) &
                 frontiers.layers[j - 1];
      stem.push_back(ts.pick_state(prev));
    }
    std::reverse(stem.begin(), stem.end());
    stem.pop_back();  // the entry state opens the cycle instead

    Trace trace;
    trace.kind = Trace::Kind::Loop;
    trace.stem_len = stem.size();
    trace.loop_len = cycle.size();
    trace.states = std::move(stem);
    trace.states.insert(trace.states.end(), cycle.begin(), cycle.end());
    out.push_back(std::move(trace));

    // Strip everything that drains into this cycle before picking the next.
    Bdd feeds = cycle_set;
    for (;;) {
      Bdd grown = feeds | (ts.preimage(feeds) & remaining);
      if (grown == feeds) break;
      feeds = grown;
    }
    remaining = remaining - feeds;
  }
  return out;
}

CheckReport full_check(const dsl::Bes& bes, const CheckOptions& options) {
  CheckReport report;
  auto t_total = std::chrono::steady_clock::now();

  auto t0 = std::chrono::steady_clock::now();
  encode::SymbolicTS ts = encode::build_ts(bes);
  report.timings.build_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  ConsistencyResult cons = check_consistency(ts);
  report.timings.consistency_ms = ms_since(t0);

  report.consistent = cons.consistent;
  report.conflict_variable = cons.variable;
  report.conflict_layer = cons.layer;
  report.reachable_count = ts.count_states(cons.frontiers.reach);
  report.frontier_depth = cons.frontiers.depth();

  if (!cons.consistent) {
    report.stable = Stability::NotApplicable;
    if (options.want_traces) {
      t0 = std::chrono::steady_clock::now();
      report.traces.push_back(
          shortest_conflict_trace(ts, cons.frontiers, *cons.hit));
      report.timings.traces_ms = ms_since(t0);
    }
    report.timings.total_ms = ms_since(t_total);
    return report;
  }

  if (options.strict) {
    t0 = std::chrono::steady_clock::now();
    report.strict = check_strict(ts, cons.frontiers);
    report.timings.strict_ms = ms_since(t0);
  }

  t0 = std::chrono::steady_clock::now();
  StabilityResult stab = check_stability(ts, cons.frontiers);
  report.timings.stability_ms = ms_since(t0);
  report.stable = stab.verdict;

  if (options.want_traces) {
    t0 = std::chrono::steady_clock::now();
    if (report.strict && !report.strict->category2_ok)
      report.traces.push_back(strict_flip_trace(
          ts, cons.frontiers,
          static_cast<size_t>(*report.strict->cat2_variable)));
    if (report.strict && !report.strict->category3_ok)
      report.traces.push_back(strict_flip_trace(
          ts, cons.frontiers,
          static_cast<size_t>(*report.strict->cat3_variable)));
    if (stab.verdict == Stability::Unstable) {
      auto loops = unstable_loops(ts, cons.frontiers, stab);
      for (auto& t : loops) report.traces.push_back(std::move(t));
    }
    report.timings.traces_ms = ms_since(t0);
  }

  report.timings.total_ms = ms_since(t_total);
  return report;
}

}  // namespace besc::engine
