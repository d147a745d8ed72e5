#include "besc/sim.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace besc::sim {

using dsl::Bes;
using dsl::Tri;
using dsl::TriState;

std::vector<TriState> initial_states(const Bes& bes) {
  std::vector<size_t> free_knowns;
  TriState base;
  base.values.resize(bes.decls.size(), Tri::Unknown);
  for (size_t v = 0; v < bes.decls.size(); ++v) {
    const auto& d = bes.decls[v];
    if (d.kind == dsl::VarKind::Unknown) continue;
    if (d.init) {
      base.values[v] = *d.init ? Tri::True : Tri::False;
    } else {
      base.values[v] = Tri::False;
      free_knowns.push_back(v);
    }
  }
  std::vector<TriState> out;
  out.reserve(size_t{1} << free_knowns.size());
  for (size_t mask = 0; mask < (size_t{1} << free_knowns.size()); ++mask) {
    TriState s = base;
    for (size_t i = 0; i < free_knowns.size(); ++i) {
      if (mask & (size_t{1} << i)) s.values[free_knowns[i]] = Tri::True;
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

enum class Write : uint8_t { None = 0, Pos = 1, Neg = 2, Both = 3 };

// Per-variable write pattern of a set of enabled rules.
std::vector<Write> write_pattern(const Bes& bes,
                                 const std::vector<size_t>& enabled) {
  std::vector<Write> w(bes.decls.size(), Write::None);
  for (size_t r : enabled) {
    for (const auto& a : bes.rules[r].assignments) {
      auto& slot = w[static_cast<size_t>(a.var)];
      slot = static_cast<Write>(static_cast<uint8_t>(slot) |
                                (a.value ? 1 : 2));
    }
  }
  return w;
}

TriState apply_rule(const Bes& bes, const TriState& s, size_t rule) {
  TriState t = s;
  for (const auto& a : bes.rules[rule].assignments)
    t.values[static_cast<size_t>(a.var)] = a.value ? Tri::True : Tri::False;
  return t;
}

}  // namespace

std::optional<ConflictInfo> find_conflict(const Bes& bes, const TriState& s) {
  auto enabled = dsl::enabled_rules(s, bes);
  auto w = write_pattern(bes, enabled);
  for (size_t v = 0; v < w.size(); ++v) {
    if (w[v] != Write::Both) continue;
    ConflictInfo info;
    info.state = s;
    info.variable = static_cast<int>(v);
    for (size_t r : enabled) {
      for (const auto& a : bes.rules[r].assignments) {
        if (static_cast<size_t>(a.var) == v) info.rules.push_back(r);
      }
    }
    return info;
  }
  return std::nullopt;
}

std::vector<TriState> sync_successors(const Bes& bes, const TriState& s) {
  auto enabled = dsl::enabled_rules(s, bes);
  auto w = write_pattern(bes, enabled);

  TriState base = s;
  std::vector<size_t> conflicted;
  for (size_t v = 0; v < w.size(); ++v) {
    switch (w[v]) {
      case Write::Pos:
        base.values[v] = Tri::True;
        break;
      case Write::Neg:
        base.values[v] = Tri::False;
        break;
      case Write::Both:
        conflicted.push_back(v);
        break;
      case Write::None:
        break;
    }
  }

  std::vector<TriState> out;
  out.reserve(size_t{1} << conflicted.size());
  for (size_t mask = 0; mask < (size_t{1} << conflicted.size()); ++mask) {
    TriState t = base;
    for (size_t i = 0; i < conflicted.size(); ++i)
      t.values[conflicted[i]] =
          (mask & (size_t{1} << i)) ? Tri::True : Tri::False;
    out.push_back(std::move(t));
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunOutcome sync_run(const Bes& bes, const TriState& start) {
  std::vector<TriState> path{start};
  std::unordered_map<TriState, size_t, dsl::TriStateHash> seen;
  seen.emplace(start, 0);

  for (;;) {
    const TriState& cur = path.back();
    if (auto conflict = find_conflict(bes, cur)) {
      RunOutcome out;
      out.kind = RunOutcome::Kind::Conflict;
      out.conflict = std::move(conflict);
      return out;
    }
    TriState next = sync_successors(bes, cur).front();
    if (next == cur) {
      RunOutcome out;
      out.kind = RunOutcome::Kind::Stable;
      out.fixpoint = cur;
      out.steps = path.size() - 1;
      return out;
    }
    auto it = seen.find(next);
    if (it != seen.end()) {
      RunOutcome out;
      out.kind = RunOutcome::Kind::Recurrence;
      out.prefix.assign(path.begin(),
                        path.begin() + static_cast<ptrdiff_t>(it->second));
      out.cycle.assign(path.begin() + static_cast<ptrdiff_t>(it->second),
                       path.end());
      return out;
    }
    seen.emplace(next, path.size());
    path.push_back(std::move(next));
  }
}

ExplicitGraph explicit_reach(const Bes& bes, size_t max_states) {
  ExplicitGraph g;
  auto add_state = [&](const TriState& s) -> uint32_t {
    auto it = g.index.find(s);
    if (it != g.index.end()) return it->second;
    if (g.states.size() >= max_states)
      throw std::runtime_error("explicit state space exceeds the bound of " +
                               std::to_string(max_states) + " states");
    uint32_t id = static_cast<uint32_t>(g.states.size());
    g.states.push_back(s);
    g.successors.emplace_back();
    g.index.emplace(s, id);
    return id;
  };

  for (const TriState& s : initial_states(bes))
    g.init_ids.push_back(add_state(s));
  g.layers.push_back(g.init_ids);

  std::vector<uint32_t> frontier = g.init_ids;
  while (!frontier.empty()) {
    std::vector<uint32_t> next_layer;
    for (uint32_t id : frontier) {
      for (const TriState& t : sync_successors(bes, g.states[id])) {
        size_t before = g.states.size();
        uint32_t tid = add_state(t);
        g.successors[id].push_back(tid);
        if (g.states.size() > before) next_layer.push_back(tid);
      }
    }
    if (!next_layer.empty()) g.layers.push_back(next_layer);
    frontier = std::move(next_layer);
  }
  return g;
}

OracleVerdicts oracle_check(const Bes& bes, const ExplicitGraph& g) {
  OracleVerdicts out;

  for (const auto& layer : g.layers) {
    std::optional<ConflictInfo> best;
    for (uint32_t id : layer) {
      if (auto c = find_conflict(bes, g.states[id])) {
        if (!best || c->state < best->state) best = std::move(c);
      }
    }
    if (best) {
      out.consistent = false;
      out.first_conflict = std::move(best);
      break;
    }
  }
  if (!out.consistent) return out;

  // Stability: every initial state can (hence, deterministically, will)
  // reach a valuation whose only successor is itself.
  std::vector<std::vector<uint32_t>> preds(g.states.size());
  for (uint32_t id = 0; id < g.states.size(); ++id) {
    for (uint32_t t : g.successors[id]) preds[t].push_back(id);
  }
  std::vector<bool> can_stabilize(g.states.size(), false);
  std::deque<uint32_t> queue;
  for (uint32_t id = 0; id < g.states.size(); ++id) {
    if (g.successors[id].size() == 1 && g.successors[id][0] == id) {
      can_stabilize[id] = true;
      queue.push_back(id);
    }
  }
  while (!queue.empty()) {
    uint32_t id = queue.front();
    queue.pop_front();
    for (uint32_t p : preds[id]) {
      if (!can_stabilize[p]) {
        can_stabilize[p] = true;
        queue.push_back(p);
      }
    }
  }
  bool stable = true;
  for (uint32_t id : g.init_ids) stable = stable && can_stabilize[id];
  out.stable = stable;
  return out;
}

std::vector<InterleaveStep> interleave_successors(const Bes& bes,
                                                  const TriState& s,
                                                  Granularity granularity) {
  std::vector<InterleaveStep> out;
  for (size_t r : dsl::enabled_rules(s, bes)) {
    if (granularity == Granularity::Rule) {
      out.push_back({r, apply_rule(bes, s, r)});
    } else {
      for (const auto& a : bes.rules[r].assignments) {
        TriState t = s;
        t.values[static_cast<size_t>(a.var)] =
            a.value ? Tri::True : Tri::False;
        out.push_back({r, std::move(t)});
      }
    }
  }
  if (out.empty()) out.push_back({std::nullopt, s});
  return out;
}

namespace {

struct InterleaveGraph {
  std::vector<TriState> states;
  // Edge (rule, target); rule -1 marks the no-enabled-rule self step.
  std::vector<std::vector<std::pair<int, uint32_t>>> edges;
  std::vector<uint32_t> init_ids;
};

InterleaveGraph build_interleave_graph(const Bes& bes,
                                       Granularity granularity,
                                       size_t max_states) {
  InterleaveGraph g;
  std::unordered_map<TriState, uint32_t, dsl::TriStateHash> index;
  auto add_state = [&](const TriState& s) -> uint32_t {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    if (g.states.size() >= max_states)
      throw std::runtime_error("explicit state space exceeds the bound of " +
                               std::to_string(max_states) + " states");
    uint32_t id = static_cast<uint32_t>(g.states.size());
    g.states.push_back(s);
    g.edges.emplace_back();
    index.emplace(s, id);
    return id;
  };

  for (const TriState& s : initial_states(bes))
    g.init_ids.push_back(add_state(s));

  std::deque<uint32_t> queue(g.init_ids.begin(), g.init_ids.end());
  while (!queue.empty()) {
    uint32_t id = queue.front();
    queue.pop_front();
    for (const auto& step :
         interleave_successors(bes, g.states[id], granularity)) {
      size_t before = g.states.size();
      uint32_t tid = add_state(step.state);
      g.edges[id].push_back(
          {step.rule ? static_cast<int>(*step.rule) : -1, tid});
      if (g.states.size() > before) queue.push_back(tid);
    }
  }
  return g;
}

// Iterative Tarjan; returns components in a deterministic order.
std::vector<std::vector<uint32_t>> strongly_connected(
    const InterleaveGraph& g) {
  size_t n = g.states.size();
  std::vector<uint32_t> idx(n, UINT32_MAX), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<uint32_t> stack;
  std::vector<std::vector<uint32_t>> sccs;
  uint32_t counter = 0;

  struct Frame {
    uint32_t node;
    size_t edge;
  };
  for (uint32_t root = 0; root < n; ++root) {
    if (idx[root] != UINT32_MAX) continue;
    std::vector<Frame> frames{{root, 0}};
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.edge < g.edges[f.node].size()) {
        uint32_t t = g.edges[f.node][f.edge++].second;
        if (idx[t] == UINT32_MAX) {
          idx[t] = low[t] = counter++;
          stack.push_back(t);
          on_stack[t] = true;
          frames.push_back({t, 0});
        } else if (on_stack[t]) {
          low[f.node] = std::min(low[f.node], idx[t]);
        }
      } else {
        uint32_t node = f.node;
        frames.pop_back();
        if (!frames.empty())
          low[frames.back().node] = std::min(low[frames.back().node],
                                             low[node]);
        if (low[node] == idx[node]) {
          std::vector<uint32_t> comp;
          for (;;) {
            uint32_t m = stack.back();
            stack.pop_back();
            on_stack[m] = false;
            comp.push_back(m);
            if (m == node) break;
          }
          sccs.push_back(std::move(comp));
        }
      }
    }
  }
  return sccs;
}

using RuleMask = uint64_t;
constexpr size_t kMaxFairnessRules = 48;

struct FairSearch {
  const Bes& bes;
  const InterleaveGraph& g;
  std::vector<std::vector<size_t>> enabled;  // per state

  explicit FairSearch(const Bes& b, const InterleaveGraph& graph)
      : bes(b), g(graph) {
    enabled.resize(g.states.size());
    for (uint32_t id = 0; id < g.states.size(); ++id)
      enabled[id] = dsl::enabled_rules(g.states[id], bes);
  }

  RuleMask mask_of(const std::vector<size_t>& rules,
                   const std::vector<size_t>& fair) const {
    RuleMask m = 0;
    for (size_t r : rules) {
      auto it = std::find(fair.begin(), fair.end(), r);
      if (it != fair.end())
        m |= RuleMask{1} << static_cast<size_t>(it - fair.begin());
    }
    return m;
  }

  // Rules of the fairness set executed by self-edges of s; taking such an
  // edge does not change the visited state set, so a loop through s can
  // always absorb them.
  RuleMask self_exec(uint32_t s, const std::vector<size_t>& fair) const {
    RuleMask m = 0;
    for (const auto& [rule, target] : g.edges[s]) {
      if (rule < 0 || target != s) continue;
      auto it = std::find(fair.begin(), fair.end(), static_cast<size_t>(rule));
      if (it != fair.end())
        m |= RuleMask{1} << static_cast<size_t>(it - fair.begin());
    }
    return m;
  }
};

// Deterministic cycle inside one SCC: walk from the smallest state along the
// smallest-rule non-self edge that stays inside the component.
std::vector<uint32_t> walk_cycle(const FairSearch& fs,
                                 const std::vector<uint32_t>& scc) {
  std::vector<bool> in_scc;
  for (uint32_t id : scc) {
    if (in_scc.size() <= id) in_scc.resize(id + 1, false);
    in_scc[id] = true;
  }
  uint32_t start = *std::min_element(
      scc.begin(), scc.end(), [&](uint32_t a, uint32_t b) {
        return fs.g.states[a] < fs.g.states[b];
      });
  std::vector<uint32_t> path;
  std::unordered_map<uint32_t, size_t> pos;
  uint32_t cur = start;
  for (;;) {
    auto it = pos.find(cur);
    if (it != pos.end())
      return {path.begin() + static_cast<ptrdiff_t>(it->second), path.end()};
    pos.emplace(cur, path.size());
    path.push_back(cur);
    const std::pair<int, uint32_t>* best = nullptr;
    for (const auto& e : fs.g.edges[cur]) {
      if (e.second == cur || e.second >= in_scc.size() || !in_scc[e.second])
        continue;
      if (!best || e.first < best->first ||
          (e.first == best->first &&
           fs.g.states[e.second] < fs.g.states[best->second]))
        best = &e;
    }
    if (!best) throw std::logic_error("non-trivial SCC without internal edge");
    cur = best->second;
  }
}

// Rules enabled at some cycle state but executed on none of its steps.
// A rule whose edge is a self-loop at a cycle state counts as executed:
// the loop absorbs it without changing its states.
std::vector<size_t> starved_rules(const FairSearch& fs,
                                  const std::vector<uint32_t>& cycle) {
  std::vector<bool> enabled_any(fs.bes.rules.size(), false);
  std::vector<bool> executed(fs.bes.rules.size(), false);
  for (size_t i = 0; i < cycle.size(); ++i) {
    uint32_t s = cycle[i];
    uint32_t next = cycle[(i + 1) % cycle.size()];
    for (size_t r : fs.enabled[s]) enabled_any[r] = true;
    for (const auto& [rule, target] : fs.g.edges[s]) {
      if (rule < 0) continue;
      if (target == next || target == s)
        executed[static_cast<size_t>(rule)] = true;
    }
  }
  std::vector<size_t> out;
  for (size_t r = 0; r < enabled_any.size(); ++r) {
    if (enabled_any[r] && !executed[r]) out.push_back(r);
  }
  return out;
}

// Exhaustive fair-cycle search inside one SCC under the current fairness
// set, on the product of states with (executed, enabled) rule masks. Only
// reached when the deterministic walk violates a constraint.
std::optional<std::vector<uint32_t>> product_fair_cycle(
    const FairSearch& fs, const std::vector<uint32_t>& scc,
    const std::vector<size_t>& fair) {
  std::vector<bool> in_scc;
  for (uint32_t id : scc) {
    if (in_scc.size() <= id) in_scc.resize(id + 1, false);
    in_scc[id] = true;
  }
  std::vector<uint32_t> anchors = scc;
  std::sort(anchors.begin(), anchors.end(), [&](uint32_t a, uint32_t b) {
    return fs.g.states[a] < fs.g.states[b];
  });

  for (uint32_t anchor : anchors) {
    struct Key {
      uint32_t node;
      RuleMask exec, enab;
      bool operator==(const Key&) const = default;
    };
    struct KeyHash {
      size_t operator()(const Key& k) const {
        size_t h = k.node;
        h = h * 1099511628211ull ^ k.exec;
        h = h * 1099511628211ull ^ k.enab;
        return h;
      }
    };
    Key start{anchor, fs.self_exec(anchor, fair),
              fs.mask_of(fs.enabled[anchor], fair)};
    std::unordered_map<Key, Key, KeyHash> parent;
    std::deque<Key> queue{start};
    parent.emplace(start, start);
    std::optional<Key> accept;
    while (!queue.empty() && !accept) {
      Key k = queue.front();
      queue.pop_front();
      for (const auto& [rule, target] : fs.g.edges[k.node]) {
        if (target >= in_scc.size() || !in_scc[target]) continue;
        RuleMask exec = k.exec | fs.self_exec(target, fair);
        if (rule >= 0) {
          auto it = std::find(fair.begin(), fair.end(),
                              static_cast<size_t>(rule));
          if (it != fair.end())
            exec |= RuleMask{1} << static_cast<size_t>(it - fair.begin());
        }
        RuleMask enab = k.enab | fs.mask_of(fs.enabled[target], fair);
        Key nk{target, exec, enab};
        if (target == anchor && k.node != anchor && (enab & ~exec) == 0) {
          parent.emplace(nk, k);
          accept = nk;
          break;
        }
        if (parent.emplace(nk, k).second) queue.push_back(nk);
        if (parent.size() > 4'000'000)
          throw std::runtime_error("fairness refinement search too large");
      }
    }
    if (!accept) continue;
    std::vector<uint32_t> cycle;
    Key k = *accept;
    while (!(k == start)) {
      cycle.push_back(k.node);
      k = parent.at(k);
    }
    cycle.push_back(start.node);
    std::reverse(cycle.begin(), cycle.end());
    cycle.pop_back();  // drop the repeated anchor at the end
    return cycle;
  }
  return std::nullopt;
}

}  // namespace

FairStabilityResult fair_stability_check(const Bes& bes,
                                         Granularity granularity,
                                         size_t max_states) {
  InterleaveGraph g = build_interleave_graph(bes, granularity, max_states);
  FairSearch fs(bes, g);

  auto sccs = strongly_connected(g);
  std::vector<std::vector<uint32_t>> candidates;
  for (auto& scc : sccs) {
    if (scc.size() >= 2) candidates.push_back(std::move(scc));
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const auto& a, const auto& b) {
              return g.states[*std::min_element(
                         a.begin(), a.end(),
                         [&](uint32_t x, uint32_t y) {
                           return g.states[x] < g.states[y];
                         })] <
                     g.states[*std::min_element(
                         b.begin(), b.end(), [&](uint32_t x, uint32_t y) {
                           return g.states[x] < g.states[y];
                         })];
            });

  FairStabilityResult result;
  std::vector<size_t> fair;

  for (;;) {
    ++result.iterations;
    if (fair.size() > kMaxFairnessRules)
      throw std::runtime_error("fairness set exceeds supported size");

    std::optional<std::vector<uint32_t>> cycle;
    for (const auto& scc : candidates) {
      // Component-level filter: every constrained rule enabled inside the
      // component must be executed by some edge staying inside it.
      bool component_ok = true;
      std::vector<bool> in_scc;
      for (uint32_t id : scc) {
        if (in_scc.size() <= id) in_scc.resize(id + 1, false);
        in_scc[id] = true;
      }
      for (size_t r : fair) {
        bool enabled_here = false, executed_here = false;
        for (uint32_t id : scc) {
          if (std::find(fs.enabled[id].begin(), fs.enabled[id].end(), r) !=
              fs.enabled[id].end())
            enabled_here = true;
          for (const auto& [rule, target] : g.edges[id]) {
            if (rule == static_cast<int>(r) && target < in_scc.size() &&
                in_scc[target])
              executed_here = true;
          }
        }
        if (enabled_here && !executed_here) {
          component_ok = false;
          break;
        }
      }
      if (!component_ok) continue;

      std::vector<uint32_t> c = walk_cycle(fs, scc);
      bool violates = false;
      for (size_t r : starved_rules(fs, c)) {
        if (std::find(fair.begin(), fair.end(), r) != fair.end()) {
          violates = true;
          break;
        }
      }
      if (violates) {
        auto alt = product_fair_cycle(fs, scc, fair);
        if (!alt) continue;
        c = std::move(*alt);
      }
      cycle = std::move(c);
      break;
    }

    if (!cycle) {
      result.stable = true;
      for (size_t r : fair) result.fairness.push_back({r});
      return result;
    }

    std::vector<dsl::TriState> cycle_states;
    for (uint32_t id : *cycle) cycle_states.push_back(g.states[id]);
    if (result.unconstrained_cycle.empty() && fair.empty())
      result.unconstrained_cycle = cycle_states;

    std::vector<size_t> starved = starved_rules(fs, *cycle);
    if (starved.empty()) {
      result.stable = false;
      result.witness_cycle = std::move(cycle_states);
      for (size_t r : fair) result.fairness.push_back({r});
      return result;
    }
    for (size_t r : starved) fair.push_back(r);
  }
}

}  // namespace besc::sim
