#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "besc/bdd.hpp"
#include "besc/ctl.hpp"
#include "besc/dsl.hpp"
#include "besc/encode.hpp"
#include "besc/sim.hpp"

namespace besc::test {

inline std::string fixture_path(const std::string& name) {
  return std::string(BESC_FIXTURE_DIR) + "/" + name;
}

inline dsl::Bes load_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::ostringstream buf;
  buf << in.rdbuf();
  return dsl::parse_bes(buf.str());
}

// The fixed-input variant of the first example, as written in the text.
inline const char* kExample1Fixed =
    "known a = true; unknown b, c; rule a -> !b & c; rule !b -> !c;";

// ---- truth-table oracle -------------------------------------------------

// Assignment index bit v holds the value of variable v.
inline uint32_t eval_table(uint32_t table, uint32_t idx) {
  return (table >> idx) & 1u;
}

inline bdd::Bdd from_table(bdd::BddManager& m, uint32_t table,
                           unsigned nvars) {
  bdd::Bdd acc = m.bdd_false();
  for (uint32_t idx = 0; idx < (1u << nvars); ++idx) {
    if (!eval_table(table, idx)) continue;
    bdd::Bdd cube = m.bdd_true();
    for (unsigned v = 0; v < nvars; ++v)
      cube = cube & ((idx >> v) & 1u ? m.var(v) : m.nvar(v));
    acc = acc | cube;
  }
  return acc;
}

inline uint32_t to_table(bdd::BddManager& m, bdd::Bdd f, unsigned nvars) {
  uint32_t table = 0;
  std::vector<bool> a(m.num_vars(), false);
  for (uint32_t idx = 0; idx < (1u << nvars); ++idx) {
    for (unsigned v = 0; v < nvars; ++v) a[v] = (idx >> v) & 1u;
    if (m.eval(f, a)) table |= 1u << idx;
  }
  return table;
}

// ---- random systems -----------------------------------------------------

inline dsl::Guard random_guard(std::mt19937_64& rng, size_t nvars,
                               int depth) {
  auto pick_var = [&] { return static_cast<int>(rng() % nvars); };
  unsigned roll = static_cast<unsigned>(rng() % 100);
  if (depth <= 0 || roll < 45) {
    return dsl::Guard::lit(pick_var(), rng() % 2 == 0);
  }
  if (roll < 60) {
    return dsl::Guard::negation(random_guard(rng, nvars, depth - 1));
  }
  dsl::Guard a = random_guard(rng, nvars, depth - 1);
  dsl::Guard b = random_guard(rng, nvars, depth - 1);
  return roll < 80 ? dsl::Guard::conj(std::move(a), std::move(b))
                   : dsl::Guard::disj(std::move(a), std::move(b));
}

inline dsl::Bes random_bes(std::mt19937_64& rng, size_t max_vars = 6,
                           size_t max_rules = 10) {
  dsl::Bes bes;
  size_t nvars = 1 + rng() % max_vars;
  for (size_t v = 0; v < nvars; ++v) {
    dsl::VarDecl d;
    d.name = "v" + std::to_string(v);
    if (rng() % 2 == 0) {
      d.kind = dsl::VarKind::Unknown;
    } else {
      d.kind = dsl::VarKind::Known;
      switch (rng() % 3) {
        case 0:
          break;  // free
        case 1:
          d.init = true;
          break;
        default:
          d.init = false;
          break;
      }
    }
    bes.decls.push_back(std::move(d));
  }
  size_t nrules = 1 + rng() % max_rules;
  for (size_t r = 0; r < nrules; ++r) {
    dsl::Rule rule;
    rule.guard = random_guard(rng, nvars, 2);
    size_t targets = 1 + rng() % 2;
    std::vector<int> used;
    for (size_t t = 0; t < targets; ++t) {
      int var = static_cast<int>(rng() % nvars);
      bool fresh = true;
      for (int u : used) fresh = fresh && u != var;
      if (!fresh) continue;
      used.push_back(var);
      rule.assignments.push_back({var, rng() % 2 == 0});
    }
    bes.rules.push_back(std::move(rule));
  }
  return bes;
}

// ---- explicit CTL oracle ------------------------------------------------

// All valid valuations with their synchronous successors; used to evaluate
// CTL semantics independently of any BDD machinery.
struct FullGraph {
  std::vector<dsl::TriState> states;
  std::vector<std::vector<uint32_t>> successors;
  std::vector<uint32_t> init_ids;
  std::unordered_map<dsl::TriState, uint32_t, dsl::TriStateHash> index;
};

inline FullGraph full_graph(const dsl::Bes& bes) {
  FullGraph g;
  std::vector<dsl::TriState> todo;
  dsl::TriState blank;
  blank.values.assign(bes.decls.size(), dsl::Tri::False);
  todo.push_back(blank);
  for (size_t v = 0; v < bes.decls.size(); ++v) {
    std::vector<dsl::TriState> grown;
    bool unknown_kind = bes.decls[v].kind == dsl::VarKind::Unknown;
    for (const auto& s : todo) {
      for (dsl::Tri value :
           {dsl::Tri::False, dsl::Tri::True, dsl::Tri::Unknown}) {
        if (value == dsl::Tri::Unknown && !unknown_kind) continue;
        dsl::TriState t = s;
        t.values[v] = value;
        grown.push_back(std::move(t));
      }
    }
    todo = std::move(grown);
  }
  std::sort(todo.begin(), todo.end());
  for (const auto& s : todo) {
    uint32_t id = static_cast<uint32_t>(g.states.size());
    g.states.push_back(s);
    g.index.emplace(s, id);
  }
  g.successors.resize(g.states.size());
  for (uint32_t id = 0; id < g.states.size(); ++id) {
    for (const auto& t : sim::sync_successors(bes, g.states[id]))
      g.successors[id].push_back(g.index.at(t));
  }
  for (const auto& s : sim::initial_states(bes))
    g.init_ids.push_back(g.index.at(s));
  return g;
}

inline std::vector<bool> ctl_oracle_sat(const FullGraph& g,
                                        const dsl::Bes& bes,
                                        const ctl::CtlFormula& f) {
  using Kind = ctl::CtlFormula::Kind;
  size_t n = g.states.size();

  auto atom_set = [&](const std::string& name) {
    std::vector<bool> out(n, false);
    for (size_t v = 0; v < bes.decls.size(); ++v) {
      const std::string& base = bes.decls[v].name;
      dsl::Tri want;
      if (name == base + "_true")
        want = dsl::Tri::True;
      else if (name == base + "_false")
        want = dsl::Tri::False;
      else if (name == base + "_unknown")
        want = dsl::Tri::Unknown;
      else
        continue;
      for (size_t i = 0; i < n; ++i)
        out[i] = g.states[i].values[v] == want;
      return out;
    }
    throw std::out_of_range("oracle: unknown atom " + name);
  };
  auto all_succ_in = [&](const std::vector<bool>& set, size_t i) {
    for (uint32_t t : g.successors[i]) {
      if (!set[t]) return false;
    }
    return true;
  };
  auto any_succ_in = [&](const std::vector<bool>& set, size_t i) {
    for (uint32_t t : g.successors[i]) {
      if (set[t]) return true;
    }
    return false;
  };

  switch (f.kind) {
    case Kind::True:
      return std::vector<bool>(n, true);
    case Kind::False:
      return std::vector<bool>(n, false);
    case Kind::Atom:
      return atom_set(f.atom);
    case Kind::Not: {
      auto c = ctl_oracle_sat(g, bes, f.children[0]);
      for (size_t i = 0; i < n; ++i) c[i] = !c[i];
      return c;
    }
    case Kind::And: {
      std::vector<bool> acc(n, true);
      for (const auto& child : f.children) {
        auto c = ctl_oracle_sat(g, bes, child);
        for (size_t i = 0; i < n; ++i) acc[i] = acc[i] && c[i];
      }
      return acc;
    }
    case Kind::Or: {
      std::vector<bool> acc(n, false);
      for (const auto& child : f.children) {
        auto c = ctl_oracle_sat(g, bes, child);
        for (size_t i = 0; i < n; ++i) acc[i] = acc[i] || c[i];
      }
      return acc;
    }
    case Kind::EX: {
      auto c = ctl_oracle_sat(g, bes, f.children[0]);
      std::vector<bool> out(n, false);
      for (size_t i = 0; i < n; ++i) out[i] = any_succ_in(c, i);
      return out;
    }
    case Kind::AX: {
      auto c = ctl_oracle_sat(g, bes, f.children[0]);
      std::vector<bool> out(n, false);
      for (size_t i = 0; i < n; ++i) out[i] = all_succ_in(c, i);
      return out;
    }
    case Kind::EF: {
      auto x = ctl_oracle_sat(g, bes, f.children[0]);
      for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < n; ++i) {
          if (!x[i] && any_succ_in(x, i)) {
            x[i] = true;
            changed = true;
          }
        }
      }
      return x;
    }
    case Kind::AF: {
      auto x = ctl_oracle_sat(g, bes, f.children[0]);
      for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < n; ++i) {
          if (!x[i] && all_succ_in(x, i)) {
            x[i] = true;
            changed = true;
          }
        }
      }
      return x;
    }
    case Kind::EG: {
      auto x = ctl_oracle_sat(g, bes, f.children[0]);
      for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < n; ++i) {
          if (x[i] && !any_succ_in(x, i)) {
            x[i] = false;
            changed = true;
          }
        }
      }
      return x;
    }
    case Kind::AG: {
      auto x = ctl_oracle_sat(g, bes, f.children[0]);
      for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < n; ++i) {
          if (x[i] && !all_succ_in(x, i)) {
            x[i] = false;
            changed = true;
          }
        }
      }
      return x;
    }
    case Kind::EU: {
      auto keep = ctl_oracle_sat(g, bes, f.children[0]);
      auto x = ctl_oracle_sat(g, bes, f.children[1]);
      for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < n; ++i) {
          if (!x[i] && keep[i] && any_succ_in(x, i)) {
            x[i] = true;
            changed = true;
          }
        }
      }
      return x;
    }
    case Kind::AU: {
      auto keep = ctl_oracle_sat(g, bes, f.children[0]);
      auto x = ctl_oracle_sat(g, bes, f.children[1]);
      for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < n; ++i) {
          if (!x[i] && keep[i] && all_succ_in(x, i)) {
            x[i] = true;
            changed = true;
          }
        }
      }
      return x;
    }
  }
  throw std::logic_error("oracle: unreachable formula kind");
}

inline bool ctl_oracle_check(const FullGraph& g, const dsl::Bes& bes,
                             const ctl::CtlFormula& f) {
  auto sat = ctl_oracle_sat(g, bes, f);
  for (uint32_t id : g.init_ids) {
    if (!sat[id]) return false;
  }
  return true;
}

}  // namespace besc::test
