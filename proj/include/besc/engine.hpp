#pragma once

#include <optional>
#include <vector>

#include "besc/encode.hpp"

namespace besc::engine {

/// Breadth-first frontier layers of symbolic reachability. Layer 0 is the
/// initial set; layers are pairwise disjoint and their union is `reach`.
struct Frontiers {
  std::vector<bdd::Bdd> layers;
  bdd::Bdd reach;

  size_t depth() const { return layers.empty() ? 0 : layers.size() - 1; }
};

struct Hit {
  size_t layer = 0;
  bdd::Bdd states;
};

/// Layered state-space generation. When `abort_on` is given and a frontier
/// intersects it, generation stops at that layer and the intersection is
/// reported; the returned layers then cover depths 0..hit.layer only.
std::pair<Frontiers, std::optional<Hit>> reach_frontiers(
    const encode::SymbolicTS& ts, std::optional<bdd::Bdd> abort_on);

struct ConsistencyResult {
  bool consistent = true;
  std::optional<int> variable;   // first conflicted variable, decl order
  std::optional<size_t> layer;   // frontier depth of the first conflict
  Frontiers frontiers;           // complete iff consistent
  std::optional<Hit> hit;
};

/// First-category check: no reachable state enables two rules writing one
/// variable with opposite values. Runs on the fly and aborts at the first
/// bad frontier.
ConsistencyResult check_consistency(const encode::SymbolicTS& ts);

struct StrictResult {
  bool category2_ok = true;  // known variables never flip
  bool category3_ok = true;  // determined unknown variables never flip
  std::optional<int> cat2_variable;
  std::optional<int> cat3_variable;
};

/// Second- and third-category checks over the reachable states.
StrictResult check_strict(const encode::SymbolicTS& ts,
                          const Frontiers& frontiers);

enum class Stability { Stable, Unstable, NotApplicable };

struct StabilityResult {
  Stability verdict = Stability::NotApplicable;
  bdd::Bdd self_loop_states;   // reachable states whose only successor is self
  bdd::Bdd can_reach_stable;   // backward fixpoint from the above
};

/// Reachability-based stability: self-loop-only states, backward closure,
/// initial-set containment. Valid only for consistent systems.
StabilityResult check_stability(const encode::SymbolicTS& ts,
                                const Frontiers& frontiers);

struct Trace {
  enum class Kind { Conflict, Flip, Loop };
  Kind kind = Kind::Conflict;
  std::vector<dsl::TriState> states;

  // Conflict: the variable written both ways and the enabled rules writing
  // it; the last state is the conflicting one. Flip (strict violations):
  // the flipped variable, the rules writing the opposite value, and the
  // flipped state appended after the flip source.
  int variable = -1;
  std::vector<size_t> rules;

  // Loop: states[0..stem_len) lead into the cycle, the remaining loop_len
  // states repeat forever.
  size_t stem_len = 0;
  size_t loop_len = 0;
};

/// Minimal-length run from an initial state into the aborting set, rebuilt
/// backwards through the stored frontiers with the reversed relation.
Trace shortest_conflict_trace(const encode::SymbolicTS& ts,
                              const Frontiers& frontiers, const Hit& hit);

/// All unstable cycles with shortest stems. The system must be consistent;
/// the transition relation is then deterministic on reachable states and
/// cycles are extracted by successor-following.
std::vector<Trace> unstable_loops(const encode::SymbolicTS& ts,
                                  const Frontiers& frontiers,
                                  const StabilityResult& stability);

struct Timings {
  double build_ms = 0;
  double consistency_ms = 0;
  double strict_ms = 0;
  double stability_ms = 0;
  double traces_ms = 0;
  double total_ms = 0;
};

struct CheckOptions {
  bool strict = false;
  bool want_traces = true;
};

struct CheckReport {
  bool consistent = true;
  std::optional<int> conflict_variable;
  std::optional<size_t> conflict_layer;
  std::optional<StrictResult> strict;
  Stability stable = Stability::NotApplicable;
  double reachable_count = 0;
  size_t frontier_depth = 0;
  std::vector<Trace> traces;
  Timings timings;
};

/// Builds the transition system, checks consistency with early abort, then
/// stability (and the strict categories when requested) on consistent
/// systems; collects counts, traces and per-phase timings.
CheckReport full_check(const dsl::Bes& bes, const CheckOptions& options = {});

}  // namespace besc::engine
