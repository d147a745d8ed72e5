#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "besc/dsl.hpp"

namespace besc::sim {

/// All initial valuations: unknown variables Unknown, fixed knowns pinned,
/// free knowns expanded over both values.
std::vector<dsl::TriState> initial_states(const dsl::Bes& bes);

/// Variables written with both polarities by the enabled rules, together
/// with the indices of the writing rules.
struct ConflictInfo {
  dsl::TriState state;
  int variable = -1;
  std::vector<size_t> rules;
};

std::optional<ConflictInfo> find_conflict(const dsl::Bes& bes,
                                          const dsl::TriState& s);

/// Successors under synchronous semantics; conflicted variables branch into
/// both values (2^k successors), zero enabled rules yields the state itself.
std::vector<dsl::TriState> sync_successors(const dsl::Bes& bes,
                                           const dsl::TriState& s);

struct RunOutcome {
  enum class Kind { Stable, Recurrence, Conflict };
  Kind kind = Kind::Stable;

  dsl::TriState fixpoint;  // Stable
  size_t steps = 0;        // Stable: transitions taken to reach the fixpoint

  std::vector<dsl::TriState> prefix;  // Recurrence
  std::vector<dsl::TriState> cycle;   // Recurrence: closed, first state revisited

  std::optional<ConflictInfo> conflict;  // Conflict
};

/// Deterministic evolution from one start until a fixpoint (two consecutive
/// identical valuations), a revisited valuation, or a conflicting update.
RunOutcome sync_run(const dsl::Bes& bes, const dsl::TriState& start);

struct ExplicitGraph {
  std::vector<dsl::TriState> states;  // id order = BFS discovery order
  std::vector<std::vector<uint32_t>> successors;
  std::vector<uint32_t> init_ids;
  std::vector<std::vector<uint32_t>> layers;  // layer 0 = initial states
  std::unordered_map<dsl::TriState, uint32_t, dsl::TriStateHash> index;
};

/// BFS over all reachable valuations under synchronous semantics. Throws
/// std::runtime_error when the state count exceeds `max_states`.
ExplicitGraph explicit_reach(const dsl::Bes& bes,
                             size_t max_states = 2'000'000);

struct OracleVerdicts {
  bool consistent = true;
  std::optional<ConflictInfo> first_conflict;  // earliest BFS layer, smallest state
  std::optional<bool> stable;                  // defined only when consistent
};

OracleVerdicts oracle_check(const dsl::Bes& bes, const ExplicitGraph& g);

enum class Granularity { Rule, Assignment };

struct InterleaveStep {
  std::optional<size_t> rule;  // absent when no rule was enabled
  dsl::TriState state;
};

/// One successor per enabled rule (whole assignment list applied atomically)
/// or, under Assignment granularity, one per enabled-rule assignment.
std::vector<InterleaveStep> interleave_successors(
    const dsl::Bes& bes, const dsl::TriState& s,
    Granularity granularity = Granularity::Rule);

struct FairnessConstraint {
  // Strong fairness for one rule: if its guard holds infinitely often
  // (the constraint's trigger set) the rule must be executed infinitely
  // often (its execution steps).
  size_t rule = 0;
};

struct FairStabilityResult {
  bool stable = false;
  std::vector<FairnessConstraint> fairness;       // constraints accumulated
  std::vector<dsl::TriState> witness_cycle;       // closes; set when !stable
  std::vector<dsl::TriState> unconstrained_cycle; // first cycle found with no
                                                  // fairness constraints
  size_t iterations = 0;
};

/// Iterative strong-fairness refinement over the interleaving graph:
/// search for a reachable non-stabilizing cycle, add fairness constraints
/// for rules the cycle starves, and repeat until either no fair cycle
/// remains (stable) or a cycle starving nothing is found (unstable).
FairStabilityResult fair_stability_check(
    const dsl::Bes& bes, Granularity granularity = Granularity::Rule,
    size_t max_states = 2'000'000);

}  // namespace besc::sim
