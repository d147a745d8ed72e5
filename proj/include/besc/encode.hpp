#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "besc/bdd.hpp"
#include "besc/dsl.hpp"

namespace besc::encode {

/// Decision-bit slots of one declared variable. Known variables use a single
/// value bit. Unknown variables use two bits encoding False=00, True=01,
/// Unknown=10; the pair 11 is invalid. Current and next copies interleave in
/// the manager order (cur, nxt, cur, nxt, ...).
struct VarBits {
  bool is_unknown = false;
  unsigned cur0 = 0, nxt0 = 0;  // known value bit / unknown flag bit
  unsigned cur1 = 0, nxt1 = 0;  // unknown value bit (unknown-kind only)
};

/// Symbolic transition system for a BES under synchronous semantics:
/// initial states, transition relation, labelled atoms, and the per-variable
/// conflict sets used for consistency checking.
struct SymbolicTS {
  dsl::Bes bes;
  std::shared_ptr<bdd::BddManager> mgr;

  std::vector<VarBits> bits;
  unsigned num_state_bits = 0;
  std::vector<unsigned> cur_vars, nxt_vars;

  bdd::Bdd init;
  bdd::Bdd trans;
  bdd::Bdd valid;       // states with no invalid unknown-pair encoding
  bdd::Bdd valid_next;  // same over the next-state copy

  // Per declared variable; atom_unknown holds only for unknown-kind.
  std::vector<bdd::Bdd> atom_true_v, atom_false_v, atom_unknown_v;
  std::vector<bdd::Bdd> conflict;  // rules would write v both ways
  bdd::Bdd conflict_any;

  // "name_true" / "name_false" / "name_unknown" -> labelled state set.
  std::map<std::string, bdd::Bdd> atoms;

  bdd::Bdd image(bdd::Bdd states) const;
  bdd::Bdd preimage(bdd::Bdd states) const;

  /// Minterm of one valuation over the current-state variables.
  bdd::Bdd state_cube(const dsl::TriState& s) const;
  bool contains(bdd::Bdd set, const dsl::TriState& s) const;

  /// Deterministic representative: lexicographically smallest member in
  /// bit order (per variable False < True < Unknown, declaration order).
  dsl::TriState pick_state(bdd::Bdd set) const;
  dsl::TriState assignment_to_state(const std::vector<bool>& a) const;

  /// Number of valuations in a set over current-state variables.
  double count_states(bdd::Bdd set) const;
};

SymbolicTS build_ts(const dsl::Bes& bes);

/// States where the guard evaluates to True under the three-valued reading,
/// computed dual-rail over the (true-set, false-set) pair.
bdd::Bdd guard_true_set(const SymbolicTS& ts, const dsl::Guard& g);

/// Looks up a labelled proposition; throws std::out_of_range for names
/// outside the declared B_/D_/K_ family.
bdd::Bdd atom(const SymbolicTS& ts, const std::string& name);

}  // namespace besc::encode
