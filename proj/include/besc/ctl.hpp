#pragma once

#include <string>
#include <vector>

#include "besc/encode.hpp"

namespace besc::ctl {

struct CtlFormula {
  enum class Kind {
    True,
    False,
    Atom,
    Not,
    And,
    Or,
    EX,
    EF,
    EG,
    EU,
    AX,
    AG,
    AF,
    AU
  };

  Kind kind = Kind::True;
  std::string atom;                  // Atom only
  std::vector<CtlFormula> children;  // operands; EU/AU hold [left, right]

  bool operator==(const CtlFormula&) const = default;

  static CtlFormula atom_of(std::string name);
  static CtlFormula negation(CtlFormula f);
  static CtlFormula make(Kind k, std::vector<CtlFormula> children);
};

/// Parses the concrete syntax `! & | EX EF EG AX AG AF E[f U g] A[f U g]`
/// with atoms `<var>_true|_false|_unknown`, `true`, `false` and parentheses.
/// Universal operators are normalized away into E-forms. Atoms must resolve
/// against the system's label map.
CtlFormula parse_ctl(const encode::SymbolicTS& ts, const std::string& text);

/// Rewrites AX/AG/AF/AU through the standard dualities.
CtlFormula normalize(const CtlFormula& f);

std::string to_string(const CtlFormula& f);

/// States satisfying `f`, over the given universe (default: all valid
/// states). EX is a preimage; EF/EU are least fixpoints, EG a greatest one.
bdd::Bdd sat(const encode::SymbolicTS& ts, const CtlFormula& f);
bdd::Bdd sat_within(const encode::SymbolicTS& ts, const CtlFormula& f,
                    bdd::Bdd universe);

/// Model check: true iff every initial state satisfies `f`. Evaluation is
/// restricted to the reachable states, which leaves the verdict unchanged
/// because reachability is closed under successors.
bool check(const encode::SymbolicTS& ts, const CtlFormula& f);
bool check_within(const encode::SymbolicTS& ts, const CtlFormula& f,
                  bdd::Bdd reach);

/// First-category consistency: AG of, per variable, not(EX true & EX false).
CtlFormula consistency_formula(const encode::SymbolicTS& ts);

/// Second and third category: AG of, per variable, no value flip in one step.
CtlFormula strict_formula(const encode::SymbolicTS& ts);

/// Stability: AF of, per variable, AG-pinned value (unknown-kind variables
/// include the Unknown disjunct).
CtlFormula stability_formula(const encode::SymbolicTS& ts);

}  // namespace besc::ctl
