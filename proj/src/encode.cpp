#include "besc/encode.hpp"

#include <cmath>
#include <stdexcept>

namespace besc::encode {

using bdd::Bdd;
using bdd::Op;

namespace {

// (true-set, false-set) pair of a guard; the unknown-set is the remainder.
struct Rails {
  Bdd t;
  Bdd f;
};

Rails guard_rails(const SymbolicTS& ts, const dsl::Guard& g) {
  auto& m = *ts.mgr;
  switch (g.kind) {
    case dsl::Guard::Kind::Lit: {
      size_t v = static_cast<size_t>(g.var);
      Rails r{ts.atom_true_v[v], ts.atom_false_v[v]};
      if (!g.positive) std::swap(r.t, r.f);
      return r;
    }
    case dsl::Guard::Kind::Not: {
      Rails r = guard_rails(ts, g.children[0]);
      std::swap(r.t, r.f);
      return r;
    }
    case dsl::Guard::Kind::And: {
      Rails acc{m.bdd_true(), m.bdd_false()};
      for (const auto& c : g.children) {
        Rails r = guard_rails(ts, c);
        acc.t = m.apply(Op::And, acc.t, r.t);
        acc.f = m.apply(Op::Or, acc.f, r.f);
      }
      return acc;
    }
    case dsl::Guard::Kind::Or: {
      Rails acc{m.bdd_false(), m.bdd_true()};
      for (const auto& c : g.children) {
        Rails r = guard_rails(ts, c);
        acc.t = m.apply(Op::Or, acc.t, r.t);
        acc.f = m.apply(Op::And, acc.f, r.f);
      }
      return acc;
    }
  }
  throw std::logic_error("unreachable guard kind");
}

}  // namespace

Bdd SymbolicTS::image(Bdd states) const {
  return mgr->image(states, trans, cur_vars, nxt_vars);
}

Bdd SymbolicTS::preimage(Bdd states) const {
  return mgr->preimage(states, trans, cur_vars, nxt_vars);
}

Bdd SymbolicTS::state_cube(const dsl::TriState& s) const {
  if (s.values.size() != bes.decls.size())
    throw std::invalid_argument("state arity does not match the system");
  Bdd acc = mgr->bdd_true();
  for (size_t v = bes.decls.size(); v-- > 0;) {
    const VarBits& b = bits[v];
    dsl::Tri value = s.values[v];
    if (!b.is_unknown) {
      if (value == dsl::Tri::Unknown)
        throw std::invalid_argument("known variable valued Unknown");
      acc = (value == dsl::Tri::True ? mgr->var(b.cur0) : mgr->nvar(b.cur0)) &
            acc;
    } else {
      switch (value) {
        case dsl::Tri::False:
          acc = mgr->nvar(b.cur0) & mgr->nvar(b.cur1) & acc;
          break;
        case dsl::Tri::True:
          acc = mgr->nvar(b.cur0) & mgr->var(b.cur1) & acc;
          break;
        case dsl::Tri::Unknown:
          acc = mgr->var(b.cur0) & mgr->nvar(b.cur1) & acc;
          break;
      }
    }
  }
  return acc;
}

bool SymbolicTS::contains(Bdd set, const dsl::TriState& s) const {
  std::vector<bool> a(mgr->num_vars(), false);
  for (size_t v = 0; v < bes.decls.size(); ++v) {
    const VarBits& b = bits[v];
    if (!b.is_unknown) {
      a[b.cur0] = s.values[v] == dsl::Tri::True;
    } else {
      a[b.cur0] = s.values[v] == dsl::Tri::Unknown;
      a[b.cur1] = s.values[v] == dsl::Tri::True;
    }
  }
  return mgr->eval(set, a);
}

dsl::TriState SymbolicTS::pick_state(Bdd set) const {
  return assignment_to_state(mgr->pick_cube(set));
}

dsl::TriState SymbolicTS::assignment_to_state(
    const std::vector<bool>& a) const {
  dsl::TriState s;
  s.values.reserve(bes.decls.size());
  for (size_t v = 0; v < bes.decls.size(); ++v) {
    const VarBits& b = bits[v];
    if (!b.is_unknown) {
      s.values.push_back(a[b.cur0] ? dsl::Tri::True : dsl::Tri::False);
    } else if (!a[b.cur0]) {
      s.values.push_back(a[b.cur1] ? dsl::Tri::True : dsl::Tri::False);
    } else if (!a[b.cur1]) {
      s.values.push_back(dsl::Tri::Unknown);
    } else {
      throw std::logic_error("assignment uses the invalid 11 encoding");
    }
  }
  return s;
}

double SymbolicTS::count_states(Bdd set) const {
  for (unsigned v : mgr->support(set)) {
    if (v % 2 != 0)
      throw std::invalid_argument(
          "count_states: set depends on next-state variables");
  }
  // Next-state variables are unconstrained, so the fraction collapses onto
  // the current-state universe exactly.
  return mgr->sat_fraction(set) * std::exp2(static_cast<double>(num_state_bits));
}

SymbolicTS build_ts(const dsl::Bes& bes) {
  SymbolicTS ts;
  ts.bes = bes;

  // Bit layout: state bits in declaration order, each with its next copy
  // immediately after it in the manager order.
  unsigned nbits = 0;
  ts.bits.resize(bes.decls.size());
  for (size_t v = 0; v < bes.decls.size(); ++v) {
    VarBits& b = ts.bits[v];
    b.is_unknown = bes.decls[v].kind == dsl::VarKind::Unknown;
    b.cur0 = 2 * nbits;
    b.nxt0 = 2 * nbits + 1;
    ++nbits;
    if (b.is_unknown) {
      b.cur1 = 2 * nbits;
      b.nxt1 = 2 * nbits + 1;
      ++nbits;
    }
  }
  ts.num_state_bits = nbits;
  ts.mgr = std::make_shared<bdd::BddManager>(2 * nbits);
  auto& m = *ts.mgr;

  ts.cur_vars.reserve(nbits);
  ts.nxt_vars.reserve(nbits);
  for (unsigned i = 0; i < nbits; ++i) {
    ts.cur_vars.push_back(2 * i);
    ts.nxt_vars.push_back(2 * i + 1);
  }

  ts.valid = m.bdd_true();
  ts.valid_next = m.bdd_true();
  for (size_t v = bes.decls.size(); v-- > 0;) {
    const VarBits& b = ts.bits[v];
    if (!b.is_unknown) continue;
    ts.valid = (m.nvar(b.cur0) | m.nvar(b.cur1)) & ts.valid;
    ts.valid_next = (m.nvar(b.nxt0) | m.nvar(b.nxt1)) & ts.valid_next;
  }

  ts.atom_true_v.resize(bes.decls.size());
  ts.atom_false_v.resize(bes.decls.size());
  ts.atom_unknown_v.resize(bes.decls.size());
  for (size_t v = 0; v < bes.decls.size(); ++v) {
    const VarBits& b = ts.bits[v];
    const std::string& name = bes.decls[v].name;
    if (!b.is_unknown) {
      ts.atom_true_v[v] = m.var(b.cur0) & ts.valid;
      ts.atom_false_v[v] = m.nvar(b.cur0) & ts.valid;
    } else {
      ts.atom_true_v[v] = m.nvar(b.cur0) & m.var(b.cur1) & ts.valid;
      ts.atom_false_v[v] = m.nvar(b.cur0) & m.nvar(b.cur1) & ts.valid;
      ts.atom_unknown_v[v] = m.var(b.cur0) & m.nvar(b.cur1) & ts.valid;
      ts.atoms[name + "_unknown"] = ts.atom_unknown_v[v];
    }
    ts.atoms[name + "_true"] = ts.atom_true_v[v];
    ts.atoms[name + "_false"] = ts.atom_false_v[v];
  }

  // One true-set per rule; the same set feeds every assignment of the rule.
  std::vector<Bdd> rule_true(bes.rules.size());
  for (size_t r = 0; r < bes.rules.size(); ++r)
    rule_true[r] = guard_true_set(ts, bes.rules[r].guard);

  std::vector<Bdd> pos(bes.decls.size(), m.bdd_false());
  std::vector<Bdd> neg(bes.decls.size(), m.bdd_false());
  for (size_t r = 0; r < bes.rules.size(); ++r) {
    for (const auto& a : bes.rules[r].assignments) {
      size_t v = static_cast<size_t>(a.var);
      Bdd& target = a.value ? pos[v] : neg[v];
      target = target | rule_true[r];
    }
  }

  ts.conflict.resize(bes.decls.size());
  ts.conflict_any = m.bdd_false();
  for (size_t v = 0; v < bes.decls.size(); ++v) {
    ts.conflict[v] = pos[v] & neg[v] & ts.valid;
    ts.conflict_any = ts.conflict_any | ts.conflict[v];
  }

  // Synchronous step per variable: forced value where exactly one side
  // fires, both branches on a conflict, frame condition otherwise.
  Bdd trans = ts.valid_next;
  for (size_t v = bes.decls.size(); v-- > 0;) {
    const VarBits& b = ts.bits[v];
    Bdd next_true = b.is_unknown ? m.nvar(b.nxt0) & m.var(b.nxt1)
                                 : m.var(b.nxt0);
    Bdd next_false = b.is_unknown ? m.nvar(b.nxt0) & m.nvar(b.nxt1)
                                  : m.nvar(b.nxt0);
    Bdd same = !(m.var(b.cur0) ^ m.var(b.nxt0));
    if (b.is_unknown) same = same & !(m.var(b.cur1) ^ m.var(b.nxt1));

    Bdd pos_only = pos[v] - neg[v];
    Bdd neg_only = neg[v] - pos[v];
    Bdd both = pos[v] & neg[v];
    Bdd neither = !(pos[v] | neg[v]);

    Bdd step = (pos_only & next_true) | (neg_only & next_false) |
               (both & (next_true | next_false)) | (neither & same);
    trans = step & trans;
  }
  ts.trans = trans & ts.valid;

  Bdd init = m.bdd_true();
  for (size_t v = bes.decls.size(); v-- > 0;) {
    const VarBits& b = ts.bits[v];
    const dsl::VarDecl& d = bes.decls[v];
    if (b.is_unknown) {
      init = m.var(b.cur0) & m.nvar(b.cur1) & init;
    } else if (d.init) {
      init = (*d.init ? m.var(b.cur0) : m.nvar(b.cur0)) & init;
    }
  }
  ts.init = init & ts.valid;

  return ts;
}

Bdd guard_true_set(const SymbolicTS& ts, const dsl::Guard& g) {
  return guard_rails(ts, g).t & ts.valid;
}

Bdd atom(const SymbolicTS& ts, const std::string& name) {
  auto it = ts.atoms.find(name);
  if (it == ts.atoms.end())
    throw std::out_of_range("unknown atomic proposition '" + name + "'");
  return it->second;
}

}  // namespace besc::encode
