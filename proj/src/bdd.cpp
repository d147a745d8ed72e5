#include "besc/bdd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace besc::bdd {

namespace {

// Cache tags beyond the four binary ops.
constexpr uint32_t kTagNot = 16;
constexpr uint32_t kTagIte = 17;
constexpr uint32_t kTagExists = 18;
constexpr uint32_t kTagRename = 19;

constexpr size_t kCacheBits = 20;

uint64_t mix(uint64_t k1, uint64_t k2) {
  uint64_t h = k1 * 0x9e3779b97f4a7c15ull ^ k2;
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 29;
  return h;
}

}  // namespace

bool Bdd::is_false() const { return mgr_ != nullptr && node_ == 0; }
bool Bdd::is_true() const { return mgr_ != nullptr && node_ == 1; }

Bdd Bdd::operator&(const Bdd& o) const { return mgr_->apply(Op::And, *this, o); }
Bdd Bdd::operator|(const Bdd& o) const { return mgr_->apply(Op::Or, *this, o); }
Bdd Bdd::operator^(const Bdd& o) const { return mgr_->apply(Op::Xor, *this, o); }
Bdd Bdd::operator-(const Bdd& o) const { return mgr_->apply(Op::Diff, *this, o); }
Bdd Bdd::operator!() const { return mgr_->bdd_not(*this); }

BddManager::BddManager(unsigned num_vars) : num_vars_(num_vars) {
  // Terminals live at ids 0 (false) and 1 (true); their var is the
  // past-the-end sentinel so every real variable orders before them.
  nodes_.push_back({num_vars_, 0, 0});
  nodes_.push_back({num_vars_, 1, 1});
  unique_.reserve(1u << 16);
  op_cache_.resize(size_t{1} << kCacheBits);
  cache_mask_ = (uint64_t{1} << kCacheBits) - 1;
}

void BddManager::check_same_manager(const Bdd& a) const {
  if (a.manager() != this)
    throw std::invalid_argument("operand belongs to a different BDD manager");
}

uint32_t BddManager::make_node(uint32_t var, uint32_t lo, uint32_t hi) {
  if (lo == hi) return lo;
  NodeKey key{var, lo, hi};
  auto [it, inserted] = unique_.try_emplace(key, 0);
  if (!inserted) return it->second;
  uint32_t id = static_cast<uint32_t>(nodes_.size());
  nodes_.push_back({var, lo, hi});
  it->second = id;
  return id;
}

Bdd BddManager::var(unsigned i) {
  if (i >= num_vars_) throw std::out_of_range("BDD variable index out of range");
  return wrap(make_node(i, 0, 1));
}

Bdd BddManager::nvar(unsigned i) {
  if (i >= num_vars_) throw std::out_of_range("BDD variable index out of range");
  return wrap(make_node(i, 1, 0));
}

Bdd BddManager::apply(Op op, Bdd a, Bdd b) {
  check_same_manager(a);
  check_same_manager(b);
  return wrap(apply_rec(op, a.id(), b.id()));
}

Bdd BddManager::bdd_not(Bdd a) {
  check_same_manager(a);
  return wrap(not_rec(a.id()));
}

Bdd BddManager::ite(Bdd f, Bdd g, Bdd h) {
  check_same_manager(f);
  check_same_manager(g);
  check_same_manager(h);
  return wrap(ite_rec(f.id(), g.id(), h.id()));
}

uint32_t BddManager::apply_rec(Op op, uint32_t a, uint32_t b) {
  switch (op) {
    case Op::And:
      if (a == 0 || b == 0) return 0;
      if (a == 1) return b;
      if (b == 1) return a;
      if (a == b) return a;
      if (a > b) std::swap(a, b);
      break;
    case Op::Or:
      if (a == 1 || b == 1) return 1;
      if (a == 0) return b;
      if (b == 0) return a;
      if (a == b) return a;
      if (a > b) std::swap(a, b);
      break;
    case Op::Xor:
      if (a == b) return 0;
      if (a == 0) return b;
      if (b == 0) return a;
      if (a == 1) return not_rec(b);
      if (b == 1) return not_rec(a);
      if (a > b) std::swap(a, b);
      break;
    case Op::Diff:
      if (a == 0 || a == b) return 0;
      if (b == 1) return 0;
      if (b == 0) return a;
      if (a == 1) return not_rec(b);
      break;
  }

  uint64_t k1 = (uint64_t{static_cast<uint32_t>(op)} << 32) | a;
  uint64_t k2 = uint64_t{b} << 32;
  CacheEntry& slot = op_cache_[mix(k1, k2) & cache_mask_];
  if (slot.k1 == k1 && slot.k2 == k2) return slot.result;

  const Node na = nodes_[a];
  const Node nb = nodes_[b];
  uint32_t top = std::min(na.var, nb.var);
  uint32_t a_lo = na.var == top ? na.lo : a;
  uint32_t a_hi = na.var == top ? na.hi : a;
  uint32_t b_lo = nb.var == top ? nb.lo : b;
  uint32_t b_hi = nb.var == top ? nb.hi : b;

  uint32_t lo = apply_rec(op, a_lo, b_lo);
  uint32_t hi = apply_rec(op, a_hi, b_hi);
  uint32_t r = make_node(top, lo, hi);

  slot = {k1, k2, r};
  return r;
}

uint32_t BddManager::not_rec(uint32_t a) {
  if (a <= 1) return a ^ 1u;

  uint64_t k1 = (uint64_t{kTagNot} << 32) | a;
  CacheEntry& slot = op_cache_[mix(k1, 0) & cache_mask_];
  if (slot.k1 == k1 && slot.k2 == 0) return slot.result;

  const Node n = nodes_[a];
  uint32_t r = make_node(n.var, not_rec(n.lo), not_rec(n.hi));
  slot = {k1, 0, r};
  return r;
}

uint32_t BddManager::ite_rec(uint32_t f, uint32_t g, uint32_t h) {
  if (f == 1) return g;
  if (f == 0) return h;
  if (g == h) return g;
  if (g == 1 && h == 0) return f;
  if (g == 0 && h == 1) return not_rec(f);

  uint64_t k1 = (uint64_t{kTagIte} << 32) | f;
  uint64_t k2 = (uint64_t{g} << 32) | h;
  CacheEntry& slot = op_cache_[mix(k1, k2) & cache_mask_];
  if (slot.k1 == k1 && slot.k2 == k2) return slot.result;

  const Node nf = nodes_[f];
  const Node ng = nodes_[g];
  const Node nh = nodes_[h];
  uint32_t top = std::min(nf.var, std::min(ng.var, nh.var));
  uint32_t f_lo = nf.var == top ? nf.lo : f;
  uint32_t f_hi = nf.var == top ? nf.hi : f;
  uint32_t g_lo = ng.var == top ? ng.lo : g;
  uint32_t g_hi = ng.var == top ? ng.hi : g;
  uint32_t h_lo = nh.var == top ? nh.lo : h;
  uint32_t h_hi = nh.var == top ? nh.hi : h;

  uint32_t lo = ite_rec(f_lo, g_lo, h_lo);
  uint32_t hi = ite_rec(f_hi, g_hi, h_hi);
  uint32_t r = make_node(top, lo, hi);

  slot = {k1, k2, r};
  return r;
}

Bdd BddManager::exists(const std::vector<unsigned>& vars, Bdd a) {
  check_same_manager(a);
  if (vars.empty()) return a;
  std::vector<unsigned> sorted = vars;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  uint32_t set_id = 0;
  for (; set_id < quant_sets_.size(); ++set_id) {
    if (quant_sets_[set_id] == sorted) break;
  }
  if (set_id == quant_sets_.size()) quant_sets_.push_back(sorted);
  return wrap(exists_rec(a.id(), quant_sets_[set_id], set_id));
}

Bdd BddManager::forall(const std::vector<unsigned>& vars, Bdd a) {
  return bdd_not(exists(vars, bdd_not(a)));
}

uint32_t BddManager::exists_rec(uint32_t a, const std::vector<unsigned>& vars,
                                uint32_t set_id) {
  if (a <= 1) return a;
  const Node n = nodes_[a];
  auto it = std::lower_bound(vars.begin(), vars.end(), n.var);
  if (it == vars.end()) return a;

  uint64_t k1 = (uint64_t{kTagExists} << 32) | a;
  uint64_t k2 = set_id;
  CacheEntry& slot = op_cache_[mix(k1, k2) & cache_mask_];
  if (slot.k1 == k1 && slot.k2 == k2) return slot.result;

  uint32_t lo = exists_rec(n.lo, vars, set_id);
  uint32_t hi = exists_rec(n.hi, vars, set_id);
  uint32_t r =
      (*it == n.var) ? apply_rec(Op::Or, lo, hi) : make_node(n.var, lo, hi);

  op_cache_[mix(k1, k2) & cache_mask_] = {k1, k2, r};
  return r;
}

Bdd BddManager::rename(Bdd a, const std::vector<unsigned>& from,
                       const std::vector<unsigned>& to) {
  check_same_manager(a);
  if (from.size() != to.size())
    throw std::invalid_argument("rename: variable list length mismatch");
  std::vector<int> map(num_vars_);
  for (unsigned i = 0; i < num_vars_; ++i) map[i] = static_cast<int>(i);
  for (size_t i = 0; i < from.size(); ++i) {
    if (from[i] >= num_vars_ || to[i] >= num_vars_)
      throw std::out_of_range("rename: variable index out of range");
    map[from[i]] = static_cast<int>(to[i]);
  }
  // The recursive rebuild keeps canonicity only when the substitution is
  // order-preserving over the support.
  int prev = -1;
  for (unsigned v : support(a)) {
    if (map[v] <= prev)
      throw std::invalid_argument("rename: substitution breaks variable order");
    prev = map[v];
  }
  uint32_t map_id = 0;
  for (; map_id < rename_maps_.size(); ++map_id) {
    if (rename_maps_[map_id] == map) break;
  }
  if (map_id == rename_maps_.size()) rename_maps_.push_back(map);
  return wrap(rename_rec(a.id(), rename_maps_[map_id], map_id));
}

uint32_t BddManager::rename_rec(uint32_t a, const std::vector<int>& map,
                                uint32_t map_id) {
  if (a <= 1) return a;

  uint64_t k1 = (uint64_t{kTagRename} << 32) | a;
  uint64_t k2 = map_id;
  CacheEntry& slot = op_cache_[mix(k1, k2) & cache_mask_];
  if (slot.k1 == k1 && slot.k2 == k2) return slot.result;

  const Node n = nodes_[a];
  uint32_t lo = rename_rec(n.lo, map, map_id);
  uint32_t hi = rename_rec(n.hi, map, map_id);
  uint32_t r = make_node(static_cast<uint32_t>(map[n.var]), lo, hi);

  op_cache_[mix(k1, k2) & cache_mask_] = {k1, k2, r};
  return r;
}

Bdd BddManager::image(Bdd states, Bdd trans, const std::vector<unsigned>& cur,
                      const std::vector<unsigned>& nxt) {
  check_same_manager(states);
  check_same_manager(trans);
  if (cur.size() != nxt.size())
    throw std::invalid_argument("image: variable list length mismatch");
  Bdd step = exists(cur, apply(Op::And, states, trans));
  return rename(step, nxt, cur);
}

Bdd BddManager::preimage(Bdd states, Bdd trans,
                         const std::vector<unsigned>& cur,
                         const std::vector<unsigned>& nxt) {
  check_same_manager(states);
  check_same_manager(trans);
  if (cur.size() != nxt.size())
    throw std::invalid_argument("preimage: variable list length mismatch");
  Bdd primed = rename(states, cur, nxt);
  return exists(nxt, apply(Op::And, primed, trans));
}

Bdd BddManager::identity_relation(const std::vector<unsigned>& cur,
                                  const std::vector<unsigned>& nxt) {
  if (cur.size() != nxt.size())
    throw std::invalid_argument(
        "identity_relation: variable list length mismatch");
  // Built bottom-up (highest variables first) so intermediates stay linear.
  std::vector<size_t> order(cur.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return std::max(cur[x], nxt[x]) > std::max(cur[y], nxt[y]);
  });
  Bdd acc = bdd_true();
  for (size_t i : order) {
    Bdd eq = bdd_not(apply(Op::Xor, var(cur[i]), var(nxt[i])));
    acc = apply(Op::And, eq, acc);
  }
  return acc;
}

double BddManager::sat_fraction(Bdd a) {
  check_same_manager(a);
  return fraction_rec(a.id());
}

double BddManager::fraction_rec(uint32_t a) {
  if (a == 0) return 0.0;
  if (a == 1) return 1.0;
  auto it = fraction_memo_.find(a);
  if (it != fraction_memo_.end()) return it->second;
  const Node n = nodes_[a];
  double f = 0.5 * (fraction_rec(n.lo) + fraction_rec(n.hi));
  fraction_memo_.emplace(a, f);
  return f;
}

double BddManager::sat_count(Bdd a, unsigned over_n_vars) {
  check_same_manager(a);
  for (unsigned v : support(a)) {
    if (v >= over_n_vars)
      throw std::invalid_argument(
          "sat_count: function depends on a variable outside the universe");
  }
  // The fraction is taken over all manager variables; the ones outside the
  // requested universe are unconstrained and cancel exactly.
  return sat_fraction(a) * std::exp2(static_cast<double>(over_n_vars));
}

std::vector<bool> BddManager::pick_cube(Bdd a) {
  check_same_manager(a);
  if (a.id() == 0)
    throw std::invalid_argument("pick_cube: empty set");
  std::vector<bool> out(num_vars_, false);
  uint32_t n = a.id();
  while (n > 1) {
    const Node& node = nodes_[n];
    if (node.lo != 0) {
      n = node.lo;
    } else {
      out[node.var] = true;
      n = node.hi;
    }
  }
  return out;
}

size_t BddManager::node_count(Bdd a) const {
  std::vector<uint32_t> stack{a.id()};
  std::unordered_map<uint32_t, bool> seen;
  size_t count = 0;
  while (!stack.empty()) {
    uint32_t n = stack.back();
    stack.pop_back();
    if (n <= 1 || seen.count(n)) continue;
    seen[n] = true;
    ++count;
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  return count;
}

bool BddManager::eval(Bdd a, const std::vector<bool>& assignment) const {
  uint32_t n = a.id();
  while (n > 1) {
    const Node& node = nodes_[n];
    n = assignment[node.var] ? node.hi : node.lo;
  }
  return n == 1;
}

std::vector<unsigned> BddManager::support(Bdd a) const {
  std::vector<bool> present(num_vars_, false);
  std::vector<uint32_t> stack{a.id()};
  std::unordered_map<uint32_t, bool> seen;
  while (!stack.empty()) {
    uint32_t n = stack.back();
    stack.pop_back();
    if (n <= 1 || seen.count(n)) continue;
    seen[n] = true;
    present[nodes_[n].var] = true;
    stack.push_back(nodes_[n].lo);
    stack.push_back(nodes_[n].hi);
  }
  std::vector<unsigned> out;
  for (unsigned v = 0; v < num_vars_; ++v) {
    if (present[v]) out.push_back(v);
  }
  return out;
}

}  // namespace besc::bdd
