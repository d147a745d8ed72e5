#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace besc::bdd {

class BddManager;

/// Handle into a BddManager. Handles are canonical: two handles compare
/// equal iff they denote the same Boolean function over the same manager.
class Bdd {
public:
  Bdd() = default;

  bool valid() const { return mgr_ != nullptr; }
  BddManager* manager() const { return mgr_; }
  uint32_t id() const { return node_; }

  bool is_false() const;
  bool is_true() const;

  bool operator==(const Bdd&) const = default;

  Bdd operator&(const Bdd& o) const;
  Bdd operator|(const Bdd& o) const;
  Bdd operator^(const Bdd& o) const;
  Bdd operator-(const Bdd& o) const;  // set difference
  Bdd operator!() const;

private:
  friend class BddManager;
  Bdd(BddManager* m, uint32_t n) : mgr_(m), node_(n) {}

  BddManager* mgr_ = nullptr;
  uint32_t node_ = 0;
};

enum class Op : uint8_t { And = 0, Or, Xor, Diff };

/// Reduced ordered BDD store. Nodes are hash-consed, so structural equality
/// of functions coincides with handle equality. The variable order is the
/// index order fixed at construction; there is no reordering and nodes are
/// never reclaimed.
///
/// A manager and all of its handles belong to one thread of control at a
/// time; independent managers are fully isolated.
class BddManager {
public:
  explicit BddManager(unsigned num_vars);

  BddManager(const BddManager&) = delete;
  BddManager& operator=(const BddManager&) = delete;

  unsigned num_vars() const { return num_vars_; }

  Bdd bdd_true() { return Bdd(this, 1); }
  Bdd bdd_false() { return Bdd(this, 0); }
  Bdd constant(bool b) { return b ? bdd_true() : bdd_false(); }
  Bdd var(unsigned i);
  Bdd nvar(unsigned i);

  Bdd apply(Op op, Bdd a, Bdd b);
  Bdd bdd_not(Bdd a);
  Bdd ite(Bdd f, Bdd g, Bdd h);

  Bdd exists(const std::vector<unsigned>& vars, Bdd a);
  Bdd forall(const std::vector<unsigned>& vars, Bdd a);

  /// Substitutes from[i] by to[i]. The substitution must preserve the
  /// variable order over the argument's support.
  Bdd rename(Bdd a, const std::vector<unsigned>& from,
             const std::vector<unsigned>& to);

  /// Successors of `states` (over cur vars) under `trans` (over cur+nxt),
  /// expressed over cur vars again. `preimage` is the reversed direction.
  Bdd image(Bdd states, Bdd trans, const std::vector<unsigned>& cur,
            const std::vector<unsigned>& nxt);
  Bdd preimage(Bdd states, Bdd trans, const std::vector<unsigned>& cur,
               const std::vector<unsigned>& nxt);

  /// Characteristic function of pairwise equality cur[i] = nxt[i].
  Bdd identity_relation(const std::vector<unsigned>& cur,
                        const std::vector<unsigned>& nxt);

  /// Number of satisfying assignments over the first `over_n_vars` variables;
  /// exact for small counts, correctly rounded double beyond 2^53.
  double sat_count(Bdd a, unsigned over_n_vars);

  /// Fraction of all 2^num_vars assignments satisfying `a`.
  double sat_fraction(Bdd a);

  /// Lexicographically smallest satisfying assignment in variable order,
  /// as a full vector over all variables; don't-care positions are 0.
  std::vector<bool> pick_cube(Bdd a);

  bool is_empty(Bdd a) const { return a.id() == 0; }
  size_t node_count(Bdd a) const;
  size_t total_nodes() const { return nodes_.size(); }

  bool eval(Bdd a, const std::vector<bool>& assignment) const;
  std::vector<unsigned> support(Bdd a) const;

private:
  struct Node {
    uint32_t var;
    uint32_t lo;
    uint32_t hi;
  };

  struct NodeKey {
    uint32_t var;
    uint32_t lo;
    uint32_t hi;
    bool operator==(const NodeKey&) const = default;
  };

  struct NodeKeyHash {
    size_t operator()(const NodeKey& k) const {
      uint64_t h = k.var;
      h = h * 0x9e3779b97f4a7c15ull + k.lo;
      h = h * 0x9e3779b97f4a7c15ull + k.hi;
      h ^= h >> 29;
      return static_cast<size_t>(h * 0xbf58476d1ce4e5b9ull);
    }
  };

  struct CacheEntry {
    uint64_t k1 = ~0ull;
    uint64_t k2 = ~0ull;
    uint32_t result = 0;
  };

  uint32_t make_node(uint32_t var, uint32_t lo, uint32_t hi);
  uint32_t apply_rec(Op op, uint32_t a, uint32_t b);
  uint32_t not_rec(uint32_t a);
  uint32_t ite_rec(uint32_t f, uint32_t g, uint32_t h);
  uint32_t exists_rec(uint32_t a, const std::vector<unsigned>& vars,
                      uint32_t set_id);
  uint32_t rename_rec(uint32_t a, const std::vector<int>& map,
                      uint32_t map_id);
  double fraction_rec(uint32_t a);
  void check_same_manager(const Bdd& a) const;
  Bdd wrap(uint32_t n) { return Bdd(this, n); }

  unsigned num_vars_;
  std::vector<Node> nodes_;
  std::unordered_map<NodeKey, uint32_t, NodeKeyHash> unique_;

  // Lossy direct-mapped operation caches; safe because every operation is a
  // pure function of canonical node ids.
  std::vector<CacheEntry> op_cache_;
  uint64_t cache_mask_;

  std::vector<std::vector<unsigned>> quant_sets_;
  std::vector<std::vector<int>> rename_maps_;
  std::unordered_map<uint32_t, double> fraction_memo_;
};

}  // namespace besc::bdd
