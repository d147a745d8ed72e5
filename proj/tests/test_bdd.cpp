#include <random>

#include "besc/bdd.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace besc;
using bdd::Bdd;
using bdd::BddManager;
using bdd::Op;

TEST_SUITE("bdd") {

TEST_CASE("literals and constants") {
  BddManager m(1);
  CHECK(m.sat_count(m.var(0), 1) == doctest::Approx(1));
  CHECK((m.var(0) & m.nvar(0)).is_false());
  CHECK((m.var(0) | m.nvar(0)).is_true());
  CHECK_THROWS_AS(m.var(1), std::out_of_range);
}

TEST_CASE("apply matches the truth-table oracle on all 3-variable pairs") {
  BddManager m(3);
  std::vector<Bdd> fns(256);
  for (uint32_t t = 0; t < 256; ++t) fns[t] = test::from_table(m, t, 3);

  for (uint32_t ta = 0; ta < 256; ++ta) {
    // Canonicity: rebuilding a function yields the same handle.
    CHECK(test::from_table(m, ta, 3) == fns[ta]);
    for (uint32_t tb = 0; tb < 256; ++tb) {
      CHECK(test::to_table(m, m.apply(Op::And, fns[ta], fns[tb]), 3) ==
            (ta & tb));
      CHECK(test::to_table(m, m.apply(Op::Or, fns[ta], fns[tb]), 3) ==
            (ta | tb));
      CHECK(test::to_table(m, m.apply(Op::Xor, fns[ta], fns[tb]), 3) ==
            (ta ^ tb));
      CHECK(test::to_table(m, m.apply(Op::Diff, fns[ta], fns[tb]), 3) ==
            (ta & ~tb & 0xffu));
    }
  }
}

TEST_CASE("difference of a set with itself is empty") {
  BddManager m(4);
  Bdd f = (m.var(0) & m.var(2)) | m.nvar(3);
  CHECK(m.apply(Op::Diff, f, f).is_false());
}

TEST_CASE("De Morgan on random 8-variable functions") {
  BddManager m(8);
  std::mt19937_64 rng(3);
  auto random_fn = [&] {
    Bdd f = m.bdd_false();
    for (int cubes = 0; cubes < 6; ++cubes) {
      Bdd cube = m.bdd_true();
      for (unsigned v = 0; v < 8; ++v) {
        switch (rng() % 3) {
          case 0:
            cube = cube & m.var(v);
            break;
          case 1:
            cube = cube & m.nvar(v);
            break;
          default:
            break;
        }
      }
      f = f | cube;
    }
    return f;
  };
  for (int i = 0; i < 50; ++i) {
    Bdd a = random_fn(), b = random_fn();
    CHECK(!(a & b) == ((!a) | (!b)));
    CHECK(!(a | b) == ((!a) & (!b)));
    CHECK(m.ite(a, b, !b) == !(a ^ b));
  }
}

TEST_CASE("quantification") {
  BddManager m(4);
  Bdd x = m.var(0), y = m.var(1);
  CHECK(m.exists({0}, x & y) == y);
  CHECK(m.exists({}, x & y) == (x & y));
  CHECK(m.forall({0}, x | y) == y);
  CHECK(m.forall({0}, x) .is_false());
  CHECK(m.exists({0, 1}, x & y).is_true());
}

TEST_CASE("quantification matches the table oracle") {
  BddManager m(5);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    uint32_t table = static_cast<uint32_t>(rng());
    unsigned v = static_cast<unsigned>(rng() % 5);
    Bdd f = test::from_table(m, table, 5);

    // Erase variable v from the table by or/and of both cofactors.
    uint32_t ex = 0, fa = 0;
    for (uint32_t idx = 0; idx < 32; ++idx) {
      uint32_t lo = idx & ~(1u << v), hi = idx | (1u << v);
      if (test::eval_table(table, lo) || test::eval_table(table, hi))
        ex |= 1u << idx;
      if (test::eval_table(table, lo) && test::eval_table(table, hi))
        fa |= 1u << idx;
    }
    CHECK(test::to_table(m, m.exists({v}, f), 5) == ex);
    CHECK(test::to_table(m, m.forall({v}, f), 5) == fa);
  }
}

TEST_CASE("random expressions over 10 variables agree with direct evaluation") {
  struct Expr {
    int op;  // 0 var, 1 not, 2 and, 3 or, 4 xor
    unsigned var = 0;
    int lhs = -1, rhs = -1;
  };
  std::mt19937_64 rng(37);
  BddManager m(10);
  for (int round = 0; round < 40; ++round) {
    std::vector<Expr> nodes;
    // Grow a random DAG bottom-up; the last node is the root.
    for (int i = 0; i < 24; ++i) {
      Expr e;
      e.op = i < 4 ? 0 : static_cast<int>(rng() % 5);
      if (e.op == 0) {
        e.var = static_cast<unsigned>(rng() % 10);
      } else {
        e.lhs = static_cast<int>(rng() % i);
        e.rhs = static_cast<int>(rng() % i);
      }
      nodes.push_back(e);
    }
    std::vector<Bdd> built;
    for (const Expr& e : nodes) {
      switch (e.op) {
        case 0:
          built.push_back(m.var(e.var));
          break;
        case 1:
          built.push_back(!built[e.lhs]);
          break;
        case 2:
          built.push_back(built[e.lhs] & built[e.rhs]);
          break;
        case 3:
          built.push_back(built[e.lhs] | built[e.rhs]);
          break;
        default:
          built.push_back(built[e.lhs] ^ built[e.rhs]);
          break;
      }
    }
    unsigned count = 0;
    std::vector<bool> a(10, false);
    for (uint32_t idx = 0; idx < 1024; ++idx) {
      for (unsigned v = 0; v < 10; ++v) a[v] = (idx >> v) & 1u;
      std::vector<bool> vals;
      for (const Expr& e : nodes) {
        switch (e.op) {
          case 0:
            vals.push_back(a[e.var]);
            break;
          case 1:
            vals.push_back(!vals[e.lhs]);
            break;
          case 2:
            vals.push_back(vals[e.lhs] && vals[e.rhs]);
            break;
          case 3:
            vals.push_back(vals[e.lhs] || vals[e.rhs]);
            break;
          default:
            vals.push_back(vals[e.lhs] != vals[e.rhs]);
            break;
        }
      }
      CHECK(m.eval(built.back(), a) == vals.back());
      count += vals.back() ? 1 : 0;
    }
    CHECK(m.sat_count(built.back(), 10) == doctest::Approx(count));
  }
}

TEST_CASE("identity relation sizes") {
  BddManager m1(2);
  CHECK(m1.sat_count(m1.identity_relation({0}, {1}), 2) ==
        doctest::Approx(2));
  BddManager m(12);
  std::vector<unsigned> cur{0, 2, 4, 6, 8, 10}, nxt{1, 3, 5, 7, 9, 11};
  CHECK(m.sat_count(m.identity_relation(cur, nxt), 12) ==
        doctest::Approx(64));
  CHECK_THROWS_AS(m.identity_relation({0, 2}, {1}), std::invalid_argument);
}

TEST_CASE("image against explicit edge enumeration") {
  // Random relations over 3 state bits, interleaved current/next order.
  std::mt19937_64 rng(23);
  std::vector<unsigned> cur{0, 2, 4}, nxt{1, 3, 5};
  for (int round = 0; round < 30; ++round) {
    BddManager m(6);
    std::vector<std::pair<unsigned, unsigned>> edges;
    Bdd trans = m.bdd_false();
    for (int e = 0; e < 10; ++e) {
      unsigned from = static_cast<unsigned>(rng() % 8);
      unsigned to = static_cast<unsigned>(rng() % 8);
      edges.push_back({from, to});
      Bdd cube = m.bdd_true();
      for (unsigned b = 0; b < 3; ++b) {
        cube = cube & ((from >> b) & 1u ? m.var(cur[b]) : m.nvar(cur[b]));
        cube = cube & ((to >> b) & 1u ? m.var(nxt[b]) : m.nvar(nxt[b]));
      }
      trans = trans | cube;
    }
    unsigned state = static_cast<unsigned>(rng() % 8);
    Bdd state_cube = m.bdd_true();
    for (unsigned b = 0; b < 3; ++b)
      state_cube = state_cube &
                   ((state >> b) & 1u ? m.var(cur[b]) : m.nvar(cur[b]));

    Bdd img = m.image(state_cube, trans, cur, nxt);
    Bdd pre = m.preimage(state_cube, trans, cur, nxt);
    for (unsigned probe = 0; probe < 8; ++probe) {
      bool want_img = false, want_pre = false;
      for (auto [from, to] : edges) {
        want_img = want_img || (from == state && to == probe);
        want_pre = want_pre || (to == state && from == probe);
      }
      std::vector<bool> a(6, false);
      for (unsigned b = 0; b < 3; ++b) a[cur[b]] = (probe >> b) & 1u;
      CHECK(m.eval(img, a) == want_img);
      CHECK(m.eval(pre, a) == want_pre);
    }
  }
}

TEST_CASE("image of a self-loop is the state itself") {
  BddManager m(2);
  Bdd s = m.var(0);  // current bit set
  Bdd t = m.var(0) & m.var(1);
  CHECK(m.image(s, t, {0}, {1}) == s);
}

TEST_CASE("sat counts") {
  BddManager m(10);
  CHECK(m.sat_count(m.bdd_true(), 10) == doctest::Approx(1024));
  CHECK(m.sat_count(m.bdd_false(), 10) == doctest::Approx(0));
  CHECK_THROWS_AS(m.sat_count(m.var(8), 3), std::invalid_argument);

  BddManager m6(6);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    uint32_t lo = static_cast<uint32_t>(rng());
    uint64_t table = (static_cast<uint64_t>(rng()) << 32) | lo;
    Bdd f = m6.bdd_false();
    unsigned expected = 0;
    for (uint32_t idx = 0; idx < 64; ++idx) {
      if (!((table >> idx) & 1)) continue;
      ++expected;
      Bdd cube = m6.bdd_true();
      for (unsigned v = 0; v < 6; ++v)
        cube = cube & ((idx >> v) & 1u ? m6.var(v) : m6.nvar(v));
      f = f | cube;
    }
    CHECK(m6.sat_count(f, 6) == doctest::Approx(expected));
    CHECK(m6.sat_count(f, 6) + m6.sat_count(!f, 6) == doctest::Approx(64));
  }
}

TEST_CASE("pick_cube returns the lexicographic minimum") {
  BddManager m(3);
  CHECK(m.pick_cube(m.bdd_true()) == std::vector<bool>{false, false, false});
  CHECK(m.pick_cube(m.var(2)) == std::vector<bool>{false, false, true});
  CHECK(m.pick_cube(m.var(0) & m.nvar(2)) ==
        std::vector<bool>{true, false, false});
  CHECK_THROWS_AS(m.pick_cube(m.bdd_false()), std::invalid_argument);

  std::mt19937_64 rng(29);
  for (int i = 0; i < 100; ++i) {
    uint32_t table = static_cast<uint32_t>(rng() % 255) + 1;
    Bdd f = test::from_table(m, table, 3);
    auto cube = m.pick_cube(f);
    // Re-encode the assignment as a table index (bit v = value of var v)
    // and compare against the minimum under string order b0 b1 b2.
    auto rank = [](unsigned idx) {
      return ((idx & 1u) << 2) | (idx & 2u) | ((idx >> 2) & 1u);
    };
    unsigned got = static_cast<unsigned>(cube[0]) |
                   (static_cast<unsigned>(cube[1]) << 1) |
                   (static_cast<unsigned>(cube[2]) << 2);
    unsigned best = 8;
    for (unsigned idx = 0; idx < 8; ++idx) {
      if (test::eval_table(table, idx) && (best == 8 ||
                                           rank(idx) < rank(best)))
        best = idx;
    }
    CHECK(got == best);
    CHECK(m.eval(f, cube));
  }
}

TEST_CASE("hash consing identifies equivalent formulas") {
  BddManager m(6);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    Bdd a = m.bdd_true(), b = m.bdd_true();
    // Build the same random conjunction twice, in different orders.
    std::vector<Bdd> lits;
    for (unsigned v = 0; v < 6; ++v)
      lits.push_back(rng() % 2 ? m.var(v) : m.nvar(v));
    for (unsigned v = 0; v < 6; ++v) a = a & lits[v];
    for (unsigned v = 6; v-- > 0;) b = lits[v] & b;
    CHECK(a == b);
    CHECK(a.id() == b.id());
  }
}

TEST_CASE("node_count and cross-manager guards") {
  BddManager m(4), other(4);
  Bdd f = (m.var(0) & m.var(1)) | m.var(3);
  CHECK(m.node_count(f) >= 3);
  CHECK(m.node_count(m.bdd_true()) == 0);
  CHECK_THROWS_AS(m.apply(Op::And, m.var(0), other.var(0)),
                  std::invalid_argument);
}

TEST_CASE("rename rejects order-breaking substitutions") {
  BddManager m(4);
  Bdd f = m.var(0) & m.var(2);
  CHECK(m.rename(f, {0, 2}, {1, 3}) == (m.var(1) & m.var(3)));
  CHECK_THROWS_AS(m.rename(f, {0, 2}, {3, 1}), std::invalid_argument);
}

}  // TEST_SUITE
