#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "liouville/farey.hpp"

using namespace liouville;

namespace {
const HPoint kBase{0.5, std::sqrt(3.0) / 2.0};

Fraction F(long long p, long long q) { return Fraction(p, q); }

// Independent recursive enumeration of the tessellation edges inside [0, 1]:
// below the base side (0/1, 1/1) children split at the mediant.
void scan_edges(const Fraction& a, const Fraction& b, int depth, int max_depth,
                std::map<std::array<long long, 4>, int>& out) {
  out[Leaf(a, b).key()] = depth;
  if (depth == max_depth) return;
  Fraction med(a.p + b.p, a.q + b.q);
  scan_edges(a, med, depth + 1, max_depth, out);
  scan_edges(med, b, depth + 1, max_depth, out);
}
}  // namespace

TEST_CASE("fractions reduce and compare") {
  CHECK(Fraction(2, 4) == Fraction(1, 2));
  CHECK(Fraction(-1, -2) == Fraction(1, 2));
  CHECK(Fraction(1, -2) == Fraction(-1, 2));
  CHECK(Fraction(1, -2).q == 2);
  CHECK(Fraction(5, 0) == Fraction(1, 0));
  CHECK(Fraction(1, 2).str() == "1/2");
  CHECK(Fraction(-3, 1).str() == "-3/1");

  CHECK(frac_less(F(-1, 1), F(0, 1)));
  CHECK(frac_less(F(0, 1), F(1, 2)));
  CHECK(frac_less(F(1, 2), F(1, 0)));
  CHECK(!frac_less(F(1, 0), F(1, 2)));

  // counterclockwise order wraps through infinity
  CHECK(frac_ccw(F(0, 1), F(1, 2), F(1, 1)));
  CHECK(frac_ccw(F(1, 1), F(1, 0), F(-1, 1)));
  CHECK(frac_ccw(F(1, 0), F(-2, 1), F(0, 1)));
  CHECK(!frac_ccw(F(1, 1), F(1, 2), F(1, 0)));
}

TEST_CASE("parse_fraction") {
  CHECK(parse_fraction("3/7") == F(3, 7));
  CHECK(parse_fraction("-2") == F(-2, 1));
  CHECK(parse_fraction("1/0") == F(1, 0));
  CHECK(parse_fraction("4/6") == F(2, 3));
  CHECK_THROWS(parse_fraction("x"));
  CHECK_THROWS(parse_fraction(""));
}

TEST_CASE("farey neighbors") {
  CHECK(farey_neighbors(F(0, 1), F(1, 1)));
  CHECK(farey_neighbors(F(1, 3), F(1, 2)));
  CHECK(farey_neighbors(F(1, 0), F(1, 1)));
  CHECK(farey_neighbors(F(1, 0), F(0, 1)));
  CHECK(!farey_neighbors(F(1, 3), F(2, 3)));
  CHECK(!farey_neighbors(F(0, 1), F(2, 1)));
}

TEST_CASE("leaf canonical form") {
  Leaf l(F(1, 1), F(0, 1));
  CHECK(l.a == F(0, 1));
  CHECK(l.b == F(1, 1));
  CHECK(l.str() == "0/1,1/1");
  CHECK(Leaf(F(0, 1), F(1, 0)).str() == "0/1,1/0");
  CHECK(Leaf(F(1, 2), F(1, 3)) == Leaf(F(1, 3), F(1, 2)));
}

TEST_CASE("leaf depth basics") {
  CHECK(leaf_depth(Leaf(F(0, 1), F(1, 1))) == 0);
  CHECK(leaf_depth(Leaf(F(0, 1), F(1, 0))) == 0);
  CHECK(leaf_depth(Leaf(F(1, 1), F(1, 0))) == 0);
  CHECK(leaf_depth(Leaf(F(0, 1), F(1, 2))) == 1);
  CHECK(leaf_depth(Leaf(F(1, 2), F(1, 1))) == 1);
  CHECK(leaf_depth(Leaf(F(1, 1), F(2, 1))) == 1);
  CHECK(leaf_depth(Leaf(F(-1, 1), F(0, 1))) == 1);
  CHECK(leaf_depth(Leaf(F(1, 3), F(1, 2))) == 2);
  CHECK(leaf_depth(Leaf(F(0, 1), F(1, 3))) == 2);
  CHECK(leaf_depth(Leaf(F(2, 5), F(1, 2))) == 3);
  CHECK_THROWS(leaf_depth(Leaf(F(1, 3), F(2, 3))));  // not an edge
}

TEST_CASE("leaf depth matches an independent mediant recursion") {
  std::map<std::array<long long, 4>, int> expected;
  scan_edges(F(0, 1), F(1, 1), 0, 12, expected);
  int checked = 0;
  for (const auto& [key, depth] : expected) {
    Leaf l(Fraction(key[0], key[1]), Fraction(key[2], key[3]));
    CHECK(leaf_depth(l) == depth);
    ++checked;
  }
  CHECK(checked > 4000);
  // spot checks on the other two base arcs, where mediants need sign care
  CHECK(leaf_depth(Leaf(F(3, 2), F(2, 1))) == 2);
  CHECK(leaf_depth(Leaf(F(-2, 1), F(-1, 1))) == 2);
  CHECK(leaf_depth(Leaf(F(-1, 2), F(0, 1))) == 2);
}

TEST_CASE("incenter closed forms") {
  HPoint c0 = incenter(F(0, 1), F(1, 1), F(1, 0));
  CHECK(c0.x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c0.y == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  HPoint c1 = incenter(F(0, 1), F(1, 2), F(1, 1));
  CHECK(c1.x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c1.y == doctest::Approx(std::sqrt(3.0) / 6.0).epsilon(1e-12));
  // adjacent incenters sit at distance log 3
  CHECK(hyp_dist(c0, c1) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("arena stores the base children first") {
  FareyArena arena(kBase, 3.0);
  // the base triangle itself is implicit; records start at its children
  const TriRecord& first = arena.tri(0);
  CHECK(first.depth == 1);
  CHECK(first.parent == -1);

  std::vector<int> fam = arena.spanning_family(1.2);
  CHECK(fam.size() == 3);
  for (int id : fam) {
    const TriRecord& t = arena.tri(id);
    CHECK(t.depth == 1);
    CHECK(t.parent == -1);
    CHECK(t.center_dist == doctest::Approx(std::log(3.0)).epsilon(1e-9));
    for (int other : fam)
      if (other != id) CHECK(!arena.is_ancestor(id, other));
  }
}

TEST_CASE("first child record geometry") {
  FareyArena arena(kBase, 3.0);
  auto id = arena.find({F(0, 1), F(1, 2), F(1, 1)});
  REQUIRE(id.has_value());
  const TriRecord& t = arena.tri(*id);
  CHECK(t.depth == 1);
  // facing side is (0,1); distance from the base point is half log 3
  CHECK(t.leaf3() == Leaf(F(0, 1), F(1, 1)));
  CHECK(t.D == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-9));
  // by symmetry the feet coincide at the top of the (0,1) semicircle
  CHECK(t.u == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(t.xT.x == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(t.xT.y == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(hyp_dist(t.xT, t.yT) == doctest::Approx(0.0).epsilon(1e-9));
  // sides keep the base point on the left
  for (const Geodesic* g : {&t.g1, &t.g2, &t.g3}) CHECK(is_left_of(*g, kBase));
  // the incenter-foot gap bound that the truncation analysis uses
  CHECK(hyp_dist(t.center, t.xT) <=
        0.5 * std::log(3.0) + 1e-9);
}

TEST_CASE("mirror symmetry of the arena") {
  FareyArena arena(kBase, 4.0);
  // x -> 1 - x maps the tessellation to itself and fixes the base point
  auto a = arena.find({F(0, 1), F(1, 3), F(1, 2)});
  auto b = arena.find({F(1, 2), F(2, 3), F(1, 1)});
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  const TriRecord& ta = arena.tri(*a);
  const TriRecord& tb = arena.tri(*b);
  CHECK(ta.D == doctest::Approx(tb.D).epsilon(1e-9));
  CHECK(ta.u == doctest::Approx(-tb.u).epsilon(1e-9));
  CHECK(ta.center_dist == doctest::Approx(tb.center_dist).epsilon(1e-9));
}

TEST_CASE("members are sorted topologically and within radius") {
  FareyArena arena(kBase, 4.0);
  std::vector<int> m2 = arena.members(2.0);
  std::vector<int> m3 = arena.members(3.0);
  std::vector<int> m4 = arena.members(4.0);
  CHECK(m2.size() > 3);
  CHECK(m2.size() < m3.size());
  CHECK(m3.size() < m4.size());
  for (int id : m4) {
    const TriRecord& t = arena.tri(id);
    CHECK(t.center_dist <= 4.0 + 1e-12);
    if (t.parent >= 0) {
      CHECK(t.parent < id);  // enumeration order is parent-first
      CHECK(arena.is_ancestor(t.parent, id));
    }
  }
}

TEST_CASE("incenter distance vs foot data bound") {
  // d(O, center) is within half log 3 + log 2 of D + |u|
  FareyArena arena(kBase, 4.0);
  double bound = 0.5 * std::log(3.0) + std::log(2.0) + 1e-9;
  for (int id : arena.members(4.0)) {
    const TriRecord& t = arena.tri(id);
    if (t.id == 0) continue;
    CHECK(std::abs(t.center_dist - t.D - std::abs(t.u)) <= bound);
  }
}

TEST_CASE("separation poset on a small arena") {
  FareyArena arena(kBase, 3.0);
  std::vector<int> ids = arena.members(3.0);
  for (int a : ids) {
    CHECK(!arena.is_ancestor(a, a));
    for (int b : ids) {
      if (a == b) continue;
      bool ab = arena.is_ancestor(a, b);
      bool ba = arena.is_ancestor(b, a);
      CHECK(!(ab && ba));
      if (ab) CHECK(arena.tri(a).depth < arena.tri(b).depth);
      if (ab) CHECK(arena.separates(a, b));
      for (int c : ids) {
        if (c == a || c == b) continue;
        if (ab && arena.is_ancestor(b, c)) CHECK(arena.is_ancestor(a, c));
      }
    }
  }
}

TEST_CASE("lower closure is the union of strict ancestor chains") {
  FareyArena arena(kBase, 4.0);
  auto deep = arena.find({F(1, 3), F(2, 5), F(1, 2)});
  REQUIRE(deep.has_value());
  std::vector<int> chain = arena.lower_closure({*deep});
  const TriRecord& t = arena.tri(*deep);
  // strict ancestors down to and including the base triangle
  std::vector<int> walked;
  for (int p = t.parent; p >= 0; p = arena.tri(p).parent) walked.push_back(p);
  CHECK(chain.size() == walked.size());
  for (size_t i = 0; i < chain.size(); ++i)
    CHECK(chain[i] == walked[walked.size() - 1 - i]);

  // closure of several ids deduplicates and stays topological
  std::vector<int> fam = arena.spanning_family(3.0);
  std::vector<int> clo = arena.lower_closure(fam);
  for (size_t i = 1; i < clo.size(); ++i) CHECK(clo[i - 1] < clo[i]);
  for (int c : clo) {
    bool below = false;
    for (int f : fam) below = below || arena.is_ancestor(c, f);
    CHECK(below);
  }
}

TEST_CASE("spanning family is an antichain that covers the members") {
  FareyArena arena(kBase, 3.0);
  std::vector<int> fam = arena.spanning_family(3.0);
  for (int a : fam)
    for (int b : fam)
      if (a != b) CHECK(!arena.is_ancestor(a, b));
  // every member is a family member or an ancestor of one
  std::vector<int> ids = arena.members(3.0);
  for (int id : ids) {
    bool covered = false;
    for (int f : fam)
      covered = covered || f == id || arena.is_ancestor(id, f);
    CHECK(covered);
  }
}

TEST_CASE("find accepts vertex rotations and rejects strangers") {
  FareyArena arena(kBase, 3.0);
  auto a = arena.find({F(0, 1), F(1, 2), F(1, 1)});
  auto b = arena.find({F(1, 2), F(1, 1), F(0, 1)});
  auto c = arena.find({F(1, 1), F(0, 1), F(1, 2)});
  REQUIRE(a.has_value());
  CHECK(a == b);
  CHECK(a == c);
  CHECK(!arena.find({F(0, 1), F(1, 3), F(1, 1)}).has_value());
}

TEST_CASE("csv export has the documented header") {
  FareyArena arena(kBase, 2.0);
  std::ostringstream os;
  arena.write_csv(os, 2.0);
  std::string first = os.str().substr(0, os.str().find('\n'));
  CHECK(first == "id,v1,v2,v3,depth,D,u,center_dist");
  CHECK(os.str().size() > first.size() + 10);
}
