#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "liouville/geometry.hpp"

// The Farey tessellation of the half-plane: ideal triangles with rational
// vertices (infinity = 1/0), two vertices joined by an edge exactly when
// |ps - qr| = 1. The complementary triangle containing the base point is
// (0, 1, infinity); every other triangle is reached from it by crossing a
// unique chain of edges, which gives the tree structure and the separation
// partial order used by the deformation series.

namespace liouville {

struct Fraction {
  long long p = 0;
  long long q = 1;  // q >= 0, reduced; infinity is (1, 0)

  Fraction() = default;
  Fraction(long long p_, long long q_);

  static Fraction inf() { return Fraction(1, 0); }
  bool is_inf() const { return q == 0; }
  double value() const;
  std::string str() const;
  BoundaryPoint boundary() const {
    return BoundaryPoint::projective(double(p), double(q));
  }
};

bool operator==(const Fraction& a, const Fraction& b);
bool frac_less(const Fraction& a, const Fraction& b);  // infinity greatest
// Counterclockwise circular order on the boundary (ascending reals, infinity
// closing the loop).
bool frac_ccw(const Fraction& a, const Fraction& b, const Fraction& c);
bool farey_neighbors(const Fraction& a, const Fraction& b);
Fraction parse_fraction(const std::string& s);

// Unordered edge of the tessellation, canonicalized.
struct Leaf {
  Fraction a, b;  // frac_less(a, b)
  Leaf() = default;
  Leaf(Fraction x, Fraction y);
  std::array<long long, 4> key() const { return {a.p, a.q, b.p, b.q}; }
  std::string str() const { return a.str() + "," + b.str(); }
};
bool operator==(const Leaf& x, const Leaf& y);
bool operator<(const Leaf& x, const Leaf& y);

// Tree depth of a leaf: sides of the base triangle have depth 0, and crossing
// into a child triangle raises the depth of its far sides by one.
int leaf_depth(const Leaf& l);

struct TriRecord {
  std::array<Fraction, 3> v;  // counterclockwise
  int id = -1;
  int parent = -1;     // arena id; -1 = base triangle, -2 = outside arena
  int child[2] = {-1, -1};  // across g1, g2 when stored
  int depth = 0;       // number of separating leaves (1 for base children)
  int facing = 0;      // index k such that side (v[k], v[k+1]) faces the base
  Geodesic g1, g2, g3;  // sides oriented with the base point on the left
  double D = 0.0;      // dist(O, g3)
  double u = 0.0;      // signed offset along g3 from the foot of O to the
                       // foot of the opposite vertex (positive towards g3.to)
  HPoint xT, yT;       // the two feet
  HPoint center;       // incenter
  double center_dist = 0.0;  // d(O, center)

  std::array<Fraction, 2> side_pair(int k) const {
    return {v[k % 3], v[(k + 1) % 3]};
  }
  Leaf leaf3() const { return Leaf(v[facing], v[(facing + 1) % 3]); }
  Leaf leaf1() const { return Leaf(v[(facing + 1) % 3], v[(facing + 2) % 3]); }
  Leaf leaf2() const { return Leaf(v[(facing + 2) % 3], v[facing]); }
  std::array<BoundaryPoint, 3> boundary_vertices() const {
    return {v[0].boundary(), v[1].boundary(), v[2].boundary()};
  }
};

// Incenter of the ideal triangle with the given (counterclockwise) vertices.
HPoint incenter(const Fraction& a, const Fraction& b, const Fraction& c);

class FareyArena {
 public:
  // Enumerates every triangle whose incenter lies within `radius` of O, plus
  // a thin margin so ancestor chains of members stay inside the arena.
  // Throws std::domain_error if O sits on a leaf met during enumeration.
  FareyArena(const HPoint& O, double radius);

  const HPoint& base() const { return O_; }
  const Frame& frame() const { return frame_; }
  double radius() const { return radius_; }
  int size() const { return int(tris_.size()); }
  const TriRecord& tri(int id) const { return tris_.at(size_t(id)); }

  // Ids with center_dist <= r, in enumeration (= topological) order.
  std::vector<int> members(double r) const;
  // Maximal members: those without a strictly separated member.
  std::vector<int> spanning_family(double r) const;
  // Strict ancestors of the given ids (excluding the base triangle, which
  // is not stored), deduplicated, in topological order.
  std::vector<int> lower_closure(const std::vector<int>& ids) const;

  bool is_ancestor(int a, int b) const;       // a separates O from b
  bool separates(int t1, int t2) const;       // exact interval containment
  std::optional<int> find(const std::array<Fraction, 3>& verts) const;

  void write_csv(std::ostream& os, double r) const;

 private:
  void push_triangle(const std::array<Fraction, 2>& gate, const Fraction& opp,
                     int parent, int depth);

  HPoint O_;
  Frame frame_;
  double radius_ = 0.0;
  std::vector<TriRecord> tris_;
};

}  // namespace liouville
