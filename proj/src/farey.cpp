#include "liouville/farey.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

namespace liouville {

namespace {

// Ancestor incenters are never much closer to O than their descendants:
// one tree step moves the incenter by ln 3 while the distance to O can drop
// by at most asinh(1/sqrt(3)) + (ln 3 - ...) < 0.55 net. Keeping a 0.7
// margin therefore stores every ancestor of every member, and pruning at
// +3.0 cannot cut off a subtree that re-enters the radius.
constexpr double kKeepMargin = 0.7;
constexpr double kPruneMargin = 3.0;
constexpr double kOnLeafTol = 1e-9;

long long checked_gcd(long long a, long long b) {
  while (b != 0) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

__int128 cross(const Fraction& a, const Fraction& b) {
  return (__int128)a.p * b.q - (__int128)b.p * a.q;
}

}  // namespace

Fraction::Fraction(long long p_, long long q_) : p(p_), q(q_) {
  if (p == 0 && q == 0) throw std::invalid_argument("fraction 0/0");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  if (q == 0) {
    p = 1;
  } else {
    long long g = checked_gcd(p, q);
    if (g > 1) {
      p /= g;
      q /= g;
    }
  }
}

double Fraction::value() const {
  if (q == 0) return std::numeric_limits<double>::infinity();
  return double(p) / double(q);
}

std::string Fraction::str() const {
  return std::to_string(p) + "/" + std::to_string(q);
}

bool operator==(const Fraction& a, const Fraction& b) {
  return a.p == b.p && a.q == b.q;
}

bool frac_less(const Fraction& a, const Fraction& b) {
  if (b.is_inf()) return !a.is_inf();
  if (a.is_inf()) return false;
  return (__int128)a.p * b.q < (__int128)b.p * a.q;
}

bool frac_ccw(const Fraction& a, const Fraction& b, const Fraction& c) {
  return (frac_less(a, b) && frac_less(b, c)) ||
         (frac_less(b, c) && frac_less(c, a)) ||
         (frac_less(c, a) && frac_less(a, b));
}

bool farey_neighbors(const Fraction& a, const Fraction& b) {
  __int128 x = cross(a, b);
  return x == 1 || x == -1;
}

Fraction parse_fraction(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Fraction(std::stoll(s), 1);
    return Fraction(std::stoll(s.substr(0, slash)),
                    std::stoll(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse fraction: " + s);
  }
}

Leaf::Leaf(Fraction x, Fraction y) {
  if (x == y) throw std::invalid_argument("degenerate leaf " + x.str());
  if (frac_less(x, y)) {
    a = x;
    b = y;
  } else {
    a = y;
    b = x;
  }
}

bool operator==(const Leaf& x, const Leaf& y) { return x.key() == y.key(); }
bool operator<(const Leaf& x, const Leaf& y) { return x.key() < y.key(); }

namespace {

// Closed boundary arc cut off by the side {sa, sb} on the side away from the
// vertex w; membership test is exact.
bool in_closed_far_arc(const Fraction& v, const Fraction& sa,
                       const Fraction& sb, const Fraction& w) {
  Fraction x = sa, y = sb;
  if (frac_ccw(x, w, y)) std::swap(x, y);  // far arc is now x -> y ccw
  return v == x || v == y || frac_ccw(x, v, y);
}

// New vertex of the triangle across the side {a, b} away from vertex w.
Fraction child_vertex(const Fraction& a, const Fraction& b, const Fraction& w) {
  Fraction sum(a.p + b.p, a.q + b.q);
  Fraction diff(a.p - b.p, a.q - b.q);
  if (sum == w) return diff;
  if (diff == w) return sum;
  throw std::logic_error("side " + a.str() + "," + b.str() +
                         " has no neighbor vertex " + w.str());
}

std::array<Fraction, 3> ccw_sorted(Fraction a, Fraction b, Fraction c) {
  std::array<Fraction, 3> v = {a, b, c};
  std::sort(v.begin(), v.end(), frac_less);
  return v;
}

}  // namespace

int leaf_depth(const Leaf& l) {
  std::array<Fraction, 3> cur = {Fraction(0, 1), Fraction(1, 1),
                                 Fraction::inf()};
  for (int depth = 0; depth < 100000; ++depth) {
    for (int k = 0; k < 3; ++k) {
      if (Leaf(cur[k], cur[(k + 1) % 3]) == l) return depth;
    }
    bool descended = false;
    for (int k = 0; k < 3 && !descended; ++k) {
      const Fraction& sa = cur[k];
      const Fraction& sb = cur[(k + 1) % 3];
      const Fraction& w = cur[(k + 2) % 3];
      if (in_closed_far_arc(l.a, sa, sb, w) &&
          in_closed_far_arc(l.b, sa, sb, w)) {
        cur = ccw_sorted(sa, sb, child_vertex(sa, sb, w));
        descended = true;
      }
    }
    if (!descended)
      throw std::domain_error("not a tessellation leaf: " + l.str());
  }
  throw std::domain_error("leaf depth overflow: " + l.str());
}

HPoint incenter(const Fraction& a, const Fraction& b, const Fraction& c) {
  // Integer Moebius matrix sending (0, 1, inf) to (a, b, c); positive
  // determinant exactly when the triple is counterclockwise.
  double X = double((long long)cross(b, a));
  double Y = double((long long)cross(c, b));
  MobiusMap m(c.p * X, a.p * Y, c.q * X, a.q * Y);
  return m(HPoint{0.5, std::sqrt(3.0) / 2.0});
}

FareyArena::FareyArena(const HPoint& O, double radius)
    : O_(O), frame_(O), radius_(radius) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  struct Pending {
    std::array<Fraction, 2> gate;
    Fraction opp;
    int parent;
    int depth;
  };
  const std::array<Fraction, 3> base = {Fraction(0, 1), Fraction(1, 1),
                                        Fraction::inf()};
  std::deque<Pending> queue;
  for (int k = 0; k < 3; ++k) {
    Geodesic side(base[k].boundary(), base[(k + 1) % 3].boundary());
    if (dist_to_geodesic(O_, side).dist < kOnLeafTol)
      throw std::domain_error("base point lies on a lamination leaf");
    queue.push_back(Pending{{base[k], base[(k + 1) % 3]}, base[(k + 2) % 3],
                            -1, 1});
  }
  std::map<std::array<long long, 4>, int> children_of;  // gate leaf -> child id
  while (!queue.empty()) {
    Pending job = queue.front();
    queue.pop_front();

    Fraction nv = child_vertex(job.gate[0], job.gate[1], job.opp);
    TriRecord t;
    t.v = ccw_sorted(job.gate[0], job.gate[1], nv);
    t.parent = job.parent;
    t.depth = job.depth;
    t.facing = -1;
    for (int k = 0; k < 3; ++k) {
      bool match = (t.v[k] == job.gate[0] && t.v[(k + 1) % 3] == job.gate[1]) ||
                   (t.v[k] == job.gate[1] && t.v[(k + 1) % 3] == job.gate[0]);
      if (match) t.facing = k;
    }
    if (t.facing < 0) throw std::logic_error("gate side lost in sort");

    Geodesic raw3(t.v[t.facing].boundary(), t.v[(t.facing + 1) % 3].boundary());
    t.g3 = oriented_with_left(raw3, O_);
    FootResult fr = dist_to_geodesic(O_, t.g3);
    if (fr.dist < kOnLeafTol)
      throw std::domain_error("base point lies on a lamination leaf");
    t.D = fr.dist;
    t.xT = fr.foot;
    Fraction opp3 = t.v[(t.facing + 2) % 3];
    t.yT = boundary_foot(opp3.boundary(), t.g3);
    MobiusMap norm = normalizing_map(t.g3, O_);
    BoundaryPoint w = norm(opp3.boundary());
    t.u = std::log(std::abs(w.value()));
    t.g1 = oriented_with_left(Geodesic(t.v[(t.facing + 1) % 3].boundary(),
                                       t.v[(t.facing + 2) % 3].boundary()),
                              O_);
    t.g2 = oriented_with_left(Geodesic(t.v[(t.facing + 2) % 3].boundary(),
                                       t.v[t.facing].boundary()),
                              O_);
    t.center = incenter(t.v[0], t.v[1], t.v[2]);
    t.center_dist = hyp_dist(O_, t.center);

    int id = -2;
    if (t.center_dist <= radius_ + kKeepMargin) {
      t.id = id = int(tris_.size());
      tris_.push_back(t);
      if (t.parent >= 0) {
        TriRecord& par = tris_[size_t(t.parent)];
        Leaf gate_leaf(job.gate[0], job.gate[1]);
        if (gate_leaf == par.leaf1())
          par.child[0] = id;
        else if (gate_leaf == par.leaf2())
          par.child[1] = id;
        else
          throw std::logic_error("gate is not a far side of the parent");
      }
    }
    if (t.center_dist <= radius_ + kPruneMargin) {
      // far sides: (facing+1, facing+2) and (facing+2, facing)
      int f = t.facing;
      queue.push_back(Pending{{t.v[(f + 1) % 3], t.v[(f + 2) % 3]},
                              t.v[f], id, job.depth + 1});
      queue.push_back(Pending{{t.v[(f + 2) % 3], t.v[f % 3]},
                              t.v[(f + 1) % 3], id, job.depth + 1});
    }
  }
}

std::vector<int> FareyArena::members(double r) const {
  if (r > radius_ + 1e-12)
    throw std::domain_error("requested radius exceeds the arena radius");
  std::vector<int> out;
  for (const TriRecord& t : tris_)
    if (t.center_dist <= r) out.push_back(t.id);
  return out;
}

std::vector<int> FareyArena::spanning_family(double r) const {
  std::vector<int> mem = members(r);
  std::vector<char> is_member(tris_.size(), 0);
  for (int id : mem) is_member[size_t(id)] = 1;
  // A member is maximal iff no stored strict descendant is a member; sweep
  // children in reverse enumeration order (children come after parents).
  std::vector<char> marked_below(tris_.size(), 0);
  for (int id = int(tris_.size()) - 1; id >= 0; --id) {
    const TriRecord& t = tris_[size_t(id)];
    for (int c : t.child) {
      if (c < 0) continue;
      if (is_member[size_t(c)] || marked_below[size_t(c)])
        marked_below[size_t(id)] = 1;
    }
  }
  std::vector<int> out;
  for (int id : mem)
    if (!marked_below[size_t(id)]) out.push_back(id);
  return out;
}

std::vector<int> FareyArena::lower_closure(const std::vector<int>& ids) const {
  std::vector<char> seen(tris_.size(), 0);
  for (int id : ids) {
    int p = tri(id).parent;
    while (p >= 0) {
      if (seen[size_t(p)]) break;
      seen[size_t(p)] = 1;
      p = tris_[size_t(p)].parent;
    }
    if (p == -2)
      throw std::logic_error("ancestor chain leaves the arena");
  }
  std::vector<int> out;
  for (int id = 0; id < int(tris_.size()); ++id)
    if (seen[size_t(id)]) out.push_back(id);
  return out;
}

bool FareyArena::is_ancestor(int a, int b) const {
  if (a == b) return false;
  int p = tri(b).parent;
  while (p >= 0) {
    if (p == a) return true;
    p = tris_[size_t(p)].parent;
  }
  return false;
}

bool FareyArena::separates(int t1, int t2) const {
  if (t1 == t2) return false;
  const TriRecord& s = tri(t1);
  const TriRecord& t = tri(t2);
  for (int far = 0; far < 2; ++far) {
    int k = (s.facing + 1 + far) % 3;
    const Fraction& sa = s.v[k];
    const Fraction& sb = s.v[(k + 1) % 3];
    const Fraction& w = s.v[(k + 2) % 3];
    bool all = true;
    for (const Fraction& v : t.v)
      if (!in_closed_far_arc(v, sa, sb, w)) all = false;
    if (all) return true;
  }
  return false;
}

std::optional<int> FareyArena::find(const std::array<Fraction, 3>& verts) const {
  std::array<Fraction, 3> key = ccw_sorted(verts[0], verts[1], verts[2]);
  for (const TriRecord& t : tris_)
    if (t.v[0] == key[0] && t.v[1] == key[1] && t.v[2] == key[2]) return t.id;
  return std::nullopt;
}

void FareyArena::write_csv(std::ostream& os, double r) const {
  os << "id,v1,v2,v3,depth,D,u,center_dist\n";
  char buf[64];
  for (int id : members(r)) {
    const TriRecord& t = tri(id);
    os << id << ',' << t.v[0].str() << ',' << t.v[1].str() << ','
       << t.v[2].str() << ',' << t.depth;
    std::snprintf(buf, sizeof buf, ",%.12g,%.12g,%.12g", t.D, t.u,
                  t.center_dist);
    os << buf << '\n';
  }
}

}  // namespace liouville
