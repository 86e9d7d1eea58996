#include "liouville/earthquake.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace liouville {

namespace {

bool in_ccw_closed(const Fraction& v, const Fraction& x, const Fraction& y) {
  return v == x || v == y || frac_ccw(x, v, y);
}

// far arc of the later piece inside (or equal to) far arc of the earlier one
bool arc_contains(const Fraction& of, const Fraction& ot, const Fraction& if_,
                  const Fraction& it) {
  return in_ccw_closed(if_, of, ot) && in_ccw_closed(it, of, ot);
}

bool arc_equal(const Fraction& af, const Fraction& at, const Fraction& bf,
               const Fraction& bt) {
  return af == bf && at == bt;
}

}  // namespace

EarthquakeMap EarthquakeMap::from_piece_specs(
    const HPoint& O, const std::vector<PieceSpec>& specs, bool build_forest_) {
  EarthquakeMap E;
  E.O_ = O;
  for (const PieceSpec& s : specs) {
    if (s.amount == 0.0) continue;
    Piece p;
    p.g = s.g;
    p.amount = s.amount;
    p.trans = translation_along(s.g, s.amount);
    p.o_sign = side_value(s.g, O);
    if (std::abs(p.o_sign) < 1e-14)
      throw std::domain_error("base point lies on a factor support");
    p.o_sign = p.o_sign > 0 ? 1.0 : -1.0;
    if (s.leaf) {
      p.has_leaf = true;
      // match the canonical leaf endpoints to the oriented geodesic
      if (approx_equal(s.leaf->a.boundary(), s.g.from, 1e-9)) {
        p.ff = s.leaf->a;
        p.ft = s.leaf->b;
      } else if (approx_equal(s.leaf->b.boundary(), s.g.from, 1e-9)) {
        p.ff = s.leaf->b;
        p.ft = s.leaf->a;
      } else {
        throw std::invalid_argument("leaf does not match its geodesic");
      }
    }
    E.pieces_.push_back(p);
  }
  if (build_forest_) E.build_forest();
  return E;
}

std::vector<PieceSpec> EarthquakeMap::piece_specs() const {
  std::vector<PieceSpec> out;
  for (const Piece& p : pieces_) {
    PieceSpec s;
    s.g = p.g;
    s.amount = p.amount;
    if (p.has_leaf) s.leaf = Leaf(p.ff, p.ft);
    out.push_back(s);
  }
  return out;
}

void EarthquakeMap::build_forest() {
  nodes_.clear();
  roots_.clear();
  for (int i = 0; i < int(pieces_.size()); ++i) {
    const Piece& p = pieces_[size_t(i)];
    if (!p.has_leaf)
      throw std::logic_error("tree evaluation needs exact leaf endpoints");
    int parent = -1;  // -1 = root level; an index survives reallocation
    bool placed = false;
    while (!placed) {
      std::vector<int>& level =
          parent < 0 ? roots_ : nodes_[size_t(parent)].children;
      int next = -1;
      for (int nid : level) {
        Node& n = nodes_[size_t(nid)];
        if (arc_equal(n.ff, n.ft, p.ff, p.ft)) {
          // translations along one geodesic commute, so stacking is safe,
          // but nested factors must still come later in the list
          if (!n.children.empty())
            throw std::logic_error("factor list is not in topological order");
          n.pieces.push_back(i);
          placed = true;
          break;
        }
        if (arc_contains(n.ff, n.ft, p.ff, p.ft)) {
          next = nid;
          break;
        }
        if (arc_contains(p.ff, p.ft, n.ff, n.ft))
          throw std::logic_error("factor list is not in topological order");
      }
      if (placed) break;
      if (next >= 0) {
        parent = next;
      } else {
        Node n;
        n.ff = p.ff;
        n.ft = p.ft;
        n.g = p.g;
        n.o_sign = p.o_sign;
        n.pieces.push_back(i);
        int nid = int(nodes_.size());
        nodes_.push_back(std::move(n));
        // re-resolve: push_back may have moved every node
        (parent < 0 ? roots_ : nodes_[size_t(parent)].children).push_back(nid);
        placed = true;
      }
    }
  }
  forest_ = true;
}

bool EarthquakeMap::far_side(const Piece& p, const BoundaryPoint& x) const {
  double v = side_value(p.g, x);
  return v * p.o_sign < 0.0;
}

bool EarthquakeMap::far_side(const Node& n, const BoundaryPoint& x) const {
  double v = side_value(n.g, x);
  return v * n.o_sign < 0.0;
}

BoundaryPoint EarthquakeMap::apply_naive(const BoundaryPoint& x) const {
  BoundaryPoint y = x;
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
    if (far_side(*it, y)) y = it->trans(y);
  return y;
}

BoundaryPoint EarthquakeMap::apply(const BoundaryPoint& x) const {
  if (!forest_) return apply_naive(x);
  // The factor supports nest, every factor maps its own support arc onto
  // itself, and later list positions sit deeper in the tree. So the
  // containment chain of x is stable under applying the deeper factors, and
  // composing chain factors innermost first reproduces the full product.
  std::vector<int> chain;
  const std::vector<int>* level = &roots_;
  for (;;) {
    int found = -1;
    for (int nid : *level)
      if (far_side(nodes_[size_t(nid)], x)) {
        found = nid;
        break;
      }
    if (found < 0) break;
    chain.push_back(found);
    level = &nodes_[size_t(found)].children;
  }
  BoundaryPoint y = x;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Node& n = nodes_[size_t(*it)];
    for (auto pit = n.pieces.rbegin(); pit != n.pieces.rend(); ++pit)
      y = pieces_[size_t(*pit)].trans(y);
  }
  return y;
}

EarthquakeMap::BoundaryImage EarthquakeMap::apply_with_derivative(
    const BoundaryPoint& x) const {
  BoundaryImage out;
  out.point = x;
  // For a det-1 matrix acting on a unit projective pair, the angle derivative
  // at the preimage is 1 over the squared norm of the unnormalized image.
  auto track = [&out](const MobiusMap& m) {
    double vp = m.a * out.point.p + m.b * out.point.q;
    double vq = m.c * out.point.p + m.d * out.point.q;
    out.deriv /= vp * vp + vq * vq;
    out.point = BoundaryPoint::projective(vp, vq);
  };
  if (!forest_) {
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
      if (far_side(*it, out.point)) track(it->trans);
    return out;
  }
  std::vector<int> chain;
  const std::vector<int>* level = &roots_;
  for (;;) {
    int found = -1;
    for (int nid : *level)
      if (far_side(nodes_[size_t(nid)], x)) {
        found = nid;
        break;
      }
    if (found < 0) break;
    chain.push_back(found);
    level = &nodes_[size_t(found)].children;
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Node& n = nodes_[size_t(*it)];
    for (auto pit = n.pieces.rbegin(); pit != n.pieces.rend(); ++pit)
      track(pieces_[size_t(*pit)].trans);
  }
  return out;
}

BoundaryPoint EarthquakeMap::apply_inverse(const BoundaryPoint& x) const {
  // Inverse = reversed factor list with negated amounts, i.e. the shallowest
  // factor acts first; after each inverse translation the point may move, so
  // containment is re-tested against the updated point on the way down.
  BoundaryPoint y = x;
  if (!forest_) {
    for (const Piece& p : pieces_)
      if (far_side(p, y)) y = p.trans.inverse()(y);
    return y;
  }
  const std::vector<int>* level = &roots_;
  for (;;) {
    int found = -1;
    for (int nid : *level)
      if (far_side(nodes_[size_t(nid)], y)) {
        found = nid;
        break;
      }
    if (found < 0) break;
    const Node& n = nodes_[size_t(found)];
    for (int pi : n.pieces) y = pieces_[size_t(pi)].trans.inverse()(y);
    level = &n.children;
  }
  return y;
}

Geodesic EarthquakeMap::apply_to_geodesic(const Geodesic& h) const {
  return Geodesic(apply(h.from), apply(h.to));
}

Geodesic EarthquakeMap::apply_inverse_to_geodesic(const Geodesic& h) const {
  return Geodesic(apply_inverse(h.from), apply_inverse(h.to));
}

EarthquakeMap EarthquakeMap::scaled(double s) const {
  EarthquakeMap E = *this;
  if (s == 0.0) {
    E.pieces_.clear();
    E.nodes_.clear();
    E.roots_.clear();
    E.forest_ = false;
    return E;
  }
  for (Piece& p : E.pieces_) {
    p.amount *= s;
    p.trans = translation_along(p.g, p.amount);
  }
  return E;
}

double EarthquakeMap::angular_displacement_bound(int samples) const {
  Frame f(O_);
  double maxdisp = 0.0;
  double step = 2.0 * M_PI / samples;
  for (int k = 0; k < samples; ++k) {
    double t = k * step;
    double img = f.angle_of(apply(f.from_angle(t)));
    maxdisp = std::max(maxdisp, circ_dist(img, t));
  }
  return maxdisp + step;
}

EarthquakeMap elementary(const Geodesic& g, double a, const HPoint& O) {
  if (std::abs(side_value(g, O)) < 1e-14)
    throw std::domain_error("base point lies on the support geodesic");
  std::vector<PieceSpec> specs(1);
  specs[0].g = g;
  specs[0].amount = a;
  return EarthquakeMap::from_piece_specs(O, specs, false);
}

EarthquakeMap triangle_factor(const TriRecord& T, double a, const HPoint& O) {
  std::vector<PieceSpec> specs(3);
  specs[0] = PieceSpec{T.g3, a, T.leaf3()};
  specs[1] = PieceSpec{T.g1, -a, T.leaf1()};
  specs[2] = PieceSpec{T.g2, -a, T.leaf2()};
  return EarthquakeMap::from_piece_specs(O, specs, false);
}

EarthquakeMap truncated_shear(const TransverseCocycle& c,
                              const FareyArena& arena,
                              const std::vector<int>& family) {
  std::vector<PieceSpec> specs;
  for (int id : arena.lower_closure(family)) {
    const TriRecord& t = arena.tri(id);
    double a = alpha(c, arena, id);
    specs.push_back(PieceSpec{t.g3, a, t.leaf3()});
    specs.push_back(PieceSpec{t.g1, -a, t.leaf1()});
    specs.push_back(PieceSpec{t.g2, -a, t.leaf2()});
  }
  std::vector<int> fam = family;
  std::sort(fam.begin(), fam.end(), [&](int x, int y) {
    const auto& a = arena.tri(x).v;
    const auto& b = arena.tri(y).v;
    for (int k = 0; k < 3; ++k) {
      if (!(a[k] == b[k])) return frac_less(a[k], b[k]);
    }
    return false;
  });
  for (int id : fam) {
    const TriRecord& t = arena.tri(id);
    specs.push_back(PieceSpec{t.g3, alpha(c, arena, id), t.leaf3()});
  }
  return EarthquakeMap::from_piece_specs(arena.base(), specs, true);
}

}  // namespace liouville
