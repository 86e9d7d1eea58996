#pragma once

#include <optional>
#include <vector>

#include "liouville/cocycle.hpp"
#include "liouville/farey.hpp"
#include "liouville/geometry.hpp"

// Piecewise-Moebius boundary homeomorphisms: an elementary factor translates
// the boundary interval on the far side of its support geodesic (away from
// the base point) by a fixed length along that geodesic and fixes the rest.
// A map is an ordered product of such factors; the list is stored leftmost
// factor first and composition applies the rightmost factor first.

namespace liouville {

struct PieceSpec {
  Geodesic g;         // support, orientation fixes the translation direction
  double amount = 0.0;
  std::optional<Leaf> leaf;  // exact endpoints when the support is a leaf
};

class EarthquakeMap {
 public:
  // Factors must be listed so that supports of later pieces never strictly
  // contain supports of earlier ones (topological order); the tree evaluator
  // relies on it. `exact_forest` requires every piece to carry a leaf.
  static EarthquakeMap from_piece_specs(const HPoint& O,
                                        const std::vector<PieceSpec>& specs,
                                        bool build_forest);

  const HPoint& base() const { return O_; }
  int piece_count() const { return int(pieces_.size()); }
  std::vector<PieceSpec> piece_specs() const;

  BoundaryPoint apply(const BoundaryPoint& x) const;
  BoundaryPoint apply_naive(const BoundaryPoint& x) const;  // reference scan
  BoundaryPoint apply_inverse(const BoundaryPoint& x) const;

  // Image point together with the derivative of the boundary action in the
  // projective unit-vector chart phi = atan2(q, p); defined away from the
  // finitely many support endpoints. Frame::angle_chart_derivative converts
  // it to a disk-angle chart: d(theta')/d(theta) = h'(image)/h'(x) * deriv.
  struct BoundaryImage {
    BoundaryPoint point;
    double deriv = 1.0;
  };
  BoundaryImage apply_with_derivative(const BoundaryPoint& x) const;
  Geodesic apply_to_geodesic(const Geodesic& h) const;
  Geodesic apply_inverse_to_geodesic(const Geodesic& h) const;

  // Same factor structure with every amount multiplied by s.
  EarthquakeMap scaled(double s) const;

  // Certified bound on the angular displacement sup |E(theta) - theta| in the
  // base-point disk chart, from monotone sampling: max sampled displacement
  // plus one grid step. Also valid for the inverse map.
  double angular_displacement_bound(int samples = 512) const;

 private:
  struct Piece {
    Geodesic g;
    double amount = 0.0;
    MobiusMap trans;     // translation by amount along g
    double o_sign = 0.0; // sign of side_value(g, O)
    bool has_leaf = false;
    Fraction ff, ft;     // far arc runs ccw from ff to ft
  };
  struct Node {
    Fraction ff, ft;
    Geodesic g;
    double o_sign = 0.0;
    std::vector<int> pieces;   // ascending list index; supports all equal
    std::vector<int> children; // strictly nested arcs
  };

  bool far_side(const Piece& p, const BoundaryPoint& x) const;
  bool far_side(const Node& n, const BoundaryPoint& x) const;
  void build_forest();

  HPoint O_;
  std::vector<Piece> pieces_;
  std::vector<Node> nodes_;
  std::vector<int> roots_;
  bool forest_ = false;
};

EarthquakeMap elementary(const Geodesic& g, double a, const HPoint& O);
EarthquakeMap triangle_factor(const TriRecord& T, double a, const HPoint& O);
// Ordered product over the lower closure of the family (triangle factors,
// topological order) followed by one elementary factor per family member on
// its facing side; zero-weight factors are dropped.
EarthquakeMap truncated_shear(const TransverseCocycle& c,
                              const FareyArena& arena,
                              const std::vector<int>& family);

}  // namespace liouville
