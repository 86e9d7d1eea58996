#pragma once

#include <array>
#include <complex>
#include <cmath>
#include <stdexcept>

// Upper half-plane model of the hyperbolic plane. Boundary points are kept
// projectively as pairs (p:q) so the point at infinity needs no special
// casing; p/q is the usual real coordinate.
//
// Orientation conventions used throughout:
//  * a Mobius map is a real 2x2 matrix with positive determinant, normalized
//    to det = 1;
//  * the boundary circle is traversed counterclockwise when the real axis is
//    traversed in the increasing direction (with infinity closing the loop);
//  * "p lies to the left of the oriented geodesic g" means Re(M(p)) < 0 where
//    M is any positive-determinant map sending g to the imaginary axis
//    oriented from 0 to infinity.

namespace liouville {

inline constexpr double kProjectiveTol = 1e-12;

struct BoundaryPoint {
  // Normalized so p^2 + q^2 = 1 and the first nonzero coordinate is positive.
  double p = 0.0;
  double q = 1.0;

  BoundaryPoint() = default;
  explicit BoundaryPoint(double x) : p(x), q(1.0) { normalize(); }

  static BoundaryPoint infinity() { return projective(1.0, 0.0); }
  static BoundaryPoint projective(double p_, double q_);

  bool is_infinity() const { return q == 0.0; }
  double value() const { return p / q; }  // +-inf when q == 0

  void normalize();
};

// |sin| of the projective distance between normalized pairs; zero iff equal.
double projective_cross(const BoundaryPoint& a, const BoundaryPoint& b);
bool approx_equal(const BoundaryPoint& a, const BoundaryPoint& b,
                  double tol = kProjectiveTol);

struct HPoint {
  double x = 0.0;
  double y = 1.0;  // y > 0
  std::complex<double> c() const { return {x, y}; }
};

struct MobiusMap {
  // Row-major entries of [[a, b], [c, d]], det normalized to 1.
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  MobiusMap() = default;
  MobiusMap(double a_, double b_, double c_, double d_);

  static MobiusMap identity() { return {}; }
  // z -> e^t z, the translation by t along the imaginary axis (0 -> inf).
  static MobiusMap axis_translation(double t);

  MobiusMap inverse() const { return MobiusMap(d, -b, -c, a); }
  MobiusMap operator*(const MobiusMap& o) const {
    return MobiusMap(a * o.a + b * o.c, a * o.b + b * o.d,
                     c * o.a + d * o.c, c * o.b + d * o.d);
  }

  BoundaryPoint operator()(const BoundaryPoint& x) const {
    return BoundaryPoint::projective(a * x.p + b * x.q, c * x.p + d * x.q);
  }
  HPoint operator()(const HPoint& z) const;
  std::complex<double> operator()(const std::complex<double>& z) const {
    return (a * z + b) / (c * z + d);
  }
};

struct Geodesic {
  BoundaryPoint from;
  BoundaryPoint to;

  Geodesic() = default;
  Geodesic(BoundaryPoint f, BoundaryPoint t);
  Geodesic(double f, double t) : Geodesic(BoundaryPoint(f), BoundaryPoint(t)) {}

  Geodesic reversed() const { return Geodesic(to, from); }
};

BoundaryPoint mobius_apply(const MobiusMap& m, const BoundaryPoint& x);

// Positive-determinant map with M(g.from) = 0, M(g.to) = inf, and |M(O)| = 1
// (so M(O) = i when O lies on g). The third degree of freedom is what makes
// the map unique; the foot of O on g lands exactly at i.
MobiusMap normalizing_map(const Geodesic& g, const HPoint& O);
// Same without the scale fix (scale chosen so M(i) has modulus 1).
MobiusMap normalizing_map_unscaled(const Geodesic& g);

// Translation by length t along the oriented geodesic g (towards g.to for
// t > 0), as an isometry of the whole plane.
MobiusMap translation_along(const Geodesic& g, double t);

double hyp_dist(const HPoint& a, const HPoint& b);

struct FootResult {
  double dist = 0.0;
  HPoint foot;
};
FootResult dist_to_geodesic(const HPoint& p, const Geodesic& g);

// Foot of the perpendicular dropped from a boundary point onto g. Requires c
// distinct from both endpoints of g.
HPoint boundary_foot(const BoundaryPoint& c, const Geodesic& g);

// Signed quadratic whose sign tells the side of g a point is on; vanishes on
// g itself. Boundary and interior overloads are sign-consistent.
double side_value(const Geodesic& g, const BoundaryPoint& x);
double side_value(const Geodesic& g, const HPoint& z);

bool is_left_of(const Geodesic& g, const HPoint& z);  // strict
// Reorient so that O lies strictly to the left; throws if O is on g.
Geodesic oriented_with_left(const Geodesic& g, const HPoint& O);

// True iff g and h cross transversally (no shared endpoint).
bool crosses(const Geodesic& g, const Geodesic& h);

// Cosine of the angle from g to h at their intersection, measured between the
// unit tangent vectors of the oriented geodesics. Zero for disjoint pairs and
// for pairs sharing an endpoint. Antisymmetric under reversing either factor.
double angle_cosine(const Geodesic& g, const Geodesic& h);

// Classical normalization: cross_ratio(0, 1, inf, x) = x. Throws
// std::domain_error when any two arguments coincide projectively.
double cross_ratio(const BoundaryPoint& a, const BoundaryPoint& b,
                   const BoundaryPoint& c, const BoundaryPoint& d);

// Half-plane <-> Poincare disk via the Cayley transform w = (z-i)/(z+i).
std::complex<double> halfplane_to_disk(const HPoint& z);
HPoint disk_to_halfplane(const std::complex<double>& w);
std::complex<double> halfplane_to_disk(const BoundaryPoint& x);  // |w| = 1
BoundaryPoint disk_to_halfplane_boundary(const std::complex<double>& w);

// Chart of the boundary circle as seen from a base point: O is moved to the
// disk center, boundary points get angles in [0, 2pi). Arc length in this
// chart is the angle metric based at O.
class Frame {
 public:
  explicit Frame(const HPoint& O);

  const HPoint& base() const { return O_; }

  double angle_of(const BoundaryPoint& x) const;
  BoundaryPoint from_angle(double theta) const;
  Geodesic geodesic(double theta1, double theta2) const {
    return Geodesic(from_angle(theta1), from_angle(theta2));
  }

  // |d angle_of / d phi| at x, where phi = atan2(q, p) is the projective
  // unit-vector parameter. Converts boundary-map derivatives tracked in the
  // unit-vector chart into this frame's angle chart.
  double angle_chart_derivative(const BoundaryPoint& x) const;

  // Distance from the base point to any geodesic whose endpoint angles are
  // separation apart (closed form; decreasing in the separation).
  static double dist_from_separation(double separation);
  double dist_to(const Geodesic& g) const;

 private:
  HPoint O_;
  MobiusMap to_base_;  // sends O to i
};

inline double wrap_angle(double t) {
  double u = std::fmod(t, 2.0 * M_PI);
  return u < 0 ? u + 2.0 * M_PI : u;
}

// Counterclockwise distance from a to b, in [0, 2pi).
inline double ccw_gap(double a, double b) { return wrap_angle(b - a); }

// Signed representative in (-pi, pi].
inline double wrap_signed(double t) {
  double u = wrap_angle(t);
  return u > M_PI ? u - 2.0 * M_PI : u;
}

// Shorter arc between two angles, in [0, pi].
inline double circ_dist(double a, double b) {
  double d = wrap_angle(a - b);
  return d > M_PI ? 2.0 * M_PI - d : d;
}

}  // namespace liouville
