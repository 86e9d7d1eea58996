#include "liouville/geometry.hpp"

#include <cassert>

namespace liouville {

void BoundaryPoint::normalize() {
  double n = std::hypot(p, q);
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::domain_error("boundary point: degenerate projective pair");
  p /= n;
  q /= n;
  // Tiny q from rounding would make value() explode in surprising places;
  // snap exact infinity only when q is exactly zero, otherwise keep as is.
  double s = (p != 0.0) ? (p > 0 ? 1.0 : -1.0) : (q > 0 ? 1.0 : -1.0);
  p *= s;
  q *= s;
}

BoundaryPoint BoundaryPoint::projective(double p_, double q_) {
  BoundaryPoint b;
  b.p = p_;
  b.q = q_;
  b.normalize();
  return b;
}

double projective_cross(const BoundaryPoint& a, const BoundaryPoint& b) {
  return a.p * b.q - b.p * a.q;
}

bool approx_equal(const BoundaryPoint& a, const BoundaryPoint& b, double tol) {
  return std::fabs(projective_cross(a, b)) < tol;
}

MobiusMap::MobiusMap(double a_, double b_, double c_, double d_)
    : a(a_), b(b_), c(c_), d(d_) {
  double det = a * d - b * c;
  if (!(det > 0.0) || !std::isfinite(det))
    throw std::domain_error("mobius map: determinant must be positive");
  double s = std::sqrt(det);
  a /= s;
  b /= s;
  c /= s;
  d /= s;
}

MobiusMap MobiusMap::axis_translation(double t) {
  return MobiusMap(std::exp(t / 2.0), 0.0, 0.0, std::exp(-t / 2.0));
}

HPoint MobiusMap::operator()(const HPoint& z) const {
  std::complex<double> w = (*this)(z.c());
  return HPoint{w.real(), w.imag()};
}

Geodesic::Geodesic(BoundaryPoint f, BoundaryPoint t) : from(f), to(t) {
  if (approx_equal(from, to))
    throw std::domain_error("geodesic: endpoints coincide");
}

BoundaryPoint mobius_apply(const MobiusMap& m, const BoundaryPoint& x) {
  return m(x);
}

MobiusMap normalizing_map_unscaled(const Geodesic& g) {
  // Rows (q_f, -p_f) and (q_t, -p_t) kill from and to; fix the determinant
  // sign by negating the first row if needed.
  double r1p = g.from.q, r1q = -g.from.p;
  double r2p = g.to.q, r2q = -g.to.p;
  double det = r1p * r2q - r1q * r2p;
  if (det < 0.0) {
    r1p = -r1p;
    r1q = -r1q;
  }
  return MobiusMap(r1p, r1q, r2p, r2q);
}

MobiusMap normalizing_map(const Geodesic& g, const HPoint& O) {
  MobiusMap m0 = normalizing_map_unscaled(g);
  std::complex<double> z0 = m0(O.c());
  double r = std::abs(z0);
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::domain_error("normalizing_map: base point degenerates");
  return MobiusMap(1.0 / std::sqrt(r), 0.0, 0.0, std::sqrt(r)) * m0;
}

MobiusMap translation_along(const Geodesic& g, double t) {
  MobiusMap m = normalizing_map_unscaled(g);
  return m.inverse() * MobiusMap::axis_translation(t) * m;
}

double hyp_dist(const HPoint& a, const HPoint& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  double ch = 1.0 + (dx * dx + dy * dy) / (2.0 * a.y * b.y);
  return std::acosh(std::max(1.0, ch));
}

FootResult dist_to_geodesic(const HPoint& p, const Geodesic& g) {
  MobiusMap m = normalizing_map_unscaled(g);
  std::complex<double> z = m(p.c());
  double r = std::abs(z);
  // cosh(dist) = |z| / Im z once g is the imaginary axis; foot at i|z|.
  double ratio = r / z.imag();
  double dist = std::acosh(std::max(1.0, ratio));
  HPoint foot = m.inverse()(HPoint{0.0, r});
  return FootResult{dist, foot};
}

HPoint boundary_foot(const BoundaryPoint& c, const Geodesic& g) {
  if (approx_equal(c, g.from) || approx_equal(c, g.to))
    throw std::domain_error("boundary_foot: point is an endpoint of g");
  MobiusMap m = normalizing_map_unscaled(g);
  BoundaryPoint ch = m(c);
  double v = std::fabs(ch.p / ch.q);  // the perpendicular from x meets the
  return m.inverse()(HPoint{0.0, v});  // axis at i|x|
}

double side_value(const Geodesic& g, const BoundaryPoint& x) {
  return (x.p * g.from.q - g.from.p * x.q) * (x.p * g.to.q - g.to.p * x.q);
}

double side_value(const Geodesic& g, const HPoint& z) {
  double fa = z.x * g.from.q - g.from.p;
  double fb = z.x * g.to.q - g.to.p;
  return fa * fb + z.y * z.y * g.from.q * g.to.q;
}

bool is_left_of(const Geodesic& g, const HPoint& z) {
  MobiusMap m = normalizing_map_unscaled(g);
  return m(z.c()).real() < 0.0;
}

Geodesic oriented_with_left(const Geodesic& g, const HPoint& O) {
  double re = normalizing_map_unscaled(g)(O.c()).real();
  if (std::fabs(re) < 1e-14)
    throw std::domain_error("oriented_with_left: base point lies on g");
  return re < 0.0 ? g : g.reversed();
}

bool crosses(const Geodesic& g, const Geodesic& h) {
  if (approx_equal(g.from, h.from) || approx_equal(g.from, h.to) ||
      approx_equal(g.to, h.from) || approx_equal(g.to, h.to))
    return false;
  return side_value(g, h.from) * side_value(g, h.to) < 0.0 &&
         side_value(h, g.from) * side_value(h, g.to) < 0.0;
}

double angle_cosine(const Geodesic& g, const Geodesic& h) {
  if (!crosses(g, h)) return 0.0;
  MobiusMap m = normalizing_map_unscaled(g);
  BoundaryPoint x = m(h.from);
  BoundaryPoint y = m(h.to);
  // With g as the axis 0 -> inf and h from x to y, the tangent cosine at the
  // crossing is (-x-y)/(x-y), evaluated projectively.
  double num = -(x.p * y.q + y.p * x.q);
  double den = x.p * y.q - y.p * x.q;
  return num / den;
}

double cross_ratio(const BoundaryPoint& a, const BoundaryPoint& b,
                   const BoundaryPoint& c, const BoundaryPoint& d) {
  const BoundaryPoint* pts[4] = {&a, &b, &c, &d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (approx_equal(*pts[i], *pts[j]))
        throw std::domain_error("cross_ratio: coincident arguments");
  auto x = [](const BoundaryPoint& u, const BoundaryPoint& v) {
    return u.p * v.q - v.p * u.q;
  };
  // image of d under the map sending (a, b, c) to (0, 1, inf)
  return (x(d, a) * x(b, c)) / (x(d, c) * x(b, a));
}

std::complex<double> halfplane_to_disk(const HPoint& z) {
  const std::complex<double> i(0.0, 1.0);
  return (z.c() - i) / (z.c() + i);
}

HPoint disk_to_halfplane(const std::complex<double>& w) {
  const std::complex<double> i(0.0, 1.0);
  std::complex<double> z = i * (1.0 + w) / (1.0 - w);
  return HPoint{z.real(), z.imag()};
}

std::complex<double> halfplane_to_disk(const BoundaryPoint& x) {
  std::complex<double> num(x.p, -x.q), den(x.p, x.q);
  return num / den;
}

BoundaryPoint disk_to_halfplane_boundary(const std::complex<double>& w) {
  // z = i(1+w)/(1-w) restricted to |w| = 1; with w = e^{i t} this is
  // -cot(t/2), kept projective as (-cos(t/2) : sin(t/2)).
  double t = std::arg(w);
  return BoundaryPoint::projective(-std::cos(t / 2.0), std::sin(t / 2.0));
}

Frame::Frame(const HPoint& O) : O_(O) {
  if (!(O.y > 0.0)) throw std::domain_error("frame: base point not interior");
  to_base_ = MobiusMap(1.0, -O.x, 0.0, O.y);  // z -> (z - x0)/y0 sends O to i
}

double Frame::angle_of(const BoundaryPoint& x) const {
  BoundaryPoint u = to_base_(x);
  // Angle of the Cayley image (p - iq)/(p + iq) = e^{-2i atan2(q, p)}.
  return wrap_angle(-2.0 * std::atan2(u.q, u.p));
}

BoundaryPoint Frame::from_angle(double theta) const {
  BoundaryPoint u =
      BoundaryPoint::projective(-std::cos(theta / 2.0), std::sin(theta / 2.0));
  return to_base_.inverse()(u);
}

double Frame::angle_chart_derivative(const BoundaryPoint& x) const {
  double vp = to_base_.a * x.p + to_base_.b * x.q;
  double vq = to_base_.c * x.p + to_base_.d * x.q;
  return 2.0 / (vp * vp + vq * vq);
}

double Frame::dist_from_separation(double separation) {
  double d = std::fabs(separation);
  if (d >= M_PI) return 0.0;
  double x = (1.0 - std::sin(d / 2.0)) / std::cos(d / 2.0);
  return 2.0 * std::atanh(x);
}

double Frame::dist_to(const Geodesic& g) const {
  return dist_from_separation(circ_dist(angle_of(g.from), angle_of(g.to)));
}

}  // namespace liouville
