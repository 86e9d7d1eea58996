#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "doctest.h"
#include "liouville/quadrature.hpp"

using namespace liouville;

namespace {
const HPoint kBase{0.5, std::sqrt(3.0) / 2.0};

// psi(g) = phi(m(g)) as a test function: support is the m-preimage of phi's
// support, values are unchanged, so phi's own bounds still certify it.
TestFunction compose_with_isometry(const TestFunction& phi, const MobiusMap& m) {
  const Frame fr(phi.base());
  MobiusMap mi = m.inverse();
  auto pull_angle = [&](double t) { return fr.angle_of(mi(fr.from_angle(t))); };
  std::vector<AngleRect> rects;
  double R = 0.0;
  for (const AngleRect& r : phi.support()) {
    double lo1 = pull_angle(r.lo1), hi1 = pull_angle(r.lo1 + r.len1);
    double lo2 = pull_angle(r.lo2), hi2 = pull_angle(r.lo2 + r.len2);
    AngleRect out(lo1, ccw_gap(lo1, hi1), lo2, ccw_gap(lo2, hi2));
    rects.push_back(out);
    R = std::max(R, support_radius_for_rect(phi.base(), out));
  }
  auto eval = [phi, m, fr](double t1, double t2) {
    return phi.eval(Geodesic(m(fr.from_angle(t1)), m(fr.from_angle(t2))));
  };
  return TestFunction(phi.base(), phi.name() + "+iso", eval, rects, R + 1e-6,
                      phi.holder_exponent(), phi.holder_norm_bound(),
                      phi.balanced());
}
}  // namespace

TEST_CASE("pairwise sum agrees with sequential summation") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int n : {0, 1, 2, 3, 7, 64, 1000}) {
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = U(rng);
    double seq = std::accumulate(v.begin(), v.end(), 0.0);
    double pw = pairwise_sum(v);
    CHECK(pw == doctest::Approx(seq).epsilon(1e-13));
    CHECK(pairwise_sum(v) == pw);  // deterministic
  }
  CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("liouville density closed form") {
  CHECK(liouville_density(0.0, M_PI) == doctest::Approx(0.5).epsilon(1e-13));
  double t1 = 1.3, t2 = 2.9;
  double s = std::sin((t1 - t2) / 2.0);
  CHECK(liouville_density(t1, t2) ==
        doctest::Approx(0.5 / (s * s)).epsilon(1e-13));
  CHECK(liouville_density(t2, t1) == liouville_density(t1, t2));
}

TEST_CASE("tensor quadrature on a smooth closed form") {
  auto f = [](double x, double y) { return x * x * std::sin(y); };
  std::vector<AngleRect> r = {AngleRect(0.0, 1.0, 0.0, 2.0)};
  QuadratureSpec q;
  q.refinement_tol = 1e-12;
  QuadratureReport rep;
  double v = integrate_rects(f, r, q, &rep);
  CHECK(v == doctest::Approx((1.0 - std::cos(2.0)) / 3.0).epsilon(1e-12));
  CHECK(rep.converged);
  CHECK(rep.estimates.size() >= 2);
}

TEST_CASE("angle rectangle mass of the density matches the antiderivative") {
  // density = d^2/(dt1 dt2) of 2 log sin((t1 - t2)/2) away from the diagonal
  auto Fv = [](double t1, double t2) {
    return 2.0 * std::log(std::fabs(std::sin((t1 - t2) / 2.0)));
  };
  auto closed = [&](const AngleRect& r) {
    return Fv(r.lo1 + r.len1, r.lo2 + r.len2) - Fv(r.lo1 + r.len1, r.lo2) -
           Fv(r.lo1, r.lo2 + r.len2) + Fv(r.lo1, r.lo2);
  };
  QuadratureSpec q;
  q.refinement_tol = 1e-11;
  q.max_levels = 6;
  for (const AngleRect& r :
       {AngleRect(0.2, 0.6, 1.8, 0.7), AngleRect(3.0, 1.0, 0.4, 1.2),
        AngleRect(5.5, 1.4, 2.2, 0.5)}) {
    double v = integrate_rects([](double a, double b) {
      return liouville_density(a, b);
    }, {r}, q);
    CHECK(v == doctest::Approx(closed(r)).epsilon(1e-9));
  }
}

TEST_CASE("split_rects_at preserves measure and isolates cuts") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> U(0.0, 2.0 * M_PI);
  std::vector<AngleRect> rects = {AngleRect(0.3, 1.9, 2.0, 1.1),
                                  AngleRect(5.0, 2.0, 0.1, 0.9)};
  std::vector<double> cuts;
  for (int k = 0; k < 9; ++k) cuts.push_back(U(rng));
  std::vector<AngleRect> out = split_rects_at(rects, cuts, cuts);
  double before = 0.0, after = 0.0;
  for (const AngleRect& r : rects) before += r.len1 * r.len2;
  for (const AngleRect& r : out) {
    after += r.len1 * r.len2;
    for (double c : cuts) {
      // cuts may only touch piece boundaries
      double d1 = ccw_gap(r.lo1, c);
      if (d1 < r.len1) CHECK(std::min(d1, r.len1 - d1) < 1e-9);
      double d2 = ccw_gap(r.lo2, c);
      if (d2 < r.len2) CHECK(std::min(d2, r.len2 - d2) < 1e-9);
    }
  }
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
  CHECK(out.size() > rects.size());
}

TEST_CASE("crossing mass integrates to four times the length") {
  QuadratureSpec q;
  // the mollifier edge keeps composite GL from converging much past 1e-7
  q.refinement_tol = 5e-7;
  q.max_levels = 5;
  for (double ell : {0.5, 1.0, 2.0}) {
    TestFunction phi = make_crossing_mass(kBase, ell, 0.4 * ell);
    CHECK(phi.balanced());
    double v = liouville_integral(phi, q);
    CHECK(v == doctest::Approx(4.0 * ell).epsilon(2e-6));
  }
  CHECK_THROWS_AS(make_crossing_mass(kBase, 0.0, 0.1), std::domain_error);
  CHECK_THROWS_AS(make_crossing_mass(kBase, 2.5, 0.1), std::domain_error);
  CHECK_THROWS_AS(make_crossing_mass(kBase, 1.0, 1.5), std::domain_error);
}

TEST_CASE("integrals are invariant under isometries") {
  QuadratureSpec q;
  // the composed integrands are more distorted than the originals and need a
  // couple of extra levels before the ladder settles
  q.refinement_tol = 2e-7;
  q.max_levels = 6;
  TestFunction phi = builtin_test_functions(kBase)[0];  // bump
  double base_value = liouville_integral(phi, q);
  CHECK(base_value != 0.0);
  for (const MobiusMap& m :
       {MobiusMap(1.0, 1.0, 0.0, 1.0), MobiusMap(2.0, 1.0, 1.0, 1.0),
        MobiusMap(1.0, 0.0, -0.7, 1.0)}) {
    TestFunction psi = compose_with_isometry(phi, m);
    double v = liouville_integral(psi, q);
    CHECK(v == doctest::Approx(base_value).epsilon(1e-6));
  }
}

TEST_CASE("fixed level evaluation and thread determinism") {
  TestFunction phi = make_crossing_mass(kBase, 1.0, 0.5);
  QuadratureSpec q;
  q.fixed_level = 1;
  QuadratureReport rep;
  double a = liouville_integral(phi, q, &rep);
  CHECK(rep.estimates.size() == 1);
  set_quadrature_threads(1);
  double b = liouville_integral(phi, q);
  set_quadrature_threads(3);
  double c = liouville_integral(phi, q);
  set_quadrature_threads(0);
  // bitwise identical across thread counts
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  CHECK(std::memcmp(&a, &c, sizeof a) == 0);
}

TEST_CASE("non convergence raises with both last estimates") {
  auto f = [](double x, double y) { return std::sin(87.0 * x * y); };
  std::vector<AngleRect> r = {AngleRect(0.0, 1.5, 0.0, 1.5)};
  QuadratureSpec q;
  q.base_grid = 8;
  q.refinement_tol = 1e-15;
  q.abs_floor = 1e-300;
  q.max_levels = 2;
  QuadratureReport rep;
  try {
    integrate_rects(f, r, q, &rep);
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(std::isfinite(e.last_estimate));
    CHECK(std::isfinite(e.previous_estimate));
    CHECK(e.last_estimate != e.previous_estimate);
  }
}

TEST_CASE("finite differences with extrapolation") {
  auto f = [](double t) { return t * t * t + 2.0 * t + 1.0; };
  FdResult r = fd_derivative(f, 0.5, {0.2, 0.1, 0.05});
  CHECK(r.value == doctest::Approx(2.75).epsilon(1e-12));
  CHECK(!r.warning);
  CHECK(r.diffs.size() == 3);
  CHECK(r.error_estimate < 1e-10);

  auto g = [](double t) { return std::exp(2.0 * t); };
  FdResult rg = fd_derivative(g, 0.0, {0.08, 0.04, 0.02, 0.01});
  CHECK(rg.value == doctest::Approx(2.0).epsilon(1e-10));

  // step order does not matter; the ladder is sorted internally
  FdResult rs = fd_derivative(f, 0.5, {0.05, 0.2, 0.1});
  CHECK(rs.value == doctest::Approx(r.value).epsilon(1e-14));

  CHECK_THROWS_AS(fd_derivative(f, 0.0, {0.1}), std::domain_error);
  CHECK_THROWS_AS(fd_derivative(f, 0.0, {0.1, 0.1}), std::domain_error);
  CHECK_THROWS_AS(fd_derivative(f, 0.0, {0.1, -0.05}), std::domain_error);
}

TEST_CASE("pullback under the identity and under a small map") {
  QuadratureSpec q;
  q.refinement_tol = 1e-8;
  q.max_levels = 5;
  TestFunction phi = builtin_test_functions(kBase)[0];
  EarthquakeMap zero =
      elementary(Geodesic(0.0, 1.0), 0.3, kBase).scaled(0.0);
  CHECK(pullback_integral(phi, zero, q) ==
        doctest::Approx(liouville_integral(phi, q)).epsilon(1e-12));

  EarthquakeMap E = elementary(Geodesic(0.0, 1.0), 0.2, kBase);
  double direct = pullback_integral(phi, E, q);
  Frame fr(kBase);
  std::vector<double> cuts = {fr.angle_of(BoundaryPoint(0.0)),
                              fr.angle_of(BoundaryPoint(1.0))};
  double substituted = pullback_integral_substituted(phi, E, cuts, q);
  CHECK(substituted ==
        doctest::Approx(direct).epsilon(2e-6));

  // inverse direction: pulling back by E then by its inverse scaling
  EarthquakeMap Em = elementary(Geodesic(0.0, 1.0), -0.2, kBase);
  double back = pullback_integral_substituted(phi, Em, cuts, q);
  CHECK(back != doctest::Approx(substituted).epsilon(1e-8));
}

TEST_CASE("geodesic kernel matches the derivative of the pullback") {
  QuadratureSpec q;
  q.refinement_tol = 1e-9;
  q.max_levels = 5;
  TestFunction phi = builtin_test_functions(kBase)[0];
  Frame fr(kBase);
  // (0,1) is crossed by the whole support, the second geodesic cuts through
  // the middle of it, the third is crossed by all of it from another side
  for (const Geodesic& g :
       {Geodesic(0.0, 1.0), fr.geodesic(2.8, 6.0), fr.geodesic(1.1, 3.9)}) {
    double ker = kernel_geodesic(phi, g, q);
    std::vector<double> cuts = {fr.angle_of(g.from), fr.angle_of(g.to)};
    auto F = [&](double a) {
      return pullback_integral_substituted(phi, elementary(g, a, kBase), cuts,
                                           q);
    };
    FdResult fd = fd_derivative(F, 0.0, {0.02, 0.01, 0.005});
    CHECK(ker ==
          doctest::Approx(fd.value).epsilon(1e-4).scale(std::max(
              1.0, std::abs(fd.value))));
    // antisymmetric in the orientation
    CHECK(kernel_geodesic(phi, g.reversed(), q) ==
          doctest::Approx(-ker).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("triangle kernel matches the derivative of its factor pullback") {
  QuadratureSpec q;
  q.refinement_tol = 1e-7;
  q.max_levels = 6;
  // the smooth bump; Hoelder cusps cap the ladder near 1e-6 and are
  // exercised with looser stopping rules elsewhere
  TestFunction phi = builtin_test_functions(kBase)[0];
  FareyArena arena(kBase, 3.0);
  auto id = arena.find({Fraction(0, 1), Fraction(1, 2), Fraction(1, 1)});
  REQUIRE(id.has_value());
  const TriRecord& T = arena.tri(*id);
  double ker = kernel_triangle(phi, T, q);
  CHECK(ker == doctest::Approx(kernel_triangle_sides(phi, T.g3, T.g1, T.g2, q))
                   .epsilon(1e-12));
  Frame fr(kBase);
  std::vector<double> cuts;
  for (const Geodesic* g : {&T.g1, &T.g2, &T.g3}) {
    cuts.push_back(fr.angle_of(g->from));
    cuts.push_back(fr.angle_of(g->to));
  }
  auto F = [&](double a) {
    return pullback_integral_substituted(phi, triangle_factor(T, a, kBase),
                                         cuts, q);
  };
  FdResult fd = fd_derivative(F, 0.0, {0.02, 0.01, 0.005});
  CHECK(ker == doctest::Approx(fd.value).epsilon(1e-4).scale(
                   std::max(1.0, std::abs(fd.value))));
}

TEST_CASE("kernels are linear in the test function") {
  QuadratureSpec q;
  q.fixed_level = 2;
  // two different functions on the exact same support rectangle, so the
  // combination shares their cell decomposition
  TestFunction fa = make_angle_bump(kBase, 2.0, 0.45, 4.2, 0.45, 1.0, "lina");
  TestFunction fb = make_angle_bump(kBase, 2.0, 0.45, 4.2, 0.45, 0.5, "linb");
  REQUIRE(fa.support().size() == 1);
  REQUIRE(fb.support().size() == 1);
  Geodesic g(0.0, 1.0);
  double ka = kernel_geodesic(fa, g, q);
  double kb = kernel_geodesic(fb, g, q);
  CHECK(std::abs(ka) > 1e-12);
  auto eval = [fa, fb](double a, double b) {
    return 2.0 * fa.eval_angles(a, b) - 3.0 * fb.eval_angles(a, b);
  };
  TestFunction comb(kBase, "comb", eval, fa.support(), fa.support_radius(),
                    0.5,
                    2.0 * fa.holder_norm_bound() + 3.0 * fb.holder_norm_bound(),
                    false);
  double kc = kernel_geodesic(comb, g, q);
  CHECK(kc == doctest::Approx(2.0 * ka - 3.0 * kb)
                  .epsilon(1e-9)
                  .scale(std::max(1.0, std::abs(ka) + std::abs(kb))));
}
