#include "liouville/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace liouville {

namespace {

constexpr double kNodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                              0.5384693101056831, 0.9061798459386640};
constexpr double kWeights[5] = {0.2369268850561891, 0.4786286704993665,
                                0.5688888888888889, 0.4786286704993665,
                                0.2369268850561891};

struct CellRange {
  const AngleRect* rect;
  int n1, n2;
  long long first;  // flattened index of the rect's first cell
};

double level_value(const std::function<double(double, double)>& f,
                   const std::vector<AngleRect>& rects, int grid, int level) {
  double h = (M_PI / 2.0) / (double(grid) * double(1 << level));
  std::vector<CellRange> ranges;
  long long total = 0;
  for (const AngleRect& r : rects) {
    CellRange c;
    c.rect = &r;
    c.n1 = std::max(1, int(std::ceil(r.len1 / h)));
    c.n2 = std::max(1, int(std::ceil(r.len2 / h)));
    c.first = total;
    total += (long long)c.n1 * c.n2;
    ranges.push_back(c);
  }
  std::vector<double> cell(static_cast<size_t>(total));
  int nth = quadrature_thread_count();
  (void)nth;
  // one flattened loop over all cells of all rects, so heavily split rect
  // lists (many single-cell slivers) do not pay per-rect thread overhead
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nth)
#endif
  for (long long idx = 0; idx < total; ++idx) {
    auto it = std::upper_bound(
        ranges.begin(), ranges.end(), idx,
        [](long long v, const CellRange& c) { return v < c.first; });
    const CellRange& c = *(it - 1);
    const AngleRect& r = *c.rect;
    double d1 = r.len1 / c.n1, d2 = r.len2 / c.n2;
    long long local = idx - c.first;
    int i = int(local / c.n2), j = int(local % c.n2);
    double mid1 = r.lo1 + (i + 0.5) * d1, mid2 = r.lo2 + (j + 0.5) * d2;
    double s = 0.0;
    for (int u = 0; u < 5; ++u) {
      double t1 = mid1 + 0.5 * d1 * kNodes[u];
      double row = 0.0;
      for (int v = 0; v < 5; ++v)
        row += kWeights[v] * f(t1, mid2 + 0.5 * d2 * kNodes[v]);
      s += kWeights[u] * row;
    }
    cell[size_t(idx)] = s * (0.25 * d1 * d2);
  }
  return pairwise_sum(cell);
}

double run_ladder(const std::function<double(double, double)>& f,
                  const std::vector<AngleRect>& rects, const QuadratureSpec& q,
                  QuadratureReport* rep) {
  if (q.base_grid < 8) throw std::domain_error("base grid must be >= 8");
  if (!(q.refinement_tol > 0.0))
    throw std::domain_error("refinement tolerance must be positive");
  if (rects.empty()) {
    if (rep) rep->converged = true;
    return 0.0;
  }
  if (q.fixed_level >= 0) {
    double v = level_value(f, rects, q.base_grid, q.fixed_level);
    if (rep) {
      rep->estimates.push_back(v);
      rep->converged = true;
    }
    return v;
  }
  double prev = 0.0, prev2 = 0.0;
  for (int k = 0; k <= q.max_levels; ++k) {
    double v = level_value(f, rects, q.base_grid, k);
    if (rep) rep->estimates.push_back(v);
    if (k > 0) {
      double gap = std::abs(v - prev);
      if (gap <= std::max(q.refinement_tol * std::abs(v), q.abs_floor)) {
        if (rep) rep->converged = true;
        return v;
      }
    }
    prev2 = prev;
    prev = v;
  }
  throw QuadratureError("quadrature did not converge within max_levels", prev,
                        prev2);
}

// Far-side-first cosine representative. With M the normalizing map of g, a
// crossing geodesic has images x, y of opposite sign and the tangent cosine
// at the crossing is (-x-y)/(x-y) up to the h-orientation; taking the
// representative whose first endpoint lies on the far side of g makes the
// value independent of the orientation of h.
struct SideKernel {
  MobiusMap m;
  double o_sign = 0.0;
  bool crossing = false;
  double rep_sign = 1.0;

  void setup(const Geodesic& g, const HPoint& O) {
    m = normalizing_map_unscaled(g);
    o_sign = side_value(g, O) > 0 ? 1.0 : -1.0;
  }
  void classify(const Geodesic& g, const BoundaryPoint& c1,
                const BoundaryPoint& c2) {
    double s1 = side_value(g, c1) * o_sign;
    double s2 = side_value(g, c2) * o_sign;
    crossing = (s1 > 0) != (s2 > 0);
    rep_sign = s1 < 0 ? 1.0 : -1.0;  // first endpoint on the far side?
  }
  double eval(const BoundaryPoint& x, const BoundaryPoint& y) const {
    if (!crossing) return 0.0;
    BoundaryPoint xm = m(x), ym = m(y);
    double num = -(xm.p * ym.q + ym.p * xm.q);
    double den = xm.p * ym.q - ym.p * xm.q;
    return rep_sign * num / den;
  }
};

}  // namespace

namespace {
int g_thread_override = 0;
}

int quadrature_thread_count() {
  if (g_thread_override >= 1) return g_thread_override;
  static int n = [] {
#ifdef _OPENMP
    int v = omp_get_max_threads();
#else
    int v = 1;
#endif
    if (const char* env = std::getenv("LIOUVILLE_THREADS")) {
      int cap = std::atoi(env);
      if (cap >= 1) v = std::min(v, cap);
    }
    return v;
  }();
  return n;
}

void set_quadrature_threads(int n) { g_thread_override = n; }

double pairwise_sum(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  std::vector<double> work = v;
  size_t n = work.size();
  while (n > 1) {
    size_t m = n / 2;
    for (size_t i = 0; i < m; ++i) work[i] = work[2 * i] + work[2 * i + 1];
    if (n % 2) {
      work[m] = work[n - 1];
      n = m + 1;
    } else {
      n = m;
    }
  }
  return work[0];
}

double liouville_density(double t1, double t2) {
  double s = std::sin(0.5 * (t1 - t2));
  return 0.5 / (s * s);
}

double integrate_rects(const std::function<double(double, double)>& f,
                       const std::vector<AngleRect>& rects,
                       const QuadratureSpec& q, QuadratureReport* rep) {
  return run_ladder(f, rects, q, rep);
}

std::vector<AngleRect> split_rects_at(const std::vector<AngleRect>& rects,
                                      const std::vector<double>& cuts1,
                                      const std::vector<double>& cuts2) {
  auto breaks = [](double lo, double len, const std::vector<double>& cuts) {
    std::vector<double> off = {0.0, len};
    for (double c : cuts) {
      double u = ccw_gap(lo, c);
      if (u > 1e-12 && u < len - 1e-12) off.push_back(u);
    }
    std::sort(off.begin(), off.end());
    return off;
  };
  std::vector<AngleRect> out;
  for (const AngleRect& r : rects) {
    std::vector<double> o1 = breaks(r.lo1, r.len1, cuts1);
    std::vector<double> o2 = breaks(r.lo2, r.len2, cuts2);
    for (size_t i = 0; i + 1 < o1.size(); ++i)
      for (size_t j = 0; j + 1 < o2.size(); ++j)
        out.push_back(AngleRect(r.lo1 + o1[i], o1[i + 1] - o1[i],
                                r.lo2 + o2[j], o2[j + 1] - o2[j]));
  }
  return out;
}

double liouville_integral(const TestFunction& phi, const QuadratureSpec& q,
                          QuadratureReport* rep) {
  auto f = [&phi](double t1, double t2) {
    double v = phi.eval_angles(t1, t2);
    return v == 0.0 ? 0.0 : v * liouville_density(t1, t2);
  };
  return run_ladder(f, phi.support(), q, rep);
}

double pullback_integral(const TestFunction& phi, const EarthquakeMap& E,
                         const QuadratureSpec& q, double extra_pad,
                         QuadratureReport* rep) {
  if (E.piece_count() == 0 && extra_pad == 0.0)
    return liouville_integral(phi, q, rep);
  // A manual pad pins the grid: FD ladders pass the displacement bound of
  // the largest step for every evaluation so quadrature error cancels in
  // the differences. Without it the map's own certified bound is used.
  double pad = extra_pad;
  if (extra_pad == 0.0 && E.piece_count() > 0)
    pad = E.angular_displacement_bound();
  std::vector<AngleRect> rects;
  for (const AngleRect& r : phi.support()) {
    double l1 = std::min(r.len1 + 2.0 * pad, 2.0 * M_PI);
    double l2 = std::min(r.len2 + 2.0 * pad, 2.0 * M_PI);
    rects.push_back(AngleRect(wrap_angle(r.lo1 - pad), l1,
                              wrap_angle(r.lo2 - pad), l2));
  }
  const Frame& fr = phi.frame();
  auto f = [&phi, &E, &fr](double t1, double t2) {
    BoundaryPoint x = E.apply_inverse(fr.from_angle(t1));
    BoundaryPoint y = E.apply_inverse(fr.from_angle(t2));
    double v = phi.eval(Geodesic(x, y));
    return v == 0.0 ? 0.0 : v * liouville_density(t1, t2);
  };
  return run_ladder(f, rects, q, rep);
}

double pullback_integral_substituted(const TestFunction& phi,
                                     const EarthquakeMap& E,
                                     const std::vector<double>& cuts,
                                     const QuadratureSpec& q,
                                     QuadratureReport* rep) {
  std::vector<AngleRect> rects = split_rects_at(phi.support(), cuts, cuts);
  const Frame& fr = phi.frame();
  auto f = [&phi, &E, &fr](double t1, double t2) {
    double v = phi.eval_angles(t1, t2);
    if (v == 0.0) return 0.0;
    BoundaryPoint x1 = fr.from_angle(t1), x2 = fr.from_angle(t2);
    EarthquakeMap::BoundaryImage i1 = E.apply_with_derivative(x1);
    EarthquakeMap::BoundaryImage i2 = E.apply_with_derivative(x2);
    double rho = liouville_density(fr.angle_of(i1.point), fr.angle_of(i2.point));
    // convert the unit-vector-chart derivatives to this frame's angle chart
    double j1 = i1.deriv * fr.angle_chart_derivative(i1.point) /
                fr.angle_chart_derivative(x1);
    double j2 = i2.deriv * fr.angle_chart_derivative(i2.point) /
                fr.angle_chart_derivative(x2);
    return v * rho * j1 * j2;
  };
  return run_ladder(f, rects, q, rep);
}

double kernel_geodesic(const TestFunction& phi, const Geodesic& g,
                       const QuadratureSpec& q, QuadratureReport* rep) {
  const Frame& fr = phi.frame();
  std::vector<double> cuts = {fr.angle_of(g.from), fr.angle_of(g.to)};
  std::vector<AngleRect> pieces = split_rects_at(phi.support(), cuts, cuts);
  SideKernel K;
  K.setup(g, phi.base());
  std::vector<AngleRect> active;
  std::vector<double> reps;
  for (const AngleRect& r : pieces) {
    K.classify(g, fr.from_angle(r.lo1 + 0.5 * r.len1),
               fr.from_angle(r.lo2 + 0.5 * r.len2));
    if (!K.crossing) continue;
    active.push_back(r);
    reps.push_back(K.rep_sign);
  }
  if (active.empty()) {
    if (rep) rep->converged = true;
    return 0.0;
  }
  // one ladder over all crossing sub-rectangles; rep_sign is constant per
  // sub-rectangle, recovered from the rectangle the point falls in
  double total = 0.0;
  std::vector<double> parts;
  bool all_ok = true;
  for (size_t i = 0; i < active.size(); ++i) {
    SideKernel Ki = K;
    Ki.crossing = true;
    Ki.rep_sign = reps[i];
    auto f = [&phi, &fr, &Ki](double t1, double t2) {
      double v = phi.eval_angles(t1, t2);
      if (v == 0.0) return 0.0;
      return v * liouville_density(t1, t2) *
             Ki.eval(fr.from_angle(t1), fr.from_angle(t2));
    };
    QuadratureReport sub;
    parts.push_back(run_ladder(f, {active[i]}, q, &sub));
    all_ok = all_ok && sub.converged;
    if (rep)
      rep->estimates.insert(rep->estimates.end(), sub.estimates.begin(),
                            sub.estimates.end());
  }
  total = pairwise_sum(parts);
  if (rep) rep->converged = all_ok;
  return total;
}

double kernel_triangle_sides(const TestFunction& phi, const Geodesic& g3,
                             const Geodesic& g1, const Geodesic& g2,
                             const QuadratureSpec& q, QuadratureReport* rep) {
  const Frame& fr = phi.frame();
  const Geodesic* sides[3] = {&g3, &g1, &g2};
  std::vector<double> cuts;
  for (const Geodesic* g : sides) {
    cuts.push_back(fr.angle_of(g->from));
    cuts.push_back(fr.angle_of(g->to));
  }
  std::vector<AngleRect> pieces = split_rects_at(phi.support(), cuts, cuts);
  SideKernel base[3];
  for (int s = 0; s < 3; ++s) base[s].setup(*sides[s], phi.base());
  const double sign[3] = {1.0, -1.0, -1.0};

  std::vector<double> parts;
  bool all_ok = true;
  for (const AngleRect& r : pieces) {
    SideKernel K[3];
    bool any = false;
    BoundaryPoint c1 = fr.from_angle(r.lo1 + 0.5 * r.len1);
    BoundaryPoint c2 = fr.from_angle(r.lo2 + 0.5 * r.len2);
    for (int s = 0; s < 3; ++s) {
      K[s] = base[s];
      K[s].classify(*sides[s], c1, c2);
      any = any || K[s].crossing;
    }
    if (!any) continue;
    auto f = [&phi, &fr, &K, &sign](double t1, double t2) {
      double v = phi.eval_angles(t1, t2);
      if (v == 0.0) return 0.0;
      BoundaryPoint x = fr.from_angle(t1), y = fr.from_angle(t2);
      double k = 0.0;
      for (int s = 0; s < 3; ++s)
        if (K[s].crossing) k += sign[s] * K[s].eval(x, y);
      return v * liouville_density(t1, t2) * k;
    };
    QuadratureReport sub;
    parts.push_back(run_ladder(f, {r}, q, &sub));
    all_ok = all_ok && sub.converged;
    if (rep)
      rep->estimates.insert(rep->estimates.end(), sub.estimates.begin(),
                            sub.estimates.end());
  }
  if (rep) rep->converged = all_ok;
  return pairwise_sum(parts);
}

double kernel_triangle(const TestFunction& phi, const TriRecord& T,
                       const QuadratureSpec& q, QuadratureReport* rep) {
  return kernel_triangle_sides(phi, T.g3, T.g1, T.g2, q, rep);
}

FdResult fd_derivative(const std::function<double(double)>& f, double t0,
                       std::vector<double> steps) {
  if (steps.size() < 2)
    throw std::domain_error("need at least two FD steps");
  std::sort(steps.begin(), steps.end(), std::greater<double>());
  for (size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0)) throw std::domain_error("FD steps must be positive");
    if (i > 0 && steps[i] == steps[i - 1])
      throw std::domain_error("FD steps must be distinct");
  }
  FdResult out;
  size_t n = steps.size();
  for (size_t i = 0; i < n; ++i) {
    double h = steps[i];
    out.diffs.push_back((f(t0 + h) - f(t0 - h)) / (2.0 * h));
  }
  // Neville extrapolation in h^2
  std::vector<std::vector<double>> T(n);
  for (size_t i = 0; i < n; ++i) {
    T[i].resize(i + 1);
    T[i][0] = out.diffs[i];
    for (size_t j = 1; j <= i; ++j) {
      double ratio = steps[i - j] / steps[i];
      double r2 = ratio * ratio;
      T[i][j] = T[i][j - 1] + (T[i][j - 1] - T[i - 1][j - 1]) / (r2 - 1.0);
    }
  }
  out.value = T[n - 1][n - 1];
  out.error_estimate =
      std::abs(T[n - 1][n - 1] - T[n - 1][n - 2]) +
      std::abs(T[n - 1][n - 1] - T[n - 2][n - 2]);
  for (size_t i = 2; i < n; ++i)
    if (std::abs(out.diffs[i] - out.diffs[i - 1]) >
        std::abs(out.diffs[i - 1] - out.diffs[i - 2]) * (1.0 + 1e-12))
      out.warning = true;
  return out;
}

}  // namespace liouville
