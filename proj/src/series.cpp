#include "liouville/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <memory>
#include <string>

#include "liouville/earthquake.hpp"

namespace liouville {

namespace {

double decay_weight(int depth, double D, double u, double nu) {
  return (1.0 + depth) * std::exp(-(1.0 + nu) * D - std::abs(u));
}

// Parallel map with deterministic output order; the first worker exception
// is rethrown after the loop (quadrature calls can throw).
template <class F>
std::vector<double> parallel_terms(int n, F&& f) {
  std::vector<double> out(size_t(n), 0.0);
  std::exception_ptr err = nullptr;
  int nth = quadrature_thread_count();
  (void)nth;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nth)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      out[size_t(i)] = f(i);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(liouville_series_err)
#endif
      {
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

void check_same_base(const HPoint& a, const HPoint& b) {
  if (hyp_dist(a, b) > 1e-12)
    throw std::invalid_argument(
        "arena base point differs from the test function base point");
}

std::vector<double> alphas_for(const TransverseCocycle& sd,
                               const FareyArena& arena,
                               const std::vector<int>& ids) {
  std::vector<double> out(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) out[i] = alpha(sd, arena, ids[i]);
  return out;
}

std::vector<double> vertex_cut_angles(const EarthquakeMap& E, const Frame& fr) {
  std::vector<double> cuts;
  for (const PieceSpec& s : E.piece_specs()) {
    cuts.push_back(fr.angle_of(s.g.from));
    cuts.push_back(fr.angle_of(s.g.to));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

double agreement_scale(double fd) {
  return std::max(std::abs(fd), kAgreementFloor);
}

// phi composed with the inverse of E, with support rectangles padded by the
// certified angular displacement. The Hoelder norm bound is rescaled by a
// sampled Lipschitz estimate of the inverse boundary action (the sup bound
// stays exact, which is what the constructor certificate checks).
TestFunction transported_test_function(const TestFunction& phi,
                                       const EarthquakeMap& E) {
  double pad = E.angular_displacement_bound() + 1e-3;
  std::vector<AngleRect> rects;
  double R = 0.0;
  for (const AngleRect& r : phi.support()) {
    AngleRect p(wrap_angle(r.lo1 - pad), std::min(r.len1 + 2.0 * pad, 2.0 * M_PI),
                wrap_angle(r.lo2 - pad), std::min(r.len2 + 2.0 * pad, 2.0 * M_PI));
    rects.push_back(p);
    R = std::max(R, support_radius_for_rect(phi.base(), p));
  }
  const Frame& fr = phi.frame();
  const int ns = 4096;
  const double step = 2.0 * M_PI / ns;
  double lip = 1.0;
  double prev = fr.angle_of(E.apply_inverse(fr.from_angle(0.0)));
  for (int k = 1; k <= ns; ++k) {
    double img = fr.angle_of(E.apply_inverse(fr.from_angle(k * step)));
    lip = std::max(lip, ccw_gap(prev, img) / step);
    prev = img;
  }
  double norm = phi.holder_norm_bound() *
                std::pow(1.5 * lip, phi.holder_exponent());
  auto ev = [phi, E](double t1, double t2) {
    const Frame& f = phi.frame();
    return phi.eval(Geodesic(E.apply_inverse(f.from_angle(t1)),
                             E.apply_inverse(f.from_angle(t2))));
  };
  return TestFunction(phi.base(), phi.name() + "+map", ev, rects, R + 1e-6,
                      phi.holder_exponent(), norm, phi.balanced());
}

// Empirical decay constant from the outermost computed unit shell, a safety
// factor of 4, and the geometric weight of the next four shells with a
// fitted geometric continuation beyond them.
double tail_bound_from(const TestFunction& phi, const FareyArena& arena,
                       const std::vector<DecayRow>& rows, double n) {
  double shell_max = 0.0, all_max = 0.0;
  for (const DecayRow& r : rows) {
    all_max = std::max(all_max, r.ratio);
    if (arena.tri(r.id).center_dist > n - 1.0)
      shell_max = std::max(shell_max, r.ratio);
  }
  double c = shell_max > 0.0 ? shell_max : all_max;
  if (c == 0.0) return 0.0;
  std::vector<double> bins =
      shell_geometry_sums(phi.base(), n + 4.0, phi.holder_exponent());
  int lo = std::max(0, int(std::floor(n - 1e-9)));
  double total = 0.0, last = 0.0, prev = 0.0, rho = 0.0;
  for (int k = lo; k < int(bins.size()); ++k) {
    double b = bins[size_t(k)];
    total += b;
    if (prev > 0.0 && b > 0.0) rho = std::max(rho, b / prev);
    prev = b;
    if (b > 0.0) last = b;
  }
  rho = std::min(std::max(rho, 0.05), 0.95);
  total += last * rho / (1.0 - rho);
  return 4.0 * c * phi.holder_norm_bound() * total;
}

}  // namespace

std::vector<double> shell_geometry_sums(const HPoint& O, double radius,
                                        double nu) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  int nbins = int(std::ceil(radius + 1e-12));
  std::vector<double> bins(size_t(nbins), 0.0);
  struct Job {
    Fraction a, b;  // gate side; the new triangle is on its far side
    Fraction opp;   // opposite vertex of the parent, fixes the new vertex
    int depth;
  };
  std::vector<Job> stack;
  const std::array<Fraction, 3> base = {Fraction(0, 1), Fraction(1, 1),
                                        Fraction::inf()};
  for (int k = 0; k < 3; ++k)
    stack.push_back(Job{base[k], base[(k + 1) % 3], base[(k + 2) % 3], 1});
  // Every descendant lies beyond a side of the current triangle and the
  // incenter sits exactly (log 3)/2 from each side, so a subtree whose root
  // incenter is more than (log 3)/2 past the radius never comes back; 1.5 is
  // that margin with room to spare. Nothing is stored, so the enumeration
  // only costs time.
  const double prune = radius + 1.5;
  while (!stack.empty()) {
    Job j = stack.back();
    stack.pop_back();
    Fraction sum(j.a.p + j.b.p, j.a.q + j.b.q);
    Fraction nv = (sum == j.opp) ? Fraction(j.a.p - j.b.p, j.a.q - j.b.q) : sum;
    std::array<Fraction, 3> v = {j.a, j.b, nv};
    std::sort(v.begin(), v.end(), frac_less);
    double d = hyp_dist(O, incenter(v[0], v[1], v[2]));
    if (d <= radius) {
      Geodesic g3(j.a.boundary(), j.b.boundary());
      double D = dist_to_geodesic(O, g3).dist;
      double u =
          std::log(std::abs(normalizing_map(g3, O)(nv.boundary()).value()));
      bins[size_t(std::min(nbins - 1, int(d)))] +=
          decay_weight(j.depth, D, u, nu);
    }
    if (d <= prune) {
      stack.push_back(Job{j.a, nv, j.b, j.depth + 1});
      stack.push_back(Job{nv, j.b, j.a, j.depth + 1});
    }
  }
  return bins;
}

DerivativeReport tangent_series_value(const TestFunction& phi,
                                      const TransverseCocycle& sd,
                                      double n_max, const QuadratureSpec& q,
                                      const FareyArena* arena) {
  if (!(n_max > 0.0))
    throw std::invalid_argument("truncation radius must be positive");
  std::unique_ptr<FareyArena> own;
  if (!arena) {
    own = std::make_unique<FareyArena>(phi.base(), n_max);
    arena = own.get();
  } else {
    check_same_base(arena->base(), phi.base());
  }
  std::vector<int> ids = arena->members(n_max);
  std::vector<double> al = alphas_for(sd, *arena, ids);
  std::vector<double> ker = parallel_terms(int(ids.size()), [&](int i) {
    return al[size_t(i)] == 0.0
               ? 0.0
               : kernel_triangle(phi, arena->tri(ids[size_t(i)]), q);
  });

  DerivativeReport rep;
  const double nu = phi.holder_exponent();
  const double norm = phi.holder_norm_bound();
  for (size_t i = 0; i < ids.size(); ++i) {
    if (al[i] == 0.0) continue;
    const TriRecord& t = arena->tri(ids[i]);
    DecayRow row;
    row.id = t.id;
    row.depth = t.depth;
    row.D = t.D;
    row.u = t.u;
    row.sigma = al[i];
    row.kernel = ker[i];
    row.ratio =
        std::abs(al[i] * ker[i]) / (norm * decay_weight(t.depth, t.D, t.u, nu));
    rep.decay_table.push_back(row);
  }

  std::vector<double> radii;
  for (int k = 1; k < n_max - 1e-9; ++k) radii.push_back(double(k));
  radii.push_back(n_max);
  for (double r : radii) {
    std::vector<double> terms;
    for (size_t i = 0; i < ids.size(); ++i)
      if (arena->tri(ids[i]).center_dist <= r)
        terms.push_back(al[i] * ker[i]);
    rep.partial_sums.push_back({r, pairwise_sum(terms)});
  }
  rep.series_value = rep.partial_sums.back().second;
  rep.tail_bound = tail_bound_from(phi, *arena, rep.decay_table, n_max);

  // The sum converges by shrinking increments; a widening increment past the
  // settling-in radii means the data violates the decay the series needs.
  for (size_t k = 3; k < rep.partial_sums.size(); ++k) {
    if (rep.partial_sums[k].first < 7.0) continue;
    double g0 = std::abs(rep.partial_sums[k].second -
                         rep.partial_sums[k - 1].second);
    double g1 = std::abs(rep.partial_sums[k - 1].second -
                         rep.partial_sums[k - 2].second);
    double g2 = std::abs(rep.partial_sums[k - 2].second -
                         rep.partial_sums[k - 3].second);
    double slack = 1e-10 * (1.0 + std::abs(rep.partial_sums[k].second));
    if (g0 > 2.0 * std::max(g1, g2) + slack)
      throw SeriesError("partial sums stopped decaying at radius " +
                            std::to_string(rep.partial_sums[k].first),
                        rep);
  }
  return rep;
}

double boundary_term(const TestFunction& phi, const TransverseCocycle& sd,
                     double n, const QuadratureSpec& q,
                     const FareyArena& arena) {
  check_same_base(arena.base(), phi.base());
  std::vector<int> fam = arena.spanning_family(n);
  std::vector<double> al = alphas_for(sd, arena, fam);
  std::vector<double> ker = parallel_terms(int(fam.size()), [&](int i) {
    return al[size_t(i)] == 0.0
               ? 0.0
               : kernel_geodesic(phi, arena.tri(fam[size_t(i)]).g3, q);
  });
  std::vector<double> terms(fam.size());
  for (size_t i = 0; i < fam.size(); ++i) terms[i] = al[i] * ker[i];
  return pairwise_sum(terms);
}

DerivativeReport verify_finite_truncation(const TestFunction& phi,
                                          const TransverseCocycle& sd,
                                          const FareyArena& arena,
                                          const std::vector<int>& family,
                                          const std::vector<double>& t_steps,
                                          const QuadratureSpec& q, double t0) {
  check_same_base(arena.base(), phi.base());
  if (family.empty()) throw std::invalid_argument("empty spanning family");
  DerivativeReport rep;
  std::vector<int> closure = arena.lower_closure(family);
  std::vector<double> a_cl = alphas_for(sd, arena, closure);
  std::vector<double> a_fam = alphas_for(sd, arena, family);
  EarthquakeMap shear = truncated_shear(sd, arena, family);

  std::vector<double> cuts = vertex_cut_angles(shear, phi.frame());
  QuadratureSpec qf = q;
  if (qf.fixed_level < 0) qf.fixed_level = 1;
  auto F = [&phi, &shear, &cuts, &qf](double t) {
    return pullback_integral_substituted(phi, shear.scaled(t), cuts, qf);
  };
  FdResult fd = fd_derivative(F, t0, t_steps);
  rep.fd_value = fd.value;
  rep.fd_error = fd.error_estimate;
  rep.fd_warning = fd.warning;

  std::vector<double> kc, kf;
  if (t0 == 0.0) {
    kc = parallel_terms(int(closure.size()), [&](int i) {
      return a_cl[size_t(i)] == 0.0
                 ? 0.0
                 : kernel_triangle(phi, arena.tri(closure[size_t(i)]), q);
    });
    kf = parallel_terms(int(family.size()), [&](int i) {
      return a_fam[size_t(i)] == 0.0
                 ? 0.0
                 : kernel_geodesic(phi, arena.tri(family[size_t(i)]).g3, q);
    });
  } else {
    // At a nonzero base time the derivative sees the transported test
    // function against the transported lamination: the time-t0 map fixes
    // every support endpoint of a factor relative to its own arc, so each
    // factor's generator pushes forward to the elementary shear field of the
    // image geodesic.
    EarthquakeMap shear_t0 = shear.scaled(t0);
    TestFunction psi = transported_test_function(phi, shear_t0);
    kc = parallel_terms(int(closure.size()), [&](int i) {
      if (a_cl[size_t(i)] == 0.0) return 0.0;
      const TriRecord& T = arena.tri(closure[size_t(i)]);
      return kernel_triangle_sides(psi, shear_t0.apply_to_geodesic(T.g3),
                                   shear_t0.apply_to_geodesic(T.g1),
                                   shear_t0.apply_to_geodesic(T.g2), q);
    });
    kf = parallel_terms(int(family.size()), [&](int i) {
      if (a_fam[size_t(i)] == 0.0) return 0.0;
      return kernel_geodesic(
          psi, shear_t0.apply_to_geodesic(arena.tri(family[size_t(i)]).g3), q);
    });
  }

  std::vector<double> terms(closure.size());
  for (size_t i = 0; i < closure.size(); ++i) terms[i] = a_cl[i] * kc[i];
  rep.identity_sum = pairwise_sum(terms);
  std::vector<double> bterms(family.size());
  for (size_t i = 0; i < family.size(); ++i) bterms[i] = a_fam[i] * kf[i];
  double B = pairwise_sum(bterms);
  double nlab = 0.0;
  for (int id : family)
    nlab = std::max(nlab, arena.tri(id).center_dist);
  rep.boundary_terms.push_back({nlab, B});
  rep.series_value = rep.identity_sum + B;
  rep.agreement =
      std::abs(rep.identity_sum + B - fd.value) / agreement_scale(fd.value);
  return rep;
}

DerivativeReport verify_series_derivative(const TestFunction& phi,
                                     const TransverseCocycle& sd, double n,
                                     const std::vector<double>& t_steps,
                                     const QuadratureSpec& q,
                                     const FareyArena* arena) {
  std::unique_ptr<FareyArena> own;
  if (!arena) {
    own = std::make_unique<FareyArena>(phi.base(), n);
    arena = own.get();
  } else {
    check_same_base(arena->base(), phi.base());
  }
  DerivativeReport rep = tangent_series_value(phi, sd, n, q, arena);
  std::vector<int> family = arena->spanning_family(n);
  DerivativeReport id_rep =
      verify_finite_truncation(phi, sd, *arena, family, t_steps, q, 0.0);
  rep.fd_value = id_rep.fd_value;
  rep.fd_error = id_rep.fd_error;
  rep.fd_warning = id_rep.fd_warning;
  rep.identity_sum = id_rep.identity_sum;
  rep.agreement = id_rep.agreement;
  double B = id_rep.boundary_terms.front().second;
  rep.boundary_terms.clear();
  rep.boundary_terms.push_back({n, B});
  rep.vn_gap = std::abs(rep.series_value + B - rep.fd_value) /
               agreement_scale(rep.fd_value);
  return rep;
}

}  // namespace liouville
