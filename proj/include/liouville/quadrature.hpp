#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "liouville/earthquake.hpp"
#include "liouville/farey.hpp"
#include "liouville/test_function.hpp"

// Quadrature against the Liouville measure in disk-model endpoint angles,
// where the density is 0.5 / sin^2((theta1-theta2)/2). Grids refine on a
// global dyadic ladder; cells use a fixed 5x5 Gauss-Legendre rule; cell sums
// are reduced by a fixed pairwise tree, so results do not depend on the
// number of threads (LIOUVILLE_THREADS caps parallelism).

namespace liouville {

struct QuadratureSpec {
  int base_grid = 16;          // cells per quarter-circle at level 0
  double refinement_tol = 1e-7;
  int max_levels = 4;
  int fixed_level = -1;   // when >= 0, evaluate exactly this level, no test
  double abs_floor = 1e-12;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double last, double previous)
      : std::runtime_error(what), last_estimate(last),
        previous_estimate(previous) {}
  double last_estimate;
  double previous_estimate;
};

struct QuadratureReport {
  std::vector<double> estimates;  // one per evaluated level
  bool converged = false;
};

int quadrature_thread_count();
// n >= 1 overrides the thread count (benchmarks, determinism checks);
// n <= 0 restores the environment-derived value
void set_quadrature_threads(int n);
double pairwise_sum(const std::vector<double>& v);
double liouville_density(double t1, double t2);

// Dyadic ladder of tensor Gauss rules over the rectangles; stops when two
// successive levels agree to refinement_tol relatively (or abs_floor
// absolutely); throws QuadratureError otherwise.
double integrate_rects(const std::function<double(double, double)>& f,
                       const std::vector<AngleRect>& rects,
                       const QuadratureSpec& q,
                       QuadratureReport* rep = nullptr);

// Split each rectangle along the given angle lines (per axis), dropping
// empty slivers; used to isolate kernel discontinuities on cell boundaries.
std::vector<AngleRect> split_rects_at(const std::vector<AngleRect>& rects,
                                      const std::vector<double>& cuts1,
                                      const std::vector<double>& cuts2);

double liouville_integral(const TestFunction& phi, const QuadratureSpec& q,
                          QuadratureReport* rep = nullptr);

// Integral of h -> phi(E^{-1}(h)); support rectangles are padded by the
// map's certified angular displacement (plus `extra_pad`, which FD ladders
// use so every evaluation shares one grid).
double pullback_integral(const TestFunction& phi, const EarthquakeMap& E,
                         const QuadratureSpec& q, double extra_pad = 0.0,
                         QuadratureReport* rep = nullptr);

// Same integral as pullback_integral, computed by substituting k = E^{-1}h:
// phi(k) times the Jacobian of E against the Liouville density, over phi's
// own support split at the given cut angles. With cuts at every support
// endpoint of E the integrand is smooth on each sub-rectangle and the grid
// does not depend on the factor amounts, so a family of maps sharing one
// factor structure (an FD ladder in the amounts) sees one common grid with
// no kink error.
double pullback_integral_substituted(const TestFunction& phi,
                                     const EarthquakeMap& E,
                                     const std::vector<double>& cuts,
                                     const QuadratureSpec& q,
                                     QuadratureReport* rep = nullptr);

// The cosine kernels: quadrature of phi(h) times the tangent cosine at the
// crossing with g, taken with the h-orientation that meets g from its far
// side, so reversing h leaves the integrand unchanged and the value matches
// d/da of the pullback under the elementary map at a = 0.
double kernel_geodesic(const TestFunction& phi, const Geodesic& g,
                       const QuadratureSpec& q, QuadratureReport* rep = nullptr);

// Combined kernel cos(g3) - cos(g1) - cos(g2) in one quadrature.
double kernel_triangle_sides(const TestFunction& phi, const Geodesic& g3,
                             const Geodesic& g1, const Geodesic& g2,
                             const QuadratureSpec& q,
                             QuadratureReport* rep = nullptr);
double kernel_triangle(const TestFunction& phi, const TriRecord& T,
                       const QuadratureSpec& q, QuadratureReport* rep = nullptr);

struct FdResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool warning = false;           // central differences failed to improve
  std::vector<double> diffs;      // one central difference per step
};

// Central differences at each step with Richardson extrapolation across the
// (descending) step ladder.
FdResult fd_derivative(const std::function<double(double)>& f, double t0,
                       std::vector<double> steps);

}  // namespace liouville
