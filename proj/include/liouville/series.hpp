#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "liouville/cocycle.hpp"
#include "liouville/quadrature.hpp"

// The deformation series: per-triangle cosine kernels weighted by the
// cocycle's accumulated values, truncated by the distance of the triangle
// incenter from the base point, with boundary terms over spanning families
// and finite-difference verification of the derivative identities.

namespace liouville {

struct DecayRow {
  int id = -1;
  int depth = 0;
  double D = 0.0;
  double u = 0.0;
  double sigma = 0.0;   // accumulated cocycle value at the triangle
  double kernel = 0.0;  // triangle kernel value
  double ratio = 0.0;   // |sigma*kernel| / (norm*(1+depth)*e^{-(1+nu)D-|u|})
};

struct DerivativeReport {
  std::vector<std::pair<double, double>> partial_sums;    // (n, S_n)
  std::vector<std::pair<double, double>> boundary_terms;  // (n, B_n)
  double tail_bound = 0.0;
  double fd_value = 0.0;
  double fd_error = 0.0;
  bool fd_warning = false;
  double series_value = 0.0;
  // series side of the finite-truncation identity: sum over the strict lower
  // closure of the family (the quantity the FD of the truncated pullback
  // equals exactly, up to quadrature and FD error)
  double identity_sum = 0.0;
  double agreement = 0.0;  // |identity_sum + B - fd| / max(|fd|, floor)
  double vn_gap = 0.0;     // |S_n + B - fd| / max(|fd|, floor), for context
  std::vector<DecayRow> decay_table;
};

class SeriesError : public std::runtime_error {
 public:
  SeriesError(const std::string& what, DerivativeReport rep)
      : std::runtime_error(what), report(std::move(rep)) {}
  DerivativeReport report;
};

inline constexpr double kAgreementFloor = 1e-9;

// Unit-shell sums of (1+depth)*exp(-(1+nu)*D - |u|) over triangles binned by
// d(O, incenter); streaming enumeration, nothing stored.
std::vector<double> shell_geometry_sums(const HPoint& O, double radius,
                                        double nu);

// Partial sums S_n over triangles with d(O, incenter) <= n, n = 1..n_max,
// with the per-triangle decay table and the extrapolated tail bound. The
// optional arena (radius >= n_max) avoids re-enumeration. Throws SeriesError
// when the partial sums lose Cauchy behavior beyond n = 6.
DerivativeReport tangent_series_value(const TestFunction& phi,
                                      const TransverseCocycle& sd,
                                      double n_max, const QuadratureSpec& q,
                                      const FareyArena* arena = nullptr);

double boundary_term(const TestFunction& phi, const TransverseCocycle& sd,
                     double n, const QuadratureSpec& q,
                     const FareyArena& arena);

// Finite-truncation derivative identity at the given family: FD of
// t -> pullback under the t-scaled truncated shear at t = t0, against the
// closure sum plus family boundary term. For t0 != 0 both the test function
// and the triangles are transported by the time-t0 map first.
DerivativeReport verify_finite_truncation(const TestFunction& phi,
                                          const TransverseCocycle& sd,
                                          const FareyArena& arena,
                                          const std::vector<int>& family,
                                          const std::vector<double>& t_steps,
                                          const QuadratureSpec& q,
                                          double t0 = 0.0);

// End-to-end check at truncation n: FD of the truncated pullback vs the
// series (identity agreement, V_n gap, boundary term, tail bound).
DerivativeReport verify_series_derivative(const TestFunction& phi,
                                     const TransverseCocycle& sd, double n,
                                     const std::vector<double>& t_steps,
                                     const QuadratureSpec& q,
                                     const FareyArena* arena = nullptr);

}  // namespace liouville
