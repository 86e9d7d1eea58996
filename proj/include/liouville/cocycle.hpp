#pragma once

#include <functional>
#include <string>
#include <vector>

#include "liouville/farey.hpp"

// Signed weights on lamination leaves. The number alpha(T) attached to a
// triangle is the sum of the weights of the leaves crossed by the tree path
// from the base triangle to T, so alpha(child) - alpha(parent) is exactly the
// weight of the shared side.

namespace liouville {

class TransverseCocycle {
 public:
  TransverseCocycle(std::function<double(const Leaf&)> weight, double bound,
                    std::string label);

  double weight(const Leaf& l) const;  // clamped check against bound
  double bound() const { return bound_; }
  const std::string& label() const { return label_; }

 private:
  std::function<double(const Leaf&)> weight_;
  double bound_ = 0.0;
  std::string label_;
};

TransverseCocycle make_dirac(const Leaf& g);
TransverseCocycle make_depth_decay(double base, double ratio);
TransverseCocycle make_seeded_bounded(long long seed, double bound);
TransverseCocycle combine(double ca, const TransverseCocycle& a, double cb,
                          const TransverseCocycle& b);

// Weights accumulated root-down along the ancestor chain, so path additivity
// holds exactly in floating point.
double alpha(const TransverseCocycle& c, const FareyArena& arena, int id);

struct CocyclePath {
  TransverseCocycle direction;
  double scale = 0.0;  // realizes t * direction
};

struct GrowthRow {
  int id;
  double alpha;
  int tree_depth;
  double D;
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  double fitted_slope = 0.0;   // least-squares |alpha| vs tree_depth
  double max_ratio = 0.0;      // max |alpha| / (1 + tree_depth)
  bool linear_growth = false;  // max_ratio <= cocycle bound
};

GrowthReport alpha_growth_report(const TransverseCocycle& c,
                                 const FareyArena& arena, double radius);

}  // namespace liouville
