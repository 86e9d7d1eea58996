#include "liouville/cocycle.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace liouville {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

TransverseCocycle::TransverseCocycle(std::function<double(const Leaf&)> weight,
                                     double bound, std::string label)
    : weight_(std::move(weight)), bound_(bound), label_(std::move(label)) {
  if (!(bound_ >= 0.0)) throw std::domain_error("cocycle bound must be >= 0");
}

double TransverseCocycle::weight(const Leaf& l) const {
  double w = weight_(l);
  if (std::abs(w) > bound_ * (1.0 + 1e-12))
    throw std::logic_error("cocycle weight exceeds declared bound on leaf " +
                           l.str());
  return w;
}

TransverseCocycle make_dirac(const Leaf& g) {
  return TransverseCocycle(
      [g](const Leaf& l) { return l == g ? 1.0 : 0.0; }, 1.0,
      "dirac:" + g.str());
}

TransverseCocycle make_depth_decay(double base, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::domain_error("depth-decay ratio must lie in (0,1)");
  return TransverseCocycle(
      [base, ratio](const Leaf& l) {
        return base * std::pow(ratio, double(leaf_depth(l)));
      },
      std::abs(base),
      "depth-decay:" + std::to_string(base) + "," + std::to_string(ratio));
}

TransverseCocycle make_seeded_bounded(long long seed, double bound) {
  if (!(bound >= 0.0)) throw std::domain_error("bound must be >= 0");
  return TransverseCocycle(
      [seed, bound](const Leaf& l) {
        uint64_t h = splitmix64(uint64_t(seed));
        for (long long v : l.key()) h = splitmix64(h ^ uint64_t(v));
        // top 53 bits -> [0,1), then stretch to [-bound, bound]
        double u = double(h >> 11) * 0x1.0p-53;
        return bound * (2.0 * u - 1.0);
      },
      bound, "seeded:" + std::to_string(seed) + "," + std::to_string(bound));
}

TransverseCocycle combine(double ca, const TransverseCocycle& a, double cb,
                          const TransverseCocycle& b) {
  return TransverseCocycle(
      [ca, a, cb, b](const Leaf& l) {
        return ca * a.weight(l) + cb * b.weight(l);
      },
      std::abs(ca) * a.bound() + std::abs(cb) * b.bound(),
      "combine(" + a.label() + "," + b.label() + ")");
}

double alpha(const TransverseCocycle& c, const FareyArena& arena, int id) {
  std::vector<int> chain;  // id and its strict ancestors
  for (int t = id; t >= 0; t = arena.tri(t).parent) chain.push_back(t);
  if (!chain.empty() && arena.tri(chain.back()).parent == -2)
    throw std::logic_error("ancestor chain leaves the arena");
  double sum = 0.0;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    sum += c.weight(arena.tri(*it).leaf3());
  return sum;
}

GrowthReport alpha_growth_report(const TransverseCocycle& c,
                                 const FareyArena& arena, double radius) {
  GrowthReport rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int id : arena.members(radius)) {
    const TriRecord& t = arena.tri(id);
    double a = alpha(c, arena, id);
    rep.rows.push_back(GrowthRow{id, a, t.depth, t.D});
    double x = double(t.depth), y = std::abs(a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    rep.max_ratio = std::max(rep.max_ratio, std::abs(a) / (1.0 + t.depth));
  }
  double n = double(rep.rows.size());
  double denom = n * sxx - sx * sx;
  rep.fitted_slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  rep.linear_growth = rep.max_ratio <= c.bound() * (1.0 + 1e-12);
  return rep;
}

}  // namespace liouville
