// Timing harness for the parallel quadrature kernel. Runs the same batch of
// shear kernels with the full thread count and with one thread, checks the
// results are bitwise identical (the cell reduction is a fixed pairwise
// tree), and prints the speedup.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "liouville/cocycle.hpp"
#include "liouville/quadrature.hpp"

using namespace liouville;

namespace {

double run_batch(const TestFunction& phi, const FareyArena& arena,
                 const std::vector<int>& ids, const QuadratureSpec& q,
                 std::vector<double>& out) {
  out.assign(ids.size(), 0.0);
  auto t0 = std::chrono::steady_clock::now();
  for (size_t i = 0; i < ids.size(); ++i)
    out[i] = kernel_triangle(phi, arena.tri(ids[i]), q);
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  double radius = 5.0;
  int reps = 2;
  if (argc > 1) radius = std::atof(argv[1]);
  if (argc > 2) reps = std::atoi(argv[2]);

  HPoint O{0.5, std::sqrt(3.0) / 2.0};
  TestFunction phi = builtin_test_functions(O)[1];  // holder05
  FareyArena arena(O, radius);
  std::vector<int> ids = arena.members(radius);
  QuadratureSpec q;
  q.base_grid = 16;
  q.fixed_level = 2;

  std::printf("batch: %zu triangle kernels, radius %.2f, fixed level %d\n",
              ids.size(), radius, q.fixed_level);

  std::vector<double> par, ser;
  int nthreads = quadrature_thread_count();

  // warm up caches and the thread pool once before timing
  run_batch(phi, arena, ids, q, par);

  double tp = 1e300, ts = 1e300;
  for (int r = 0; r < reps; ++r) {
    set_quadrature_threads(0);
    tp = std::min(tp, run_batch(phi, arena, ids, q, par));
    set_quadrature_threads(1);
    ts = std::min(ts, run_batch(phi, arena, ids, q, ser));
  }
  set_quadrature_threads(0);

  bool identical = par.size() == ser.size() &&
                   std::memcmp(par.data(), ser.data(),
                               par.size() * sizeof(double)) == 0;

  std::printf("threads=%d   %.3fs   (%.1f kernels/s)\n", nthreads, tp,
              ids.size() / tp);
  std::printf("threads=1   %.3fs   (%.1f kernels/s)\n", ts, ids.size() / ts);
  std::printf("speedup     %.2fx\n", ts / tp);
  std::printf("bitwise identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
