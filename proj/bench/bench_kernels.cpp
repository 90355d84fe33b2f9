// Timing comparison of the serial reference kernels against the OpenMP
// variants on representative workloads. Build and run directly:
//   ./bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "ctmc/exec.hpp"
#include "ctmc/montecarlo.hpp"
#include "ctmc/perturbation.hpp"
#include "ctmc/qmatrix.hpp"
#include "ctmc/semigroup.hpp"

using namespace ctmc;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_best(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = clock_type::now();
    f();
    auto t1 = clock_type::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.3f ms %10.3f ms %8.2fx\n", name, serial * 1e3,
              parallel * 1e3, parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads available: %d\n", thread_count());
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp",
              "speedup");

  auto r = branching_qmatrix({0.3, -0.5, 0.2});
  auto a = immigration_resurrection({-0.5, 0.3, 0.2}, {-0.4, 0.4});
  Window window(60);
  TimeGrid grid = TimeGrid::with_steps(0.5, 128);

  report("series_solve n=30",
         time_best(repeats,
                   [&] { series_solve(r, window, grid, 30, 1e-12, false,
                                      Exec::serial); }),
         time_best(repeats, [&] {
           series_solve(r, window, grid, 30, 1e-12, false, Exec::parallel);
         }));

  TransitionFunction rfun = uniformization_solve(r, window, grid, 1e-12);
  report("volterra_solve",
         time_best(repeats,
                   [&] { volterra_solve(rfun, a, 0, 1e-8, Exec::serial); }),
         time_best(repeats, [&] {
           volterra_solve(rfun, a, 0, 1e-8, Exec::parallel);
         }));

  auto q = perturb(r, a);
  report("uniformization_solve",
         time_best(repeats,
                   [&] {
                     uniformization_solve(q, window, grid, 1e-12, 200000,
                                          Exec::serial);
                   }),
         time_best(repeats, [&] {
           uniformization_solve(q, window, grid, 1e-12, 200000,
                                Exec::parallel);
         }));

  report("ode_solve",
         time_best(repeats,
                   [&] { ode_solve(r, window, grid, 1e-8, false,
                                   Exec::serial); }),
         time_best(repeats, [&] {
           ode_solve(r, window, grid, 1e-8, false, Exec::parallel);
         }));

  report("weighted_occupancy 1e5",
         time_best(repeats,
                   [&] {
                     weighted_occupancy(r, a, 1, 1, 0.5, 100000, 7,
                                        1000000, Exec::serial);
                   }),
         time_best(repeats, [&] {
           weighted_occupancy(r, a, 1, 1, 0.5, 100000, 7, 1000000,
                              Exec::parallel);
         }));

  return 0;
}
