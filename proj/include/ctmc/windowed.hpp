#ifndef CTMC_WINDOWED_HPP
#define CTMC_WINDOWED_HPP

#include <vector>

#include "ctmc/qmatrix.hpp"

namespace ctmc {

/// Killed truncation of a generator to a window, in CSR form. Off-diagonal
/// entries leaving the window are dropped; their rate stays in exit_rate,
/// so the truncated generator is substochastic and its semigroup is the
/// monotone lower approximation of the minimal transition function.
struct WindowMatrix {
  State n = 0;  // states 0..n
  std::vector<std::size_t> row_ptr;
  std::vector<State> col;
  std::vector<double> val;
  std::vector<double> exit_rate;    // full q_i, including dropped mass
  std::vector<double> window_leak;  // rate mass dropped per row

  State size() const { return n + 1; }
  double max_exit_rate() const;

  /// y += alpha * (row i of the generator applied to x), diagonal included.
  /// Generator row i is: -exit_rate[i] at i, val at col.
  void apply_row(State i, const double* x, double alpha, double* y) const;
};

WindowMatrix snapshot(const RateMatrix& m, const Window& window);

}  // namespace ctmc

#endif
