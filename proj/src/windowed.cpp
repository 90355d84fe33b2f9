#include "ctmc/windowed.hpp"

#include <algorithm>

namespace ctmc {

double WindowMatrix::max_exit_rate() const {
  double m = 0.0;
  for (double q : exit_rate) m = std::max(m, q);
  return m;
}

void WindowMatrix::apply_row(State i, const double* x, double alpha,
                             double* y) const {
  double acc = -exit_rate[i] * x[i];
  for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
    acc += val[k] * x[col[k]];
  y[i] += alpha * acc;
}

WindowMatrix snapshot(const RateMatrix& m, const Window& window) {
  WindowMatrix w;
  w.n = window.max_state;
  w.row_ptr.assign(w.size() + 1, 0);
  w.exit_rate.assign(w.size(), 0.0);
  w.window_leak.assign(w.size(), 0.0);
  for (State i = 0; i <= w.n; ++i) {
    SparseRow r = m.row(i);  // UndefinedRowError propagates
    w.exit_rate[i] = r.exit_rate;
    for (const auto& e : r.entries) {
      if (e.to > w.n) {
        w.window_leak[i] += e.rate;
        continue;
      }
      w.col.push_back(e.to);
      w.val.push_back(e.rate);
    }
    w.row_ptr[i + 1] = w.col.size();
  }
  return w;
}

}  // namespace ctmc
