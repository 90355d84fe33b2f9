#include "ctmc/ibp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <vector>

#include "ctmc/quadrature.hpp"
#include "ctmc/windowed.hpp"

namespace ctmc {

namespace {

void check_compatible(const TransitionFunction& rfun,
                      const TransitionFunction& qfun) {
  if (rfun.grid() != qfun.grid() || rfun.size() != qfun.size())
    throw ConfigError("the two transition functions must share grid and window");
}

// off-diagonal part of A on the window, CSR
WindowMatrix offdiag_on_window(const BoundedPerturbation& a, State max_state) {
  Window w(max_state);
  return snapshot(a.inner(), w);
}

}  // namespace

IbpValue ibp_lhs(const TransitionFunction& rfun, const BoundedPerturbation& a,
                 const TransitionFunction& qfun, State i, State j,
                 std::size_t t_index) {
  check_compatible(rfun, qfun);
  const State size = rfun.size();
  std::vector<double> exit(size);
  for (State k = 0; k < size; ++k) exit[k] = a.inner().row(k).exit_rate;

  std::vector<double> f(t_index + 1, 0.0);
  double worst_defect = 0.0;
  for (std::size_t m = 0; m <= t_index; ++m) {
    double acc = 0.0, rmass = 0.0;
    for (State k = 0; k < size; ++k) {
      const double rik = rfun(m, i, k);
      rmass += rik;
      acc += rik * exit[k] * qfun(t_index - m, k, j);
    }
    f[m] = acc;
    worst_defect = std::max(worst_defect, 1.0 - rmass);
  }
  IbpValue out;
  out.value = trapezoid(f.data(), f.size(), rfun.grid().step);
  out.window_tail_estimate = std::max(0.0, worst_defect) * a.gamma() *
                             rfun.grid().time(t_index);
  return out;
}

double ibp_rhs(const TransitionFunction& rfun, const BoundedPerturbation& a,
               const TransitionFunction& qfun, State i, State j,
               std::size_t t_index) {
  check_compatible(rfun, qfun);
  const State size = rfun.size();
  const WindowMatrix off = offdiag_on_window(a, rfun.max_state());

  std::vector<double> f(t_index + 1, 0.0);
  std::vector<double> y(size);
  for (std::size_t v = 0; v <= t_index; ++v) {
    // y_l = sum_{m != l} a_lm Q_mj(v)
    for (State l = 0; l < size; ++l) {
      double acc = 0.0;
      for (std::size_t e = off.row_ptr[l]; e < off.row_ptr[l + 1]; ++e)
        acc += off.val[e] * qfun(v, off.col[e], j);
      y[l] = acc;
    }
    double acc = 0.0;
    for (State l = 0; l < size; ++l) acc += rfun(t_index - v, i, l) * y[l];
    f[v] = acc;
  }
  const double conv = trapezoid(f.data(), f.size(), rfun.grid().step);
  return conv + rfun(t_index, i, j) - qfun(t_index, i, j);
}

double matrix_identity_residual(const TransitionFunction& rfun,
                                const BoundedPerturbation& a,
                                const TransitionFunction& qfun, Exec exec,
                                std::ostream* table) {
  check_compatible(rfun, qfun);
  const State size = rfun.size();
  const std::size_t stride = static_cast<std::size_t>(size) * size;
  const TimeGrid& grid = rfun.grid();
  const std::size_t points = grid.points;
  const double h = grid.step;
  const bool par = exec == Exec::parallel;
  const WindowMatrix amat = offdiag_on_window(a, rfun.max_state());
  std::vector<double> exit(size);
  for (State k = 0; k < size; ++k) exit[k] = a.inner().row(k).exit_rate;

  // AQ(v) = A Q(v) per slice (diagonal -a_l folded in)
  std::vector<double> aq(points * stride);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(points); ++v) {
    const double* q = qfun.slice(v);
    double* dst = aq.data() + v * stride;
    for (State l = 0; l < size; ++l) {
      double* drow = dst + static_cast<std::size_t>(l) * size;
      const double* qrow = q + static_cast<std::size_t>(l) * size;
      const double al = exit[l];
      for (State j = 0; j < size; ++j) drow[j] = -al * qrow[j];
      for (std::size_t e = amat.row_ptr[l]; e < amat.row_ptr[l + 1]; ++e) {
        const double w = amat.val[e];
        const double* src = q + static_cast<std::size_t>(amat.col[e]) * size;
        for (State j = 0; j < size; ++j) drow[j] += w * src[j];
      }
    }
  }

  std::vector<double> conv(points * stride, 0.0);
#pragma omp parallel for schedule(dynamic) if (par)
  for (std::ptrdiff_t m = 1; m < static_cast<std::ptrdiff_t>(points); ++m) {
    double* out = conv.data() + m * stride;
    for (std::ptrdiff_t l = 0; l <= m; ++l) {
      const double w = (l == 0 || l == m) ? 0.5 * h : h;
      const double* r = rfun.slice(l);
      const double* s = aq.data() + (m - l) * stride;
      for (State i = 0; i < size; ++i) {
        const double* rrow = r + static_cast<std::size_t>(i) * size;
        double* orow = out + static_cast<std::size_t>(i) * size;
        for (State k = 0; k < size; ++k) {
          const double f = w * rrow[k];
          if (f == 0.0) continue;
          const double* srow = s + static_cast<std::size_t>(k) * size;
          for (State j = 0; j < size; ++j) orow[j] += f * srow[j];
        }
      }
    }
  }

  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst) if (par)
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(points); ++m) {
    const double* q = qfun.slice(m);
    const double* r = rfun.slice(m);
    const double* c = conv.data() + m * stride;
    for (std::size_t v = 0; v < stride; ++v)
      worst = std::max(worst, std::abs(q[v] - r[v] - c[v]));
  }

  if (table) {
    *table << "t,i,j,lhs,rhs,residual\n";
    char buf[160];
    for (std::size_t m = 0; m < points; ++m)
      for (State i = 0; i < size; ++i)
        for (State j = 0; j < size; ++j) {
          const double lhs = qfun(m, i, j) - rfun(m, i, j);
          const double rhs = conv[m * stride + i * size + j];
          std::snprintf(buf, sizeof buf, "%.17g,%u,%u,%.17g,%.17g,%.17g\n",
                        grid.time(m), i, j, lhs, rhs, lhs - rhs);
          *table << buf;
        }
  }
  return worst;
}

}  // namespace ctmc
