#include "ctmc/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ctmc/quadrature.hpp"
#include "ctmc/windowed.hpp"

namespace ctmc {

namespace {

// A' = A + gamma*I restricted to the window, rows sorted by column.
WindowMatrix aprime_on_window(const BoundedPerturbation& a, State max_state) {
  WindowMatrix m;
  m.n = max_state;
  m.row_ptr.assign(m.size() + 1, 0);
  m.exit_rate.assign(m.size(), 0.0);
  m.window_leak.assign(m.size(), 0.0);
  for (State i = 0; i <= max_state; ++i) {
    SparseRow row = a.inner().row(i);
    const double diag = a.gamma() - row.exit_rate;  // a_ii + gamma >= 0
    std::vector<RateEntry> entries;
    entries.push_back({i, diag});
    for (const auto& e : row.entries) {
      if (e.to > max_state) {
        m.window_leak[i] += e.rate;
        continue;
      }
      entries.push_back(e);
    }
    std::sort(entries.begin(), entries.end(),
              [](const RateEntry& x, const RateEntry& y) { return x.to < y.to; });
    for (const auto& e : entries) {
      m.col.push_back(e.to);
      m.val.push_back(e.rate);
    }
    m.row_ptr[i + 1] = m.col.size();
  }
  return m;
}

// acc += w * K * Q for dense size x size slices.
void gemm_acc(double* acc, const double* k, const double* q, double w,
              State size) {
  for (State i = 0; i < size; ++i) {
    const double* krow = k + static_cast<std::size_t>(i) * size;
    double* arow = acc + static_cast<std::size_t>(i) * size;
    for (State l = 0; l < size; ++l) {
      const double f = w * krow[l];
      if (f == 0.0) continue;
      const double* qrow = q + static_cast<std::size_t>(l) * size;
      for (State j = 0; j < size; ++j) arow[j] += f * qrow[j];
    }
  }
}

}  // namespace

int default_iter_max(double gamma, double horizon) {
  return static_cast<int>(std::ceil(gamma * horizon)) + 40;
}

VolterraResult volterra_solve(const TransitionFunction& rfun,
                              const BoundedPerturbation& a, int iter_max,
                              double tol, Exec exec, bool start_from_zero) {
  const TimeGrid& grid = rfun.grid();
  const State size = rfun.size();
  const std::size_t stride = static_cast<std::size_t>(size) * size;
  const std::size_t points = grid.points;
  const double gamma = a.gamma();
  const double h = grid.step;
  const bool par = exec == Exec::parallel;
  if (iter_max <= 0) iter_max = default_iter_max(gamma, grid.horizon);

  const WindowMatrix ap = aprime_on_window(a, rfun.max_state());

  // kernel slices K(u) = e^{-gamma u} R(u) A', dense
  std::vector<double> kern(points * stride, 0.0);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t d = 0; d < static_cast<std::ptrdiff_t>(points); ++d) {
    const double damp = std::exp(-gamma * grid.time(d));
    const double* r = rfun.slice(d);
    double* k = kern.data() + d * stride;
    for (State i = 0; i < size; ++i) {
      const double* rrow = r + static_cast<std::size_t>(i) * size;
      double* krow = k + static_cast<std::size_t>(i) * size;
      for (State l = 0; l < size; ++l) {
        const double f = damp * rrow[l];
        if (f == 0.0) continue;
        for (std::size_t e = ap.row_ptr[l]; e < ap.row_ptr[l + 1]; ++e)
          krow[ap.col[e]] += f * ap.val[e];
      }
    }
  }

  // inhomogeneous term B(t) = R(t) e^{-gamma t}
  std::vector<double> inhom(points * stride);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(points); ++m) {
    const double damp = std::exp(-gamma * grid.time(m));
    const double* r = rfun.slice(m);
    double* b = inhom.data() + m * stride;
    for (std::size_t v = 0; v < stride; ++v) b[v] = damp * r[v];
  }

  VolterraResult res;
  res.fn = TransitionFunction(rfun.max_state(), grid, "volterra", tol);
  std::vector<double>& curr = res.fn.raw();
  if (start_from_zero)
    std::fill(curr.begin(), curr.end(), 0.0);
  else
    curr = inhom;
  std::vector<double> next(points * stride);

  for (int it = 1; it <= iter_max; ++it) {
#pragma omp parallel for schedule(dynamic) if (par)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(points); ++m) {
      double* out = next.data() + m * stride;
      std::memcpy(out, inhom.data() + m * stride, sizeof(double) * stride);
      for (std::ptrdiff_t l = 0; l <= m; ++l) {
        if (m == 0) break;
        const double w = (l == 0 || l == m) ? 0.5 * h : h;
        gemm_acc(out, kern.data() + (m - l) * stride,
                 curr.data() + l * stride, w, size);
      }
    }
    double gap = 0.0;
#pragma omp parallel for schedule(static) reduction(max : gap) if (par)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(curr.size());
         ++v)
      gap = std::max(gap, std::abs(next[v] - curr[v]));
    curr.swap(next);
    res.iterations = it;
    res.last_gap = gap;
    res.iterate_gaps.push_back(gap);
    if (gap <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

namespace {

// y = A' * x on the window, x indexed by state.
void aprime_apply(const WindowMatrix& ap, const double* x, double* y) {
  for (State i = 0; i < ap.size(); ++i) {
    double acc = 0.0;
    for (std::size_t e = ap.row_ptr[i]; e < ap.row_ptr[i + 1]; ++e)
      acc += ap.val[e] * x[ap.col[e]];
    y[i] = acc;
  }
}

// Residual of a candidate row-sum function x (points x size) against
// x_i(t) = trap_s e^{-gamma(t-s)} [R(t-s) A' x(s)]_i + e^{-gamma t} b_i(t).
double rowsum_identity_residual(const TransitionFunction& rfun,
                                const WindowMatrix& ap, double gamma,
                                const std::vector<double>& x,
                                const std::vector<double>& inhom_rows,
                                bool par) {
  const TimeGrid& grid = rfun.grid();
  const State size = rfun.size();
  const std::size_t points = grid.points;
  const double h = grid.step;

  // w(s) = A' x(s) per slice
  std::vector<double> wslice(points * size);
  for (std::size_t l = 0; l < points; ++l)
    aprime_apply(ap, x.data() + l * size, wslice.data() + l * size);

  double worst = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : worst) if (par)
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(points); ++m) {
    std::vector<double> rhs(size);
    const double damp_t = std::exp(-gamma * grid.time(m));
    for (State i = 0; i < size; ++i)
      rhs[i] = damp_t * inhom_rows[m * size + i];
    for (std::ptrdiff_t l = 0; l <= m && m > 0; ++l) {
      const double w = (l == 0 || l == m) ? 0.5 * h : h;
      const double damp = std::exp(-gamma * grid.time(m - l));
      const double* r = rfun.slice(m - l);
      const double* ws = wslice.data() + l * size;
      for (State i = 0; i < size; ++i) {
        const double* rrow = r + static_cast<std::size_t>(i) * size;
        double acc = 0.0;
        for (State k = 0; k < size; ++k) acc += rrow[k] * ws[k];
        rhs[i] += w * damp * acc;
      }
    }
    for (State i = 0; i < size; ++i)
      worst = std::max(worst, std::abs(x[m * size + i] - rhs[i]));
  }
  return worst;
}

}  // namespace

FixedPointReport honesty_fixed_point_check(const TransitionFunction& rfun,
                                           const TransitionFunction& qfun,
                                           const BoundedPerturbation& a,
                                           double honest_tol, Exec exec) {
  if (rfun.grid() != qfun.grid() || rfun.size() != qfun.size())
    throw ConfigError("fixed-point check needs matching grids and windows");
  const TimeGrid& grid = rfun.grid();
  const State size = rfun.size();
  const std::size_t points = grid.points;
  const bool par = exec == Exec::parallel;
  const WindowMatrix ap = aprime_on_window(a, rfun.max_state());

  std::vector<double> x(points * size), rrows(points * size);
  double rdefect = 0.0;
  for (std::size_t m = 0; m < points; ++m)
    for (State i = 0; i < size; ++i) {
      x[m * size + i] = qfun.row_sum(m, i);
      rrows[m * size + i] = rfun.row_sum(m, i);
      rdefect = std::max(rdefect, 1.0 - rrows[m * size + i]);
    }

  FixedPointReport rep;
  rep.residual =
      rowsum_identity_residual(rfun, ap, a.gamma(), x, rrows, par);
  rep.base_honest = rdefect <= honest_tol;
  if (rep.base_honest) {
    std::vector<double> ones(points * size, 1.0);
    rep.honest_one_residual =
        rowsum_identity_residual(rfun, ap, a.gamma(), ones, rrows, par);
  }
  return rep;
}

TermCheckResult term_decomposition_check(const RateMatrix& r,
                                         const BoundedPerturbation& a,
                                         const Window& window,
                                         const TimeGrid& grid, int n_max,
                                         Exec exec) {
  if (n_max < 0) throw ConfigError("term check needs n_max >= 0");
  const bool par = exec == Exec::parallel;
  const State size = window.size();
  const std::size_t stride = static_cast<std::size_t>(size) * size;
  const std::size_t points = grid.points;
  const double gamma = a.gamma();
  const double h = grid.step;

  SeriesResult rser =
      series_solve(r, window, grid, std::max(1, n_max), 0.0, true, exec);
  SeriesResult qser = series_solve_shifted(r, a, window, grid,
                                           std::max(1, n_max), 0.0, true, exec);
  const WindowMatrix ap = aprime_on_window(a, window.max_state);

  // cross factors W_p(s) = A' Q^{(p)}(s)
  std::vector<std::vector<double>> wp(static_cast<std::size_t>(n_max));
  for (int p = 0; p < n_max; ++p) {
    wp[p].assign(points * stride, 0.0);
    const auto& qterm = qser.terms[p].values;
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(points); ++s) {
      const double* q = qterm.data() + s * stride;
      double* w = wp[p].data() + s * stride;
      for (State l = 0; l < size; ++l) {
        double* wrow = w + static_cast<std::size_t>(l) * size;
        for (std::size_t e = ap.row_ptr[l]; e < ap.row_ptr[l + 1]; ++e) {
          const double v = ap.val[e];
          const double* qrow = q + static_cast<std::size_t>(ap.col[e]) * size;
          for (State j = 0; j < size; ++j) wrow[j] += v * qrow[j];
        }
      }
    }
  }

  TermCheckResult res;
  res.residual_by_order.resize(static_cast<std::size_t>(n_max) + 1, 0.0);
  std::vector<double> rhs(points * stride);
  for (int n = 0; n <= n_max; ++n) {
    const auto& rterm = rser.terms[n].values;
#pragma omp parallel for schedule(dynamic) if (par)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(points); ++m) {
      double* out = rhs.data() + m * stride;
      const double damp_t = std::exp(-gamma * grid.time(m));
      const double* rt = rterm.data() + m * stride;
      for (std::size_t v = 0; v < stride; ++v) out[v] = damp_t * rt[v];
      for (int p = 0; p <= n - 1; ++p) {
        const auto& rvals = rser.terms[n - p - 1].values;
        for (std::ptrdiff_t l = 0; l <= m && m > 0; ++l) {
          const double w = (l == 0 || l == m) ? 0.5 * h : h;
          const double damp = std::exp(-gamma * grid.time(m - l));
          gemm_acc(out, rvals.data() + (m - l) * stride,
                   wp[p].data() + l * stride, w * damp, size);
        }
      }
    }
    const auto& qterm = qser.terms[n].values;
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst) if (par)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(rhs.size());
         ++v)
      worst = std::max(worst, std::abs(rhs[v] - qterm[v]));
    res.residual_by_order[n] = worst;
    res.max_residual = std::max(res.max_residual, worst);
  }
  return res;
}

EquivalenceReport regularity_equivalence_experiment(
    const RateMatrix& r, const BoundedPerturbation& a, State origin,
    double horizon, const std::vector<State>& window_schedule,
    const ProbeConfig& cfg) {
  EquivalenceReport rep;
  rep.base = regularity_probe(r, origin, horizon, window_schedule, cfg);
  RateMatrix q = perturb(r, a);
  rep.perturbed = regularity_probe(q, origin, horizon, window_schedule, cfg);
  const bool base_decisive = rep.base.verdict != Verdict::inconclusive;
  const bool pert_decisive = rep.perturbed.verdict != Verdict::inconclusive;
  rep.consistent = !(base_decisive && pert_decisive &&
                     rep.base.verdict != rep.perturbed.verdict);
  return rep;
}

}  // namespace ctmc
