#include "ctmc/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "ctmc/quadrature.hpp"

namespace ctmc {

namespace {

// kernel * slice as a row operation: out[i][:] = sum_k kappa_ik m[k][:].
void kernel_times_slice(const WindowMatrix& kappa, const double* m, State size,
                        double* out) {
  for (State i = 0; i < size; ++i) {
    double* dst = out + static_cast<std::size_t>(i) * size;
    std::memset(dst, 0, sizeof(double) * size);
    for (std::size_t e = kappa.row_ptr[i]; e < kappa.row_ptr[i + 1]; ++e) {
      const double w = kappa.val[e];
      const double* src = m + static_cast<std::size_t>(kappa.col[e]) * size;
      for (State j = 0; j < size; ++j) dst[j] += w * src[j];
    }
  }
}

}  // namespace

SeriesResult series_expand(const SeriesScheme& scheme, const TimeGrid& grid,
                           int n_max, double tail_tol, bool keep_terms,
                           Exec exec) {
  if (n_max < 1) throw ConfigError("series needs n_max >= 1");
  const State size = scheme.kernel.size();
  const std::size_t points = grid.points;
  const std::size_t stride = static_cast<std::size_t>(size) * size;
  const bool par = exec == Exec::parallel;

  SeriesResult res;
  res.fn = TransitionFunction(size - 1, grid, "series", tail_tol);

  std::vector<double> term(points * stride, 0.0);
  std::vector<double> scratch(points * stride, 0.0);
  std::vector<double>& sum = res.fn.raw();

  std::vector<ExpPanel> panels;
  panels.reserve(size);
  for (State i = 0; i < size; ++i)
    panels.emplace_back(scheme.hold_rate[i], grid.step);

  // term 0: delta_ij e^{-rho_i t}
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(points); ++m) {
    double* slice = term.data() + m * stride;
    const double t = grid.time(m);
    for (State i = 0; i < size; ++i)
      slice[static_cast<std::size_t>(i) * size + i] =
          std::exp(-scheme.hold_rate[i] * t);
  }

  auto add_term = [&](int order) {
    const double* src = term.data();
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(sum.size()); ++v)
      sum[v] += src[v];
    if (keep_terms) {
      SeriesTerm st;
      st.order = order;
      st.values = term;
      res.terms.push_back(std::move(st));
    }
  };

  auto row_mass = [&]() {
    double mass = 0.0;
#pragma omp parallel for schedule(static) reduction(max : mass) if (par)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(points); ++m) {
      const double* slice = term.data() + m * stride;
      for (State i = 0; i < size; ++i) {
        double s = 0.0;
        const double* row = slice + static_cast<std::size_t>(i) * size;
        for (State j = 0; j < size; ++j) s += row[j];
        mass = std::max(mass, s);
      }
    }
    return mass;
  };

  add_term(0);
  res.terms_used = 1;
  res.tail_mass = row_mass();

  for (int n = 1; n <= n_max; ++n) {
    // scratch[t] = kernel * term[t]
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(points); ++m)
      kernel_times_slice(scheme.kernel, term.data() + m * stride, size,
                         scratch.data() + m * stride);

    // hold-rate convolution along t, overwriting `term` with term n
    std::memset(term.data(), 0, sizeof(double) * stride);
    for (std::size_t m = 1; m < points; ++m) {
      double* curr = term.data() + m * stride;
      const double* prev = term.data() + (m - 1) * stride;
      const double* g_curr = scratch.data() + m * stride;
      const double* g_prev = scratch.data() + (m - 1) * stride;
#pragma omp parallel for schedule(static) if (par)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i) {
        const ExpPanel& p = panels[i];
        const std::size_t off = static_cast<std::size_t>(i) * size;
        for (State j = 0; j < size; ++j)
          curr[off + j] = p.decay * prev[off + j] + p.w_prev * g_prev[off + j] +
                          p.w_curr * g_curr[off + j];
      }
    }

    add_term(n);
    res.terms_used = n + 1;
    res.tail_mass = row_mass();
    if (res.tail_mass <= tail_tol) {
      res.converged = true;
      break;
    }
  }
  if (res.tail_mass <= tail_tol) res.converged = true;
  return res;
}

SeriesResult series_solve(const RateMatrix& m, const Window& window,
                          const TimeGrid& grid, int n_max, double tail_tol,
                          bool keep_terms, Exec exec) {
  SeriesScheme scheme;
  scheme.kernel = snapshot(m, window);
  scheme.hold_rate = scheme.kernel.exit_rate;
  return series_expand(scheme, grid, n_max, tail_tol, keep_terms, exec);
}

SeriesResult series_solve_shifted(const RateMatrix& r,
                                  const BoundedPerturbation& a,
                                  const Window& window, const TimeGrid& grid,
                                  int n_max, double tail_tol, bool keep_terms,
                                  Exec exec) {
  RateMatrix q = perturb(r, a);
  ShiftedMatrices sm = shifted(q, a, r, window);
  WindowMatrix kernel;
  kernel.n = window.max_state;
  kernel.row_ptr.assign(kernel.size() + 1, 0);
  kernel.exit_rate.assign(kernel.size(), 0.0);
  kernel.window_leak.assign(kernel.size(), 0.0);
  for (State i = 0; i <= window.max_state; ++i) {
    for (const auto& e : sm.qprime[i]) {
      kernel.col.push_back(e.to);
      kernel.val.push_back(e.rate);
    }
    kernel.row_ptr[i + 1] = kernel.col.size();
  }
  SeriesScheme scheme;
  scheme.hold_rate.resize(window.size());
  for (State i = 0; i <= window.max_state; ++i)
    scheme.hold_rate[i] = r.exit_rate(i) + a.gamma();
  scheme.kernel = std::move(kernel);
  return series_expand(scheme, grid, n_max, tail_tol, keep_terms, exec);
}

namespace {

// y = G x with G the killed generator of w (diagonal -exit_rate).
void generator_times_vector(const WindowMatrix& w, const double* x,
                            State size, double* y) {
  for (State i = 0; i < size; ++i) {
    double acc = -w.exit_rate[i] * x[i];
    for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e)
      acc += w.val[e] * x[w.col[e]];
    y[i] = acc;
  }
}

// The columns of P' = G P evolve independently, so each one is integrated
// on its own with an L1-resident working set and the column loop carries
// the parallelism.
void march(const WindowMatrix& w, State size, const TimeGrid& grid,
           std::size_t substeps, TransitionFunction* full,
           std::vector<double>* final_only, double row_sum_cap, bool par) {
  if (final_only)
    final_only->assign(static_cast<std::size_t>(size) * size, 0.0);
  const double dt = grid.step / static_cast<double>(substeps);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(size); ++j) {
    std::vector<double> p(size, 0.0), k1(size), k2(size), k3(size), k4(size),
        tmp(size);
    p[j] = 1.0;
    if (full) full->at(0, static_cast<State>(j), static_cast<State>(j)) = 1.0;
    for (std::size_t m = 1; m < grid.points; ++m) {
      for (std::size_t s = 0; s < substeps; ++s) {
        generator_times_vector(w, p.data(), size, k1.data());
        for (State i = 0; i < size; ++i) tmp[i] = p[i] + 0.5 * dt * k1[i];
        generator_times_vector(w, tmp.data(), size, k2.data());
        for (State i = 0; i < size; ++i) tmp[i] = p[i] + 0.5 * dt * k2[i];
        generator_times_vector(w, tmp.data(), size, k3.data());
        for (State i = 0; i < size; ++i) tmp[i] = p[i] + dt * k3[i];
        generator_times_vector(w, tmp.data(), size, k4.data());
        for (State i = 0; i < size; ++i)
          p[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      if (full)
        for (State i = 0; i < size; ++i)
          full->at(m, i, static_cast<State>(j)) = p[i];
    }
    if (final_only)
      for (State i = 0; i < size; ++i)
        (*final_only)[static_cast<std::size_t>(i) * size + j] = p[i];
  }

  auto check_slice = [&](const double* slice, double t) {
    for (State i = 0; i < size; ++i) {
      double rs = 0.0;
      const double* row = slice + static_cast<std::size_t>(i) * size;
      for (State j = 0; j < size; ++j) rs += row[j];
      if (rs > row_sum_cap)
        throw SolverError("backward integration unstable at t=" +
                          std::to_string(t) + " (row sum " +
                          std::to_string(rs) + "); use a smaller grid step");
    }
  };
  if (full)
    for (std::size_t m = 1; m < grid.points; ++m)
      check_slice(full->slice(m), grid.time(m));
  if (final_only) check_slice(final_only->data(), grid.horizon);
}

}  // namespace

OdeResult ode_solve(const RateMatrix& m, const Window& window,
                    const TimeGrid& grid, double tol, bool validate_steps,
                    Exec exec) {
  WindowMatrix w = snapshot(m, window);
  const State size = w.size();
  const bool par = exec == Exec::parallel;
  // stay well inside the real-axis stability bound (~2.78) of RK4
  const double qmax = w.max_exit_rate();
  std::size_t substeps =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::ceil(grid.step * qmax / 1.5)));
  OdeResult res;
  res.substeps_per_step = substeps;
  res.fn = TransitionFunction(window.max_state, grid, "ode", tol);
  march(w, size, grid, substeps, &res.fn, nullptr, 1.0 + 10.0 * tol, par);
  if (validate_steps) {
    std::vector<double> halved;
    march(w, size, grid, substeps * 2, nullptr, &halved, 1.0 + 10.0 * tol,
          par);
    const double* last = res.fn.slice(grid.points - 1);
    double err = 0.0;
    for (std::size_t v = 0; v < halved.size(); ++v)
      err = std::max(err, std::abs(last[v] - halved[v]));
    res.step_check_error = err;
  }
  return res;
}

TransitionFunction uniformization_solve(const RateMatrix& m,
                                        const Window& window,
                                        const TimeGrid& grid, double eps,
                                        std::size_t max_terms, Exec exec) {
  if (!(eps > 0.0)) throw ConfigError("uniformization needs eps > 0");
  WindowMatrix w = snapshot(m, window);
  const State size = w.size();
  const std::size_t stride = static_cast<std::size_t>(size) * size;
  const bool par = exec == Exec::parallel;
  const double lambda = w.max_exit_rate();

  TransitionFunction out(window.max_state, grid, "uniform", eps);
  if (lambda == 0.0) {
    for (std::size_t t = 0; t < grid.points; ++t)
      for (State i = 0; i < size; ++i) out.at(t, i, i) = 1.0;
    return out;
  }

  const double lt_max = lambda * grid.horizon;
  {
    // crude a-priori bound on the term count before doing any work
    double needed = lt_max + 10.0 * std::sqrt(lt_max + 1.0) + 40.0;
    if (needed > static_cast<double>(max_terms))
      throw SolverError("uniformization needs about " +
                        std::to_string(static_cast<std::size_t>(needed)) +
                        " terms, above the budget of " +
                        std::to_string(max_terms));
  }

  // Poisson weights per grid time, evaluated in log space so horizons with
  // huge lambda*t do not underflow; the mass accumulator is compensated so
  // the stopping test survives long sums.
  std::vector<double> log_lt(grid.points), cdf(grid.points, 0.0),
      comp(grid.points, 0.0), weight(grid.points);
  for (std::size_t t = 1; t < grid.points; ++t)
    log_lt[t] = std::log(lambda * grid.time(t));

  std::vector<double> power(stride, 0.0), next(stride, 0.0);
  for (State i = 0; i < size; ++i)
    power[static_cast<std::size_t>(i) * size + i] = 1.0;

  for (std::size_t k = 0;; ++k) {
    if (k > max_terms)
      throw SolverError("uniformization exceeded the term budget of " +
                        std::to_string(max_terms));
    const double lg = std::lgamma(static_cast<double>(k) + 1.0);
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(grid.points);
         ++t) {
      double wk;
      if (t == 0) {
        wk = (k == 0) ? 1.0 : 0.0;
      } else {
        const double logw = -lambda * grid.time(t) +
                            static_cast<double>(k) * log_lt[t] - lg;
        wk = logw < -745.0 ? 0.0 : std::exp(logw);
      }
      weight[t] = wk;
      const double y = wk - comp[t];
      const double csum = cdf[t] + y;
      comp[t] = (csum - cdf[t]) - y;
      cdf[t] = csum;
      if (wk > 0.0) {
        double* dst = out.slice(t);
        const double* src = power.data();
        for (std::size_t v = 0; v < stride; ++v) dst[v] += wk * src[v];
      }
    }
    if (cdf[grid.points - 1] >= 1.0 - eps) break;
    if (weight[grid.points - 1] == 0.0 && static_cast<double>(k) > lt_max)
      break;  // weights underflowed past the mode

    // next = S * power with S = I + G/lambda
#pragma omp parallel for schedule(static) if (par)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i) {
      double* dst = next.data() + static_cast<std::size_t>(i) * size;
      const double* self = power.data() + static_cast<std::size_t>(i) * size;
      const double stay = 1.0 - w.exit_rate[i] / lambda;
      for (State j = 0; j < size; ++j) dst[j] = stay * self[j];
      for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e) {
        const double v = w.val[e] / lambda;
        const double* src =
            power.data() + static_cast<std::size_t>(w.col[e]) * size;
        for (State j = 0; j < size; ++j) dst[j] += v * src[j];
      }
    }
    power.swap(next);
  }
  return out;
}

double honesty_defect(const TransitionFunction& p, std::size_t t_index,
                      State i) {
  return 1.0 - p.row_sum(t_index, i);
}

std::vector<double> row_distribution(const WindowMatrix& w, State origin,
                                     double t, double eps,
                                     std::size_t max_terms) {
  const State size = w.size();
  std::vector<double> out(size, 0.0);
  const double lambda = w.max_exit_rate();
  if (lambda == 0.0 || t == 0.0) {
    out[origin] = 1.0;
    return out;
  }
  const double lt = lambda * t;
  std::vector<double> v(size, 0.0), vn(size);
  v[origin] = 1.0;
  const double log_lt = std::log(lt);
  double cdf = 0.0, comp = 0.0;  // Kahan-compensated Poisson mass
  for (std::size_t k = 0;; ++k) {
    // log-space Poisson weight, safe for huge lambda*t
    const double logw =
        -lt + static_cast<double>(k) * log_lt - std::lgamma(double(k) + 1.0);
    const double wk = logw < -745.0 ? 0.0 : std::exp(logw);
    const double y = wk - comp;
    const double csum = cdf + y;
    comp = (csum - cdf) - y;
    cdf = csum;
    if (wk > 0.0)
      for (State j = 0; j < size; ++j) out[j] += wk * v[j];
    if (cdf >= 1.0 - eps) break;
    // weights have underflowed past the mode: nothing left to add
    if (wk == 0.0 && static_cast<double>(k) > lt) break;
    if (k > max_terms)
      throw SolverError("row uniformization exceeded " +
                        std::to_string(max_terms) + " terms");
    // vn = v S (left action), scatter form
    for (State j = 0; j < size; ++j)
      vn[j] = v[j] * (1.0 - w.exit_rate[j] / lambda);
    for (State i = 0; i < size; ++i) {
      const double vi = v[i];
      if (vi == 0.0) continue;
      for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e)
        vn[w.col[e]] += vi * w.val[e] / lambda;
    }
    v.swap(vn);
  }
  return out;
}

double window_defect(const WindowMatrix& w, State origin, double t,
                     double eps) {
  std::vector<double> dist = row_distribution(w, origin, t, eps);
  double mass = 0.0;
  for (double x : dist) mass += x;
  return 1.0 - mass;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::regular_likely:
      return "regular-likely";
    case Verdict::explosive_likely:
      return "explosive-likely";
    default:
      return "inconclusive";
  }
}

ProbeResult regularity_probe(const RateMatrix& m, State origin, double horizon,
                             const std::vector<State>& window_schedule,
                             const ProbeConfig& cfg) {
  if (window_schedule.size() < 3)
    throw ConfigError("window schedule needs at least 3 entries");
  for (std::size_t k = 1; k < window_schedule.size(); ++k)
    if (window_schedule[k] <= window_schedule[k - 1])
      throw ConfigError("window schedule must be strictly increasing");

  ProbeResult res;
  for (State n : window_schedule) {
    WindowMatrix w = snapshot(m, Window(n));
    res.trace.push_back({n, window_defect(w, origin, horizon, cfg.eps)});
  }
  const double d_last = res.trace.back().defect;
  const double d_prev = res.trace[res.trace.size() - 2].defect;
  bool shrinking = d_last <= res.trace.front().defect + cfg.eps;
  if (d_last <= cfg.theta_reg && shrinking)
    res.verdict = Verdict::regular_likely;
  else if (d_last >= cfg.theta_exp && d_prev > 0.0 &&
           d_last >= cfg.plateau_ratio * d_prev)
    res.verdict = Verdict::explosive_likely;
  else
    res.verdict = Verdict::inconclusive;
  return res;
}

}  // namespace ctmc
