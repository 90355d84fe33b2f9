#include "ctmc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctmc/quadrature.hpp"

namespace ctmc {

PathRng path_rng(std::uint64_t master_seed, std::uint64_t path_index) {
  PathRng r(master_seed ^ (0x9e3779b97f4a7c15ULL * (path_index + 1)));
  r.next();  // decorrelate neighbouring streams
  return r;
}

double PathSample::first_jump() const {
  return jump_times.size() > 1 ? jump_times[1]
                               : std::numeric_limits<double>::infinity();
}

State PathSample::state_at(double t) const {
  if (dead_at(t)) throw ConfigError("path is censored before the query time");
  std::size_t k = jump_times.size();
  while (k > 1 && jump_times[k - 1] > t) --k;
  return states[k - 1];
}

PathSample sample_path_with_rng(const RateMatrix& r, State origin,
                                double horizon, PathRng& rng,
                                std::size_t max_jumps) {
  if (max_jumps < 1) throw ConfigError("max_jumps must be >= 1");
  PathSample path;
  path.horizon = horizon;
  path.jump_times.push_back(0.0);
  path.states.push_back(origin);
  State state = origin;
  double t = 0.0;
  for (;;) {
    SparseRow row = r.row(state);
    if (row.exit_rate <= 0.0) break;  // absorbing
    t += rng.exponential(row.exit_rate);
    if (t > horizon) break;
    // next state proportional to the off-diagonal rates
    double u = rng.uniform01() * row.exit_rate;
    State next = row.entries.back().to;
    for (const auto& e : row.entries) {
      if (u < e.rate) {
        next = e.to;
        break;
      }
      u -= e.rate;
    }
    path.jump_times.push_back(t);
    path.states.push_back(next);
    state = next;
    if (path.jump_count() >= max_jumps) {
      path.exploded = true;
      break;
    }
  }
  return path;
}

PathSample sample_path(const RateMatrix& r, State origin, double horizon,
                       std::uint64_t seed, std::size_t max_jumps) {
  PathRng rng(seed);
  return sample_path_with_rng(r, origin, horizon, rng, max_jumps);
}

double feynman_kac_weight(const PathSample& path, const BoundedPerturbation& a,
                          double from, double to) {
  if (!(0.0 <= from && from <= to))
    throw ConfigError("weight needs 0 <= from <= to");
  if (path.dead_at(to))
    throw ConfigError("weight is undefined past the censoring epoch");
  double integral = 0.0;
  const std::size_t n = path.states.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double seg_start = path.jump_times[k];
    const double seg_end =
        (k + 1 < n) ? path.jump_times[k + 1] : std::max(to, path.horizon);
    const double lo = std::max(seg_start, from);
    const double hi = std::min(seg_end, to);
    if (hi <= lo) continue;
    integral += a.inner().row(path.states[k]).exit_rate * (hi - lo);
  }
  return std::exp(-integral);
}

namespace {

struct BatchStats {
  double mean = 0.0;
  double std_error = 0.0;
};

// Fixed-order two-pass accumulation; identical at any thread count.
BatchStats reduce(const std::vector<double>& contrib) {
  BatchStats s;
  const std::size_t n = contrib.size();
  double sum = 0.0;
  for (double v : contrib) sum += v;
  s.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : contrib) {
    const double d = v - s.mean;
    ss += d * d;
  }
  if (n > 1)
    s.std_error = std::sqrt(ss / (static_cast<double>(n) * (n - 1.0)));
  return s;
}

}  // namespace

WeightedEstimate weighted_occupancy(const RateMatrix& r,
                                    const BoundedPerturbation& a, State i,
                                    State j, double t, std::size_t n_paths,
                                    std::uint64_t seed, std::size_t max_jumps,
                                    Exec exec) {
  if (n_paths < 100) throw ConfigError("need at least 100 paths");
  std::vector<double> contrib(n_paths, 0.0);
  std::vector<unsigned char> exploded(n_paths, 0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n_paths); ++p) {
    PathRng rng = path_rng(seed, static_cast<std::uint64_t>(p));
    PathSample path = sample_path_with_rng(r, i, t, rng, max_jumps);
    if (path.dead_at(t)) {
      exploded[p] = 1;
      continue;  // censored paths carry zero mass
    }
    if (path.state_at(t) == j)
      contrib[p] = feynman_kac_weight(path, a, 0.0, t);
  }
  BatchStats s = reduce(contrib);
  WeightedEstimate est;
  est.mean = s.mean;
  est.std_error = s.std_error;
  est.n_paths = n_paths;
  std::size_t ecount = 0;
  for (unsigned char e : exploded) ecount += e;
  est.exploded_fraction =
      static_cast<double>(ecount) / static_cast<double>(n_paths);
  return est;
}

WeightedEstimate jump_count_term(const RateMatrix& r,
                                 const BoundedPerturbation& a, State i,
                                 State j, double t, int n,
                                 std::size_t n_paths, std::uint64_t seed,
                                 Exec exec) {
  if (n < 0) throw ConfigError("jump count must be >= 0");
  WeightedEstimate est;
  est.n_paths = n_paths;
  if (n == 0) {
    // no randomness left once the hold survives to t: exact value
    est.mean = (i == j) ? std::exp(-(r.exit_rate(i) +
                                     a.inner().row(i).exit_rate) *
                                   t)
                        : 0.0;
    return est;
  }
  std::vector<double> contrib(n_paths, 0.0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n_paths); ++p) {
    PathRng rng = path_rng(seed, static_cast<std::uint64_t>(p));
    State state = i;
    double u = 0.0;
    double weight_integral = 0.0;
    bool feasible = true;
    for (int k = 0; k < n; ++k) {
      SparseRow row = r.row(state);
      if (row.exit_rate <= 0.0) {
        feasible = false;  // absorbed, cannot make n jumps
        break;
      }
      const double dt = rng.exponential(row.exit_rate);
      if (u + dt > t) {
        feasible = false;
        break;
      }
      weight_integral += a.inner().row(state).exit_rate * dt;
      u += dt;
      double pick = rng.uniform01() * row.exit_rate;
      State next = row.entries.back().to;
      for (const auto& e : row.entries) {
        if (pick < e.rate) {
          next = e.to;
          break;
        }
        pick -= e.rate;
      }
      state = next;
    }
    if (!feasible || state != j) continue;
    // survival of the final hold and its weight, integrated analytically
    const double tail = t - u;
    contrib[p] = std::exp(-weight_integral -
                          (r.exit_rate(j) + a.inner().row(j).exit_rate) * tail);
  }
  BatchStats s = reduce(contrib);
  est.mean = s.mean;
  est.std_error = s.std_error;
  return est;
}

RepresentationReport verify_representation(
    const RateMatrix& r, const BoundedPerturbation& a,
    const TransitionFunction& qfun, State i, State j, std::size_t t_index,
    std::size_t n_paths, std::uint64_t seed, std::size_t max_jumps,
    Exec exec) {
  if (t_index >= qfun.grid().points)
    throw ConfigError("t_index outside the grid");
  const TimeGrid& grid = qfun.grid();
  const double t = grid.time(t_index);
  const State window_max = qfun.max_state();
  const bool par = exec == Exec::parallel;

  std::vector<double> contrib(n_paths, 0.0);
  std::vector<unsigned char> exploded(n_paths, 0);
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(n_paths); ++p) {
    PathRng rng = path_rng(seed, static_cast<std::uint64_t>(p));
    PathSample path = sample_path_with_rng(r, i, t, rng, max_jumps);
    if (path.exploded) exploded[p] = 1;

    // phi[m] = M(t - s_m) * sum_{l != k} a_{k l} Q_lj(s_m), k = xi(t - s_m)
    std::vector<double> phi(t_index + 1, 0.0);
    std::size_t seg = 0;
    const std::size_t nseg = path.states.size();
    double exponent = 0.0;  // int_0^{seg start} a
    SparseRow arow = a.inner().row(path.states[0]);
    double a_state = arow.exit_rate;
    for (std::size_t d = 0; d <= t_index; ++d) {
      const double u = grid.time(d);
      if (path.dead_at(u)) break;  // later slices are censored too
      while (seg + 1 < nseg && path.jump_times[seg + 1] <= u) {
        const double len = path.jump_times[seg + 1] - path.jump_times[seg];
        exponent += a_state * len;
        ++seg;
        arow = a.inner().row(path.states[seg]);
        a_state = arow.exit_rate;
      }
      const double m_u =
          std::exp(-(exponent + a_state * (u - path.jump_times[seg])));
      double rowdot = 0.0;
      for (const auto& e : arow.entries) {
        if (e.to > window_max) continue;  // outside the killed window
        rowdot += e.rate * qfun(t_index - d, e.to, j);
      }
      phi[t_index - d] = m_u * rowdot;
      if (d == t_index && !path.dead_at(t) && path.states[seg] == j)
        contrib[p] += m_u;  // terminal weighted occupancy
    }
    contrib[p] += trapezoid(phi.data(), phi.size(), grid.step);
  }

  BatchStats s = reduce(contrib);
  RepresentationReport rep;
  rep.estimate = s.mean;
  rep.std_error = s.std_error;
  rep.deterministic = qfun(t_index, i, j);
  rep.residual = std::abs(rep.estimate - rep.deterministic);
  rep.within_3sigma = rep.residual <= 3.0 * rep.std_error;
  rep.n_paths = n_paths;
  std::size_t ecount = 0;
  for (unsigned char e : exploded) ecount += e;
  rep.exploded_fraction =
      static_cast<double>(ecount) / static_cast<double>(n_paths);
  return rep;
}

std::vector<double> sample_holding_times(const RateMatrix& r, State state,
                                         std::size_t count,
                                         std::uint64_t seed) {
  const double rate = r.exit_rate(state);
  if (!(rate > 0.0)) throw ConfigError("state is absorbing");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    PathRng rng = path_rng(seed, k);
    out[k] = rng.exponential(rate);
  }
  return out;
}

KsResult ks_exponential(std::vector<double> samples, double rate,
                        double alpha) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  double d = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = -std::expm1(-rate * samples[k]);
    const double lo = static_cast<double>(k) / n;
    const double hi = static_cast<double>(k + 1) / n;
    d = std::max({d, f - lo, hi - f});
  }
  KsResult res;
  res.statistic = d;
  res.threshold =
      std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(double(n));
  res.passed = d <= res.threshold;
  return res;
}

}  // namespace ctmc
