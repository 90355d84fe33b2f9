#ifndef CTMC_MONTECARLO_HPP
#define CTMC_MONTECARLO_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "ctmc/exec.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/qmatrix.hpp"

namespace ctmc {

/// Counter-seeded splitmix64 stream. Each path owns one stream derived
/// from (master seed, path index), so batches are reproducible at any
/// thread count.
struct PathRng {
  std::uint64_t s;
  explicit PathRng(std::uint64_t seed) : s(seed) {}
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// Uniform on the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
  }
  double exponential(double rate) { return -std::log(uniform01()) / rate; }
};

PathRng path_rng(std::uint64_t master_seed, std::uint64_t path_index);

/// A simulated jump trajectory. jump_times[k] is the epoch state[k] was
/// entered; the list starts at 0 with the initial state. `exploded` marks
/// a path censored at max_jumps before the horizon.
struct PathSample {
  std::vector<double> jump_times;
  std::vector<State> states;
  double horizon = 0.0;
  bool exploded = false;

  double first_jump() const;
  std::size_t jump_count() const { return states.size() - 1; }
  /// State occupied at time t; requires the path to be alive at t.
  State state_at(double t) const;
  /// True when t lies past the censoring epoch of an exploded path.
  bool dead_at(double t) const {
    return exploded && t >= jump_times.back();
  }
};

/// Jump-chain construction: exponential holding with the row exit rate,
/// next state proportional to the off-diagonal rates. Absorbing states
/// hold forever.
PathSample sample_path(const RateMatrix& r, State origin, double horizon,
                       std::uint64_t seed, std::size_t max_jumps = 1000000);
PathSample sample_path_with_rng(const RateMatrix& r, State origin,
                                double horizon, PathRng& rng,
                                std::size_t max_jumps);

/// exp(-int_r^t a(xi_s) ds) along the path, evaluated exactly on the
/// piecewise-constant trajectory. Undefined (throws) if the path is dead
/// before t.
double feynman_kac_weight(const PathSample& path, const BoundedPerturbation& a,
                          double from, double to);

struct WeightedEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double exploded_fraction = 0.0;
};

/// Monte Carlo estimate of the weighted occupancy
/// E_i[ M_t 1{xi_t = j} ]; censored paths contribute zero.
WeightedEstimate weighted_occupancy(const RateMatrix& r,
                                    const BoundedPerturbation& a, State i,
                                    State j, double t, std::size_t n_paths,
                                    std::uint64_t seed,
                                    std::size_t max_jumps = 1000000,
                                    Exec exec = Exec::parallel);

/// Estimate of E_i[ M_t; exactly n jumps in (0,t], xi_t = j ]. The final
/// holding segment is integrated out analytically (its survival
/// probability and weight are known given the first n jumps), so the n = 0
/// term is exact with zero variance.
WeightedEstimate jump_count_term(const RateMatrix& r,
                                 const BoundedPerturbation& a, State i,
                                 State j, double t, int n,
                                 std::size_t n_paths, std::uint64_t seed,
                                 Exec exec = Exec::parallel);

struct RepresentationReport {
  double estimate = 0.0;       // Monte Carlo value of the renewal right side
  double std_error = 0.0;      // propagated from per-path contributions
  double deterministic = 0.0;  // Q_ij(t) from the deterministic solver
  double residual = 0.0;
  bool within_3sigma = false;
  double exploded_fraction = 0.0;
  std::size_t n_paths = 0;
};

/// Estimates the probabilistic renewal form of the perturbed semigroup:
/// the time convolution of weighted occupancies of the base chain against
/// the off-diagonal perturbation rates and the deterministic Q, plus the
/// terminal weighted occupancy; compares against Q_ij(t).
RepresentationReport verify_representation(const RateMatrix& r,
                                           const BoundedPerturbation& a,
                                           const TransitionFunction& qfun,
                                           State i, State j,
                                           std::size_t t_index,
                                           std::size_t n_paths,
                                           std::uint64_t seed,
                                           std::size_t max_jumps = 1000000,
                                           Exec exec = Exec::parallel);

/// Holding-time draws at a fixed state, for distributional checks.
std::vector<double> sample_holding_times(const RateMatrix& r, State state,
                                         std::size_t count,
                                         std::uint64_t seed);

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// One-sample Kolmogorov-Smirnov test against Exponential(rate), with the
/// asymptotic two-sided threshold at the given significance level.
KsResult ks_exponential(std::vector<double> samples, double rate,
                        double alpha = 0.001);

}  // namespace ctmc

#endif
