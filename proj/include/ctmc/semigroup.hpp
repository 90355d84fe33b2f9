#ifndef CTMC_SEMIGROUP_HPP
#define CTMC_SEMIGROUP_HPP

#include <cstdint>
#include <vector>

#include "ctmc/exec.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/qmatrix.hpp"
#include "ctmc/windowed.hpp"

namespace ctmc {

/// One term of the jump-count expansion: the probability contribution of
/// trajectories making exactly `order` jumps. Values are slice-major like
/// TransitionFunction.
struct SeriesTerm {
  int order = 0;
  std::vector<double> values;

  double at(std::size_t t_index, State size, State i, State j) const {
    return values[(t_index * size + i) * size + j];
  }
};

struct SeriesResult {
  TransitionFunction fn;
  std::vector<SeriesTerm> terms;  // only filled when keep_terms is set
  double tail_mass = 0.0;         // largest row mass of the last term
  int terms_used = 0;
  bool converged = false;
};

/// Generic jump expansion with per-state hold rates rho_i and a nonnegative
/// kernel: term 0 is delta_ij e^{-rho_i t}, term n+1 convolves the kernel
/// rows against term n under the e^{-rho_i s} hold factor. The exponential
/// factor of each convolution panel is integrated exactly against a linear
/// interpolant, so terms stay nonnegative and partial sums monotone.
struct SeriesScheme {
  std::vector<double> hold_rate;        // rho_i
  WindowMatrix kernel;                  // kappa_ik, may include diagonal
};

SeriesResult series_expand(const SeriesScheme& scheme, const TimeGrid& grid,
                           int n_max, double tail_tol, bool keep_terms = false,
                           Exec exec = Exec::parallel);

/// Jump expansion of the minimal transition function of M on a window:
/// rho_i = q_i, kernel = off-diagonal rates inside the window.
SeriesResult series_solve(const RateMatrix& m, const Window& window,
                          const TimeGrid& grid, int n_max,
                          double tail_tol = 1e-8, bool keep_terms = false,
                          Exec exec = Exec::parallel);

/// Shifted expansion of Q = R + A: hold rates r_i + gamma and kernel
/// qprime (off-diagonal of Q plus the nonnegative shifted diagonal).
SeriesResult series_solve_shifted(const RateMatrix& r,
                                  const BoundedPerturbation& a,
                                  const Window& window, const TimeGrid& grid,
                                  int n_max, double tail_tol = 1e-8,
                                  bool keep_terms = false,
                                  Exec exec = Exec::parallel);

struct OdeResult {
  TransitionFunction fn;
  double step_check_error = 0.0;  // sup difference against a halved-step pass
  std::size_t substeps_per_step = 1;
};

/// Fixed-step classical 4th-order integration of the backward equation
/// P' = G P on the killed window, P(0) = I. Steps are subdivided to stay
/// inside the explicit stability region of the largest exit rate, and a
/// halved-step validation pass bounds the local error. Throws SolverError
/// if a row sum drifts past 1 + 10*tol.
OdeResult ode_solve(const RateMatrix& m, const Window& window,
                    const TimeGrid& grid, double tol = 1e-8,
                    bool validate_steps = true, Exec exec = Exec::parallel);

/// Poisson-weighted power series of the stochasticized window matrix,
/// truncated once the neglected Poisson tail drops below eps at the
/// horizon. Entries are within eps of the killed-truncation semigroup.
/// Throws SolverError when more than max_terms would be needed.
TransitionFunction uniformization_solve(const RateMatrix& m,
                                        const Window& window,
                                        const TimeGrid& grid,
                                        double eps = 1e-10,
                                        std::size_t max_terms = 200000,
                                        Exec exec = Exec::parallel);

/// 1 - sum_j P_ij(t): mass lost to explosion or window truncation.
double honesty_defect(const TransitionFunction& p, std::size_t t_index,
                      State i);

/// Distribution row e_i exp(t G) of the killed window generator, via the
/// Poisson-weighted series (log-space weights, safe for huge rate bounds).
std::vector<double> row_distribution(const WindowMatrix& w, State origin,
                                     double t, double eps = 1e-12,
                                     std::size_t max_terms = 2000000);

/// Defect 1 - sum of row_distribution.
double window_defect(const WindowMatrix& w, State origin, double t,
                     double eps = 1e-12);

enum class Verdict { regular_likely, explosive_likely, inconclusive };

const char* to_string(Verdict v);

struct ProbeConfig {
  double theta_reg = 1e-4;     // defect below this at the largest window
  double theta_exp = 5e-2;     // plateau above this
  double plateau_ratio = 0.5;  // successive defect ratio counted as flat
  double eps = 1e-12;          // row solver tolerance
};

struct DefectPoint {
  State window;
  double defect;
};

struct ProbeResult {
  Verdict verdict = Verdict::inconclusive;
  std::vector<DefectPoint> trace;
};

/// Grows the window over the schedule and classifies the defect sequence:
/// vanishing defect means the chain keeps full mass (regular), a plateau
/// means mass genuinely escapes to infinity (explosive).
ProbeResult regularity_probe(const RateMatrix& m, State origin, double horizon,
                             const std::vector<State>& window_schedule,
                             const ProbeConfig& cfg = {});

}  // namespace ctmc

#endif
