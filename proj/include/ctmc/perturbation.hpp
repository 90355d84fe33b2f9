#ifndef CTMC_PERTURBATION_HPP
#define CTMC_PERTURBATION_HPP

#include <optional>
#include <vector>

#include "ctmc/exec.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/qmatrix.hpp"
#include "ctmc/semigroup.hpp"

namespace ctmc {

struct VolterraResult {
  TransitionFunction fn;
  bool converged = false;
  int iterations = 0;
  double last_gap = 0.0;
  std::vector<double> iterate_gaps;  // sup-norm gap after each sweep
};

/// Default sweep budget for a perturbation bound gamma on horizon T: the
/// contraction gains a factor gamma*T/m per sweep, so convergence is
/// factorial once m exceeds gamma*T.
int default_iter_max(double gamma, double horizon);

/// Reconstructs the perturbed semigroup from the unperturbed one by Picard
/// iteration of the renewal identity
///   Q(t) = int_0^t e^{-gamma(t-s)} R(t-s) A' Q(s) ds + R(t) e^{-gamma t},
/// with A' = A + gamma*I, starting from the inhomogeneous term. Each sweep
/// evaluates the convolution by trapezoid over per-slice matrix products.
VolterraResult volterra_solve(const TransitionFunction& rfun,
                              const BoundedPerturbation& a,
                              int iter_max = 0, double tol = 1e-10,
                              Exec exec = Exec::parallel,
                              bool start_from_zero = false);

struct FixedPointReport {
  double residual = 0.0;  // row-sum function against its own renewal identity
  bool base_honest = false;
  // residual of the constant-one candidate, only meaningful when the base
  // function is honest on the window
  std::optional<double> honest_one_residual;
};

/// Row sums x_i(t) of the perturbed function satisfy the same renewal
/// identity with inhomogeneous term e^{-gamma t} * (row sums of R); this
/// evaluates both sides and, when R is honest on the window, also checks
/// that the constant function 1 satisfies it.
FixedPointReport honesty_fixed_point_check(const TransitionFunction& rfun,
                                           const TransitionFunction& qfun,
                                           const BoundedPerturbation& a,
                                           double honest_tol = 1e-6,
                                           Exec exec = Exec::parallel);

struct TermCheckResult {
  std::vector<double> residual_by_order;
  double max_residual = 0.0;
};

/// Order-by-order consistency of the two jump expansions: the n-th shifted
/// term of Q must equal the cross convolution of lower R-terms with A'
/// against lower Q-terms plus e^{-gamma t} times the n-th R-term.
TermCheckResult term_decomposition_check(const RateMatrix& r,
                                         const BoundedPerturbation& a,
                                         const Window& window,
                                         const TimeGrid& grid, int n_max,
                                         Exec exec = Exec::parallel);

struct EquivalenceReport {
  ProbeResult base;       // R
  ProbeResult perturbed;  // R + A
  bool consistent = false;
};

/// Probes R and R+A over the same window schedule; decisive verdicts must
/// agree (a disagreement is reported, not asserted away).
EquivalenceReport regularity_equivalence_experiment(
    const RateMatrix& r, const BoundedPerturbation& a, State origin,
    double horizon, const std::vector<State>& window_schedule,
    const ProbeConfig& cfg = {});

}  // namespace ctmc

#endif
