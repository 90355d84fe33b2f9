#ifndef CTMC_IBP_HPP
#define CTMC_IBP_HPP

#include <iosfwd>
#include <optional>

#include "ctmc/exec.hpp"
#include "ctmc/grid.hpp"
#include "ctmc/qmatrix.hpp"

namespace ctmc {

struct IbpValue {
  double value = 0.0;
  /// Rough bound on what the states beyond the window could still
  /// contribute to the k-sum: worst row defect of R times gamma times t.
  double window_tail_estimate = 0.0;
};

/// Diagonal side of the integration-by-parts identity:
/// sum_k int_0^t R_ik(s) a_k Q_kj(t-s) ds with a_k the exit rates of A.
IbpValue ibp_lhs(const TransitionFunction& rfun, const BoundedPerturbation& a,
                 const TransitionFunction& qfun, State i, State j,
                 std::size_t t_index);

/// Off-diagonal side plus the boundary terms:
/// sum_{l, m != l} int_0^t R_il(t-v) a_lm Q_mj(v) dv + R_ij(t) - Q_ij(t).
double ibp_rhs(const TransitionFunction& rfun, const BoundedPerturbation& a,
               const TransitionFunction& qfun, State i, State j,
               std::size_t t_index);

/// Sup over (t, i, j) of | Q(t) - R(t) - int_0^t R(s) A Q(t-s) ds |,
/// the matrix convolution form of the same identity. Both sides share the
/// trapezoid rule and grid so the quadrature bias largely cancels.
/// When `table` is set, one CSV line "t,i,j,lhs,rhs,residual" is written
/// per entry with lhs = Q - R and rhs the convolution.
double matrix_identity_residual(const TransitionFunction& rfun,
                                const BoundedPerturbation& a,
                                const TransitionFunction& qfun,
                                Exec exec = Exec::parallel,
                                std::ostream* table = nullptr);

}  // namespace ctmc

#endif
