#ifndef CTMC_QMATRIX_HPP
#define CTMC_QMATRIX_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctmc/types.hpp"

namespace ctmc {

struct RateEntry {
  State to;
  double rate;
};

/// One row of a generator: off-diagonal jump rates plus the total exit
/// rate q_i (the diagonal is -q_i and is never stored).
struct SparseRow {
  std::vector<RateEntry> entries;
  double exit_rate = 0.0;
};

/// Row generator of a stable conservative Q-matrix over states 0,1,2,...
/// Rows are produced on demand by a pure function of the state index, so a
/// matrix is immutable and safe to share across threads. Models whose rows
/// only exist up to some index carry a support bound; querying past it
/// throws UndefinedRowError.
class RateMatrix {
 public:
  using RowFn = std::function<SparseRow(State)>;

  RateMatrix(RowFn rows, std::optional<State> support_bound = std::nullopt,
             std::string name = "")
      : rows_(std::move(rows)),
        support_bound_(support_bound),
        name_(std::move(name)) {}

  SparseRow row(State i) const {
    if (support_bound_ && i > *support_bound_) throw UndefinedRowError(i);
    return rows_(i);
  }

  /// Total exit rate q_i of state i.
  double exit_rate(State i) const { return row(i).exit_rate; }

  std::optional<State> support_bound() const { return support_bound_; }
  const std::string& name() const { return name_; }

 private:
  RowFn rows_;
  std::optional<State> support_bound_;
  std::string name_;
};

/// A Q-matrix A with a finite uniform bound gamma >= a_i = -a_ii on the
/// exit rates, used as a bounded perturbation of another generator.
class BoundedPerturbation {
 public:
  BoundedPerturbation(RateMatrix inner, double gamma)
      : inner_(std::move(inner)), gamma_(gamma) {
    if (!(gamma >= 0.0))
      throw ModelError("perturbation bound gamma must be finite and >= 0");
  }

  const RateMatrix& inner() const { return inner_; }
  double gamma() const { return gamma_; }

  /// Exit rate a_i of the perturbation at state i (0 beyond its support).
  double exit_rate(State i) const { return inner_.exit_rate(i); }

 private:
  RateMatrix inner_;
  double gamma_;
};

enum class WindowPolicy { kill, reflect };

/// Finite truncation 0..max_state of the state space. Only the killing
/// policy is accepted: rates leading out of the window are dropped and the
/// lost mass shows up as honesty defect, which is exactly the minimal
/// transition function semantics under truncation.
struct Window {
  State max_state;
  WindowPolicy policy = WindowPolicy::kill;

  Window(State max_state_, WindowPolicy policy_ = WindowPolicy::kill)
      : max_state(max_state_), policy(policy_) {
    if (max_state < 1) throw ConfigError("window needs max_state >= 1");
    if (policy != WindowPolicy::kill)
      throw ConfigError(
          "only the kill window policy is valid for minimal-solution "
          "semantics");
  }

  State size() const { return max_state + 1; }
};

struct RowIssue {
  State row;
  std::string what;
};

/// Outcome of validating a generator on a window.
struct ValidationReport {
  bool passed = false;
  double max_residual = 0.0;            // worst |q_i - sum_j q_ij|
  std::vector<double> row_residuals;    // indexed by state
  std::vector<RowIssue> issues;         // negativity, undefined rows
  double window_tail_mass = 0.0;        // rate mass leaving the window
  std::string summary() const;
};

/// Checks stability, nonnegativity off the diagonal and conservativeness
/// of every row in the window. Residuals are measured relative to
/// max(1, q_i). Undefined rows are reported, not thrown.
ValidationReport validate(const RateMatrix& m, const Window& window,
                          double tol = 1e-10);

/// Elementwise sum Q = R + A of two generators on their common support.
RateMatrix perturb(const RateMatrix& r, const BoundedPerturbation& a);

/// Nonnegative matrices obtained by absorbing the perturbation bound into
/// the diagonal: qprime has diagonal gamma - a_i and the off-diagonal
/// entries of Q; aprime is A + gamma*I. Entrywise on a window.
struct ShiftedMatrices {
  State max_state;
  double gamma;
  std::vector<std::vector<RateEntry>> qprime;  // per-row, includes diagonal
  std::vector<std::vector<RateEntry>> aprime;  // per-row, includes diagonal

  double qprime_at(State i, State j) const;
  double aprime_at(State i, State j) const;
};

ShiftedMatrices shifted(const RateMatrix& q, const BoundedPerturbation& a,
                        const RateMatrix& r, const Window& window);

// ---- model zoo -----------------------------------------------------------

/// Branching generator: state i >= 1 jumps to i-1+m at rate i*b_m for each
/// offspring count m (b_1 is the diagonal), state 0 is absorbing.
/// Requires b_m >= 0 for m != 1 and sum_{m != 1} b_m = -b_1.
RateMatrix branching_qmatrix(const std::vector<double>& b);

/// Bounded perturbation with resurrection rates h_j out of state 0 and a
/// translation-invariant upward kick c on states i >= 1: a_ij = c_{j-i}
/// for j >= i. gamma = max(-h_0, -c_0).
BoundedPerturbation immigration_resurrection(const std::vector<double>& c,
                                             const std::vector<double>& h);

/// Pure birth chain i -> i+1 at rate coeff*(i+offset)^power; states with
/// zero rate are absorbing. power 1 with offset 0 is the Yule chain,
/// power 2 with offset 1 explodes.
RateMatrix power_birth(double coeff, int power, State offset);

/// Dense conservative generator from explicit off-diagonal triplets.
/// The support bound is the largest state mentioned.
RateMatrix triplet_qmatrix(
    const std::vector<std::tuple<State, State, double>>& entries,
    std::optional<State> states = std::nullopt);

/// Reproducible random conservative generator on 0..max_state, a few
/// off-diagonal rates per row. Used by the cross-validation suites.
RateMatrix random_conservative(State max_state, std::uint64_t seed,
                               double rate_scale = 1.0);

/// Bounded perturbation wrapper for an arbitrary finite-support generator;
/// gamma is scanned from the rows.
BoundedPerturbation bounded_from_matrix(RateMatrix a);

}  // namespace ctmc

#endif
