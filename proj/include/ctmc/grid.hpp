#ifndef CTMC_GRID_HPP
#define CTMC_GRID_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "ctmc/types.hpp"

namespace ctmc {

/// Uniform time grid 0, h, 2h, ..., T.
struct TimeGrid {
  double horizon = 0.0;
  double step = 0.0;
  std::size_t points = 0;  // horizon/step + 1

  TimeGrid() = default;
  TimeGrid(double horizon_, double step_);

  /// Grid with the given number of steps (points = steps + 1).
  static TimeGrid with_steps(double horizon, std::size_t steps) {
    return TimeGrid(horizon, horizon / static_cast<double>(steps));
  }

  double time(std::size_t m) const { return step * static_cast<double>(m); }
  std::size_t steps() const { return points - 1; }

  bool operator==(const TimeGrid&) const = default;
};

/// Grid-sampled substochastic matrices P(t) on a state window; values are
/// stored slice-major, i.e. contiguous (size x size) blocks per grid time.
class TransitionFunction {
 public:
  TransitionFunction() = default;
  TransitionFunction(State max_state, TimeGrid grid, std::string solver_id,
                     double tolerance);

  double operator()(std::size_t t_index, State i, State j) const {
    return data_[t_index * stride_ + i * size_ + j];
  }
  double& at(std::size_t t_index, State i, State j) {
    return data_[t_index * stride_ + i * size_ + j];
  }

  double* slice(std::size_t t_index) { return data_.data() + t_index * stride_; }
  const double* slice(std::size_t t_index) const {
    return data_.data() + t_index * stride_;
  }

  double row_sum(std::size_t t_index, State i) const;

  State max_state() const { return static_cast<State>(size_ - 1); }
  State size() const { return static_cast<State>(size_); }
  const TimeGrid& grid() const { return grid_; }
  const std::string& solver_id() const { return solver_id_; }
  double tolerance() const { return tolerance_; }
  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

 private:
  std::size_t size_ = 0;    // window size (max_state + 1)
  std::size_t stride_ = 0;  // size * size
  TimeGrid grid_;
  std::string solver_id_;
  double tolerance_ = 0.0;
  std::vector<double> data_;
};

}  // namespace ctmc

#endif
