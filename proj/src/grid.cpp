#include "ctmc/grid.hpp"

#include <cmath>

namespace ctmc {

namespace {
// Guard against accidentally requesting multi-gigabyte value tables.
constexpr std::size_t kMaxValues = 400u * 1000u * 1000u;
}  // namespace

TimeGrid::TimeGrid(double horizon_, double step_)
    : horizon(horizon_), step(step_) {
  if (!(step > 0.0)) throw ConfigError("grid step must be > 0");
  if (!(horizon >= step)) throw ConfigError("grid horizon must be >= step");
  double count = horizon / step;
  double rounded = std::round(count);
  if (std::abs(count - rounded) > 1e-9 * count)
    throw ConfigError("grid horizon must be an integer multiple of the step");
  points = static_cast<std::size_t>(rounded) + 1;
}

TransitionFunction::TransitionFunction(State max_state, TimeGrid grid,
                                       std::string solver_id, double tolerance)
    : size_(static_cast<std::size_t>(max_state) + 1),
      stride_(size_ * size_),
      grid_(grid),
      solver_id_(std::move(solver_id)),
      tolerance_(tolerance) {
  if (grid_.points == 0) throw ConfigError("empty time grid");
  if (stride_ > kMaxValues / grid_.points)
    throw ConfigError(
        "transition function would exceed the memory budget; shrink the "
        "window or the grid");
  data_.assign(grid_.points * stride_, 0.0);
}

double TransitionFunction::row_sum(std::size_t t_index, State i) const {
  const double* row = data_.data() + t_index * stride_ + i * size_;
  double s = 0.0;
  for (std::size_t j = 0; j < size_; ++j) s += row[j];
  return s;
}

}  // namespace ctmc
