// Shared model fixtures for the test and acceptance suites.
#ifndef CTMC_TESTS_FIXTURES_HPP
#define CTMC_TESTS_FIXTURES_HPP

#include <vector>

#include "ctmc/qmatrix.hpp"

namespace fixtures {

inline ctmc::RateMatrix two_state() {
  return ctmc::triplet_qmatrix({{0, 1, 1.0}, {1, 0, 1.0}}, 2u);
}

// A = [[-2, 2], [0, 0]], gamma = 2
inline ctmc::BoundedPerturbation two_state_kick() {
  return ctmc::bounded_from_matrix(ctmc::triplet_qmatrix({{0, 1, 2.0}}, 2u));
}

inline ctmc::BoundedPerturbation zero_perturbation(ctmc::State states) {
  return ctmc::bounded_from_matrix(ctmc::triplet_qmatrix({}, states));
}

// Desk-scale subcritical branching model with immigration and resurrection.
inline ctmc::RateMatrix example1_r() {
  return ctmc::branching_qmatrix({0.3, -0.5, 0.2});
}

inline ctmc::BoundedPerturbation example1_a() {
  return ctmc::immigration_resurrection({-0.5, 0.3, 0.2}, {-0.4, 0.4});
}

inline ctmc::RateMatrix yule() { return ctmc::power_birth(1.0, 1, 0); }

inline ctmc::RateMatrix explosive_birth() {
  return ctmc::power_birth(1.0, 2, 1);
}

inline ctmc::RateMatrix linear_birth_plus_one() {
  return ctmc::power_birth(1.0, 1, 1);  // q_i = i + 1
}

inline ctmc::RateMatrix random20() {
  return ctmc::random_conservative(19, 0x5eedULL, 1.0);
}

inline ctmc::BoundedPerturbation random20_a() {
  return ctmc::bounded_from_matrix(
      ctmc::random_conservative(19, 0xa11ULL, 0.5));
}

inline ctmc::BoundedPerturbation uniform_shift_a() {
  return ctmc::immigration_resurrection({-1.0, 1.0}, {-1.0, 1.0});
}

}  // namespace fixtures

#endif
