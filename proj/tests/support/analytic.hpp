// Closed-form and brute-force oracles used by the test suites. Everything
// here is independent of the solver code paths it checks: 2x2 matrix
// exponentials by eigen-decomposition and a plain dense row integrator for
// truncation-defect references.
#ifndef CTMC_TESTS_ANALYTIC_HPP
#define CTMC_TESTS_ANALYTIC_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctmc/windowed.hpp"

namespace oracle {

using Mat2 = std::array<std::array<double, 2>, 2>;

// exp(t M) for a real 2x2 matrix with real eigenvalues (true for any
// generator-like matrix with nonnegative off-diagonal entries).
inline Mat2 expm2(const Mat2& m, double t) {
  const double tr = m[0][0] + m[1][1];
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double disc = tr * tr / 4.0 - det;
  if (disc < -1e-12) throw std::runtime_error("complex eigenvalues");
  const double root = std::sqrt(std::max(0.0, disc));
  const double l1 = tr / 2.0 + root;
  const double l2 = tr / 2.0 - root;
  Mat2 out{};
  if (root > 1e-12) {
    const double e1 = std::exp(l1 * t), e2 = std::exp(l2 * t);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double mij = m[i][j];
        const double id = (i == j) ? 1.0 : 0.0;
        out[i][j] = e1 * (mij - l2 * id) / (l1 - l2) +
                    e2 * (mij - l1 * id) / (l2 - l1);
      }
  } else {
    const double e = std::exp(l1 * t);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double id = (i == j) ? 1.0 : 0.0;
        out[i][j] = e * (id + t * (m[i][j] - l1 * id));
      }
  }
  return out;
}

// Transition matrix of the conservative 2-state chain [[-a, a], [b, -b]].
inline Mat2 two_state(double a, double b, double t) {
  return expm2(Mat2{{{-a, a}, {b, -b}}}, t);
}

// Reference row e_origin exp(t G) of a killed window generator, integrated
// with plain RK4 at a caller-chosen substep count. Used as the independent
// second route for defect traces.
inline std::vector<double> rk4_row(const ctmc::WindowMatrix& w,
                                   ctmc::State origin, double t,
                                   std::size_t steps) {
  const ctmc::State size = w.size();
  std::vector<double> p(size, 0.0), k1(size), k2(size), k3(size), k4(size),
      tmp(size);
  p[origin] = 1.0;
  const double dt = t / static_cast<double>(steps);
  auto apply_left = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (ctmc::State j = 0; j < size; ++j) y[j] = -w.exit_rate[j] * x[j];
    for (ctmc::State i = 0; i < size; ++i) {
      if (x[i] == 0.0) continue;
      for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e)
        y[w.col[e]] += x[i] * w.val[e];
    }
  };
  for (std::size_t s = 0; s < steps; ++s) {
    apply_left(p, k1);
    for (ctmc::State j = 0; j < size; ++j) tmp[j] = p[j] + 0.5 * dt * k1[j];
    apply_left(tmp, k2);
    for (ctmc::State j = 0; j < size; ++j) tmp[j] = p[j] + 0.5 * dt * k2[j];
    apply_left(tmp, k3);
    for (ctmc::State j = 0; j < size; ++j) tmp[j] = p[j] + dt * k3[j];
    apply_left(tmp, k4);
    for (ctmc::State j = 0; j < size; ++j)
      p[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return p;
}

}  // namespace oracle

#endif
