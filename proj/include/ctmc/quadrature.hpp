#ifndef CTMC_QUADRATURE_HPP
#define CTMC_QUADRATURE_HPP

#include <cmath>
#include <cstddef>

namespace ctmc {

/// Panel weights for integrating e^{-q(h-u)} g(u) over one step of width h
/// with g piecewise linear: the kernel is integrated exactly, so the rule
/// stays second order with a constant independent of q*h. Both weights are
/// nonnegative, which keeps series terms nonnegative and partial sums
/// monotone. At q = 0 this reduces to the plain trapezoid panel.
struct ExpPanel {
  double decay;   // e^{-q h}
  double w_prev;  // weight of g at the panel start
  double w_curr;  // weight of g at the panel end

  ExpPanel(double q, double h) {
    const double x = q * h;
    decay = std::exp(-x);
    double phi1, phi2;  // (1-e^-x)/x and (1-(1+x)e^-x)/x^2
    if (x < 1e-4) {
      phi1 = 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
      phi2 = 0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0;
    } else {
      phi1 = -std::expm1(-x) / x;
      phi2 = (phi1 - decay) / x;
    }
    w_prev = h * phi2;
    w_curr = h * (phi1 - phi2);
  }
};

/// In-place accumulation I_m = e^{-qh} I_{m-1} + panel(g_{m-1}, g_m) along
/// a grid; `out` may alias anything except `g`.
inline void exp_kernel_convolve(const ExpPanel& p, const double* g,
                                std::size_t points, double* out) {
  out[0] = 0.0;
  for (std::size_t m = 1; m < points; ++m)
    out[m] = p.decay * out[m - 1] + p.w_prev * g[m - 1] + p.w_curr * g[m];
}

/// Composite trapezoid value of samples f_0..f_{m} on a uniform grid.
inline double trapezoid(const double* f, std::size_t count, double h) {
  if (count < 2) return 0.0;
  double s = 0.5 * (f[0] + f[count - 1]);
  for (std::size_t k = 1; k + 1 < count; ++k) s += f[k];
  return s * h;
}

}  // namespace ctmc

#endif
