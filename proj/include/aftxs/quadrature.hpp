#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

namespace aftxs::quad {

using Integrand = std::function<double(double)>;

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  /// An interval bisected more than this many times means non-convergence.
  int max_depth = 60;
  /// Hard cap on the number of live subintervals.
  std::size_t max_intervals = 20000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
};

/// Globally adaptive Gauss–Legendre on [a, b]. Each panel is estimated with a
/// 15-point rule on the panel and on its two halves; the panel with the largest
/// discrepancy is bisected until the summed error meets the tolerance.
/// Throws NumericalError mentioning `name` on non-convergence or a non-finite
/// integrand value.
Result integrate(const Integrand& f, double a, double b, const std::string& name,
                 const Options& opts = {});

/// Integral over [a, inf) through x = a + scale * t / (1 - t), t in [0, 1).
Result integrate_to_infinity(const Integrand& f, double a, double scale, const std::string& name,
                             const Options& opts = {});

/// Fixed composite rule: `points`-point Gauss–Legendre on every cell of the
/// sorted breakpoint list. Used for piecewise-smooth integrands tabulated on a grid.
double composite(const Integrand& f, std::span<const double> breaks, int points = 5);

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on P_n, cached per n).
struct Rule {
  std::span<const double> nodes;
  std::span<const double> weights;
};
Rule gauss_legendre(int n);

}  // namespace aftxs::quad
