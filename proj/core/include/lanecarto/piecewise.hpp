#pragma once

#include <vector>

#include "lanecarto/geometry.hpp"

namespace lanecarto {

// Continuous piecewise-linear function in hinge form:
//   f(s) = beta0 + beta1 * s + sum_j gamma_j * max(0, s - breaks[j])
// fitted by least squares for a given breakpoint placement.
struct PiecewiseLinear {
  std::vector<double> breaks;  // interior breakpoints, strictly increasing
  double beta0 = 0.0;
  double beta1 = 0.0;
  std::vector<double> gamma;  // slope increments, one per break
  double s_min = 0.0, s_max = 0.0;
  double loss = 0.0;  // sum of squared residuals at the fitted optimum

  double evaluate(double s) const;
  // Knot abscissae {s_min, breaks..., s_max} and the values of f there.
  std::vector<double> knots() const;
  std::vector<double> knot_values() const;
};

// Least-squares fit with exactly n_breaks interior breakpoints. Breakpoint
// placement is optimized by a coarse search over s-quantile candidates
// followed by per-coordinate step-halving descent (stops when the loss
// improves by less than 1e-9). Points are (s, d) pairs.
// Throws DegenerateInputError when fewer than 2*(n_breaks+1) points are
// given or the s-span is zero.
PiecewiseLinear fit_piecewise(const std::vector<Vec2>& points, int n_breaks);

// Breakpoint-count selection: fits n_breaks = 0..max_breaks and returns the
// fit minimizing loss + lambda * n_breaks (ties go to fewer breaks).
// lambda < 0 selects the default 2 * median squared residual of the 0-break
// fit. Counts whose point requirement is not met are skipped.
PiecewiseLinear fit_piecewise_auto(const std::vector<Vec2>& points,
                                   int max_breaks = 6, double lambda = -1.0);

}  // namespace lanecarto
