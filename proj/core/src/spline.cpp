#include "lanecarto/spline.hpp"

#include <algorithm>
#include <string>

#include "lanecarto/errors.hpp"

namespace lanecarto {

NaturalSpline::NaturalSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  const int n = static_cast<int>(knots_.size());
  if (n < 2) throw DegenerateInputError("spline needs at least 2 knots");
  if (values_.size() != knots_.size()) {
    throw DegenerateInputError("spline knot/value count mismatch");
  }
  for (int i = 1; i < n; ++i) {
    if (!(knots_[i] > knots_[i - 1])) {
      throw DegenerateInputError("spline knots must be strictly increasing (knot " +
                                 std::to_string(i) + ")");
    }
  }

  // Second derivatives M_i from the tridiagonal system of the natural spline
  // (M_0 = M_{n-1} = 0), solved by the Thomas algorithm.
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    const int k = n - 2;  // interior unknowns
    std::vector<double> diag(k), rhs(k), upper(k, 0.0);
    for (int i = 0; i < k; ++i) {
      const double h0 = knots_[i + 1] - knots_[i];
      const double h1 = knots_[i + 2] - knots_[i + 1];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((values_[i + 2] - values_[i + 1]) / h1 -
                      (values_[i + 1] - values_[i]) / h0);
    }
    for (int i = 1; i < k; ++i) {
      const double lower = knots_[i + 1] - knots_[i];  // h of previous interval
      const double f = lower / diag[i - 1];
      diag[i] -= f * upper[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (int i = k - 2; i >= 0; --i) {
      m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
  }

  segments_.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    const double h = knots_[i + 1] - knots_[i];
    Segment& seg = segments_[i];
    seg.a = values_[i];
    seg.b = (values_[i + 1] - values_[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
    seg.c = m[i] / 2.0;
    seg.d = (m[i + 1] - m[i]) / (6.0 * h);
  }
}

int NaturalSpline::segment_of(double s) const {
  const int n = static_cast<int>(knots_.size());
  if (s <= knots_.front()) return 0;
  if (s >= knots_[n - 2]) return n - 2;
  const int i = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), s) -
                                 knots_.begin()) -
                1;
  return std::clamp(i, 0, n - 2);
}

double NaturalSpline::evaluate(double s) const {
  // Linear extension beyond the ends keeps C1 with the natural condition.
  if (s < knots_.front()) {
    return values_.front() + segments_.front().b * (s - knots_.front());
  }
  if (s > knots_.back()) {
    const Segment& seg = segments_.back();
    const double h = knots_.back() - knots_[knots_.size() - 2];
    const double end_slope = seg.b + 2.0 * seg.c * h + 3.0 * seg.d * h * h;
    return values_.back() + end_slope * (s - knots_.back());
  }
  const int i = segment_of(s);
  const double h = s - knots_[i];
  const Segment& seg = segments_[i];
  return seg.a + h * (seg.b + h * (seg.c + h * seg.d));
}

double NaturalSpline::derivative(double s) const {
  if (s < knots_.front()) return segments_.front().b;
  if (s > knots_.back()) {
    const Segment& seg = segments_.back();
    const double h = knots_.back() - knots_[knots_.size() - 2];
    return seg.b + 2.0 * seg.c * h + 3.0 * seg.d * h * h;
  }
  const int i = segment_of(s);
  const double h = s - knots_[i];
  const Segment& seg = segments_[i];
  return seg.b + h * (2.0 * seg.c + 3.0 * h * seg.d);
}

double NaturalSpline::second_derivative(double s) const {
  if (s < knots_.front() || s > knots_.back()) return 0.0;
  const int i = segment_of(s);
  const double h = s - knots_[i];
  const Segment& seg = segments_[i];
  return 2.0 * seg.c + 6.0 * h * seg.d;
}

}  // namespace lanecarto
