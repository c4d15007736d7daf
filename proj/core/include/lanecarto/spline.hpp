#pragma once

#include <vector>

#include "lanecarto/geometry.hpp"

namespace lanecarto {

// Natural cubic interpolating spline: C2 through the given (knot, value)
// pairs with zero second derivative at both ends. Outside the knot range it
// continues the boundary tangents linearly (consistent with the natural end
// condition).
class NaturalSpline {
 public:
  struct Segment {
    // value = a + b*h + c*h^2 + d*h^3 with h = s - knot[i], on [knot[i], knot[i+1]]
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  };

  NaturalSpline() = default;
  // Throws DegenerateInputError for fewer than 2 knots or knots that are not
  // strictly increasing.
  NaturalSpline(std::vector<double> knots, std::vector<double> values);

  double evaluate(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return knots_.empty(); }

 private:
  int segment_of(double s) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<Segment> segments_;
};

}  // namespace lanecarto
