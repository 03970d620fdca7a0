#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cattaneo {

/// Spatially varying material coefficient, kept symbolic so that every grid
/// resolution samples the same underlying function.
struct ConstantCoefficient {
  double value = 1.0;
};

/// Piecewise-linear interpolation through (x, value) pairs; x strictly increasing.
struct TableCoefficient {
  std::vector<double> x;
  std::vector<double> values;
};

/// a + b*x
struct LinearRamp {
  double a = 1.0;
  double b = 0.0;
};

/// a + b*sin^2(pi*x/L)
struct SmoothBump {
  double a = 1.0;
  double b = 0.0;
};

using CoefficientDef = std::variant<ConstantCoefficient, TableCoefficient, LinearRamp, SmoothBump>;

inline CoefficientDef constant(double value) { return ConstantCoefficient{value}; }

inline std::string coefficient_kind(const CoefficientDef& c) {
  struct {
    std::string operator()(const ConstantCoefficient&) const { return "constant"; }
    std::string operator()(const TableCoefficient&) const { return "table"; }
    std::string operator()(const LinearRamp&) const { return "linear_ramp"; }
    std::string operator()(const SmoothBump&) const { return "smooth_bump"; }
  } visitor;
  return std::visit(visitor, c);
}

namespace detail {

inline double interpolate_table(const TableCoefficient& t, double x) {
  if (t.x.size() < 2 || t.x.size() != t.values.size())
    throw std::invalid_argument("table coefficient needs >= 2 matching (x, value) pairs");
  // Tolerate round-off at the table ends.
  const double slack = 1e-12 * std::max(1.0, std::abs(t.x.back() - t.x.front()));
  if (x < t.x.front() - slack || x > t.x.back() + slack)
    throw std::out_of_range("point " + std::to_string(x) + " outside table range");
  x = std::clamp(x, t.x.front(), t.x.back());
  auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  std::size_t hi = static_cast<std::size_t>(std::distance(t.x.begin(), it));
  if (hi >= t.x.size()) hi = t.x.size() - 1;
  const std::size_t lo = hi - 1;
  const double span = t.x[hi] - t.x[lo];
  const double s = (x - t.x[lo]) / span;
  return (1.0 - s) * t.values[lo] + s * t.values[hi];
}

}  // namespace detail

/// Point evaluation on [0, length]. Throws std::out_of_range outside.
inline double evaluate(const CoefficientDef& c, double x, double length) {
  const double slack = 1e-12 * std::max(1.0, length);
  if (!(x >= -slack && x <= length + slack))
    throw std::out_of_range("point " + std::to_string(x) + " outside [0, L]");
  struct {
    double x, length;
    double operator()(const ConstantCoefficient& k) const { return k.value; }
    double operator()(const TableCoefficient& t) const { return detail::interpolate_table(t, x); }
    double operator()(const LinearRamp& r) const { return r.a + r.b * x; }
    double operator()(const SmoothBump& b) const {
      const double s = std::sin(std::numbers::pi * x / length);
      return b.a + b.b * s * s;
    }
  } visitor{x, length};
  return std::visit(visitor, c);
}

inline std::vector<double> sample_coefficient(const CoefficientDef& c, std::span<const double> points,
                                              double length) {
  std::vector<double> out;
  out.reserve(points.size());
  for (double x : points) out.push_back(evaluate(c, x, length));
  return out;
}

}  // namespace cattaneo
