#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "cattaneo/discretization.hpp"

namespace cattaneo {

/// Polynomial sum_k c[k] x^k.
struct Polynomial {
  std::vector<double> c;

  Polynomial() = default;
  Polynomial(std::initializer_list<double> coeffs) : c(coeffs) {}
  explicit Polynomial(std::vector<double> coeffs) : c(std::move(coeffs)) {}

  double operator()(double x) const {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
    return v;
  }

  /// Antiderivative vanishing at 0.
  Polynomial integral() const {
    Polynomial p;
    p.c.assign(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) p.c[k + 1] = c[k] / static_cast<double>(k + 1);
    return p;
  }

  Polynomial operator*(double s) const {
    Polynomial p = *this;
    for (double& v : p.c) v *= s;
    return p;
  }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial p;
    p.c.assign(std::max(c.size(), o.c.size()), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) p.c[k] += c[k];
    for (std::size_t k = 0; k < o.c.size(); ++k) p.c[k] += o.c[k];
    return p;
  }
};

/// Data of the stationary problem written as
///   w = f1,  (p u_x + 2 delta w_x - eta theta)_x = m f2,
///   kappa q_x + eta w_x = f3,  kappa theta_x + beta q = tau f4,
/// with theta(0) = theta(L) = 0. This is A U = (f1, f2, -f3, -f4).
struct StationaryData {
  Polynomial f1, f2, f3, f4;
};

/// Closed-form (q, theta) of the temperature-clamped stationary problem:
///   kappa q(x)     = kappa q(0) - eta f1(x) + int_0^x f3
///   kappa theta(x) = tau int_0^x f4 - beta q(0) x - (beta/kappa) int_0^x (-eta f1 + int f3)
/// where q(0) is fixed by theta(L) = 0.
class StationaryOracle {
 public:
  StationaryOracle(const ProblemSpec& spec, const StationaryData& data) : spec_(spec) {
    if (spec.bc != BoundaryMode::DirichletTheta)
      throw std::invalid_argument("closed-form stationary solution is for dirichlet_theta");
    const double L = spec.length;
    const double tol = 1e-12 * std::max(1.0, std::abs(data.f1(L)) + std::abs(data.f1(0.0)));
    if (std::abs(data.f1(0.0)) > tol || std::abs(data.f1(L)) > tol)
      throw std::invalid_argument("f1 must vanish at both ends");
    g_ = data.f1 * (-spec.eta) + data.f3.integral();
    big_g_ = g_.integral();
    f4_int_ = data.f4.integral();
    q0_ = (spec.tau * f4_int_(L) - (spec.beta / spec.kappa) * big_g_(L)) / (spec.beta * L);
  }

  double q0() const { return q0_; }
  double q(double x) const { return q0_ + g_(x) / spec_.kappa; }
  double theta(double x) const {
    return (spec_.tau * f4_int_(x) - spec_.beta * q0_ * x - (spec_.beta / spec_.kappa) * big_g_(x)) / spec_.kappa;
  }

 private:
  ProblemSpec spec_;
  Polynomial g_, big_g_, f4_int_;
  double q0_ = 0.0;
};

/// Samples (f1, f2, -f3, -f4) at the grid locations of each block.
inline StateVector stationary_rhs(const GeneratorAssembly& a, const StationaryData& d) {
  StateVector f(a.layout);
  const auto& g = a.grid;
  const int n = g.cells;
  for (int j = 1; j <= n - 1; ++j) {
    f.u()[j - 1] = d.f1(g.nodes[j]);
    f.w()[j - 1] = d.f2(g.nodes[j]);
  }
  const bool nodal = theta_on_nodes(a.layout.bc);
  for (int i = 0; i < f.theta().size(); ++i) f.theta()[i] = -d.f3(nodal ? g.nodes[i + 1] : g.midpoints[i]);
  for (int i = 0; i < f.q().size(); ++i) f.q()[i] = -d.f4(nodal ? g.midpoints[i] : g.nodes[i + 1]);
  return f;
}

}  // namespace cattaneo
