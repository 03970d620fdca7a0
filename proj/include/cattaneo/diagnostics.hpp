#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cattaneo/discretization.hpp"
#include "cattaneo/timestepper.hpp"

namespace cattaneo {

namespace detail {

inline Vector shifted(const GeneratorAssembly& a, const StateVector& u, int order) {
  if (order < 1) throw std::invalid_argument("energy order must be >= 1");
  return nth_time_derivative(a, u, order - 1).values;
}

}  // namespace detail

/// E_n = 1/2 <M V, V> with V = A^{n-1} U.
inline double energy(const GeneratorAssembly& a, const StateVector& u, int order = 1) {
  return detail::half_energy(a, detail::shifted(a, u, order));
}

/// dE_n/dt = -2 sum_mid h delta (D w')^2 - beta sum h q'^2 on V = A^{n-1} U.
inline double dissipation(const GeneratorAssembly& a, const StateVector& u, int order = 1) {
  return dissipation_form(a, detail::shifted(a, u, order));
}

/// F_n = sum_node h m w' u' + sum_mid h delta (D u')^2 on V = A^{n-1} U.
inline double functional_F(const GeneratorAssembly& a, const StateVector& u, int order = 1) {
  const Vector v = detail::shifted(a, u, order);
  const auto& L = a.layout;
  const auto uu = v.segment(L.u_offset(), L.u_size());
  const auto ww = v.segment(L.w_offset(), L.w_size());
  const double h = a.grid.h;
  double kinetic = 0.0;
  for (int i = 0; i < uu.size(); ++i) kinetic += h * a.coefficients.m_nodes[i + 1] * ww[i] * uu[i];
  const Vector du = a.ops.diff * uu;
  double strain = 0.0;
  for (int k = 0; k < du.size(); ++k) strain += h * a.coefficients.delta_mid[k] * du[k] * du[k];
  return kinetic + strain;
}

struct EnergyReport {
  double t = 0.0;
  std::vector<double> energies;      // E_1 .. E_nmax
  std::vector<double> dissipations;  // dE_1/dt .. dE_nmax/dt
  double theta_mean = 0.0;
};

/// Quadrature mean of the theta block (boundary zeros included under DirichletTheta).
inline double theta_mean(const GeneratorAssembly& a, const StateVector& u) {
  return a.grid.h * u.theta().sum() / a.grid.length;
}

inline EnergyReport energy_report(const GeneratorAssembly& a, const StateVector& u, double t, int max_order) {
  EnergyReport r;
  r.t = t;
  Vector v = u.values;
  for (int n = 1; n <= max_order; ++n) {
    r.energies.push_back(detail::half_energy(a, v));
    r.dissipations.push_back(dissipation_form(a, v));
    if (n < max_order) v = a.A * v;
  }
  r.theta_mean = theta_mean(a, u);
  return r;
}

/// Constants of the Lyapunov argument for the temperature-clamped problem.
///   mu0 = (2L/pi) sqrt(2 sup m / inf p), mu1 = sup delta / inf p
///   alpha = pi^2 inf p / (eta L^2), fixing C1 = 2 - eta L^2 alpha / (2 pi^2 inf p) = 3/2
///   C2 = max{tau + K (beta+tau)^2/kappa^2, K (beta+tau)^2/kappa^2, 2 L^2 sup m / (pi^2 inf delta)},
///        K = L^2/pi^2 + eta/(2 alpha)
///   epsilon = 1/2 min{2/C2, beta/C2, 1/mu0}
///   C_final = 1/(epsilon C1) + epsilon (mu0 + mu1)
struct LyapunovConstants {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double alpha = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double epsilon = 0.0;
  double C_final = 0.0;
};

struct CoefficientBounds {
  double sup_m, inf_p, sup_delta, inf_delta;
};

/// sup/inf over node and midpoint samples of the grid.
inline CoefficientBounds coefficient_bounds(const ProblemSpec& spec, const Grid& g) {
  std::vector<double> xs = g.nodes;
  xs.insert(xs.end(), g.midpoints.begin(), g.midpoints.end());
  const auto m = sample_coefficient(spec.m, xs, spec.length);
  const auto p = sample_coefficient(spec.p, xs, spec.length);
  const auto d = sample_coefficient(spec.delta, xs, spec.length);
  return {*std::max_element(m.begin(), m.end()), *std::min_element(p.begin(), p.end()),
          *std::max_element(d.begin(), d.end()), *std::min_element(d.begin(), d.end())};
}

inline LyapunovConstants lyapunov_constants(const ProblemSpec& spec, const Grid& g) {
  const auto report = validate_spec(spec, 4 * g.cells);
  if (!report.valid()) throw std::invalid_argument("invalid problem: " + report.violations.front());
  const auto b = coefficient_bounds(spec, g);
  const double L = spec.length, pi2 = std::numbers::pi * std::numbers::pi;
  LyapunovConstants c;
  c.mu0 = (2.0 * L / std::numbers::pi) * std::sqrt(2.0 * b.sup_m / b.inf_p);
  c.mu1 = b.sup_delta / b.inf_p;
  // Without coupling the Young term is absent: alpha is unused, C1 = 2.
  const bool coupled = spec.eta > 0.0;
  c.alpha = coupled ? pi2 * b.inf_p / (spec.eta * L * L) : std::numeric_limits<double>::infinity();
  c.C1 = coupled ? 2.0 - spec.eta * L * L * c.alpha / (2.0 * pi2 * b.inf_p) : 2.0;
  const double k = L * L / pi2 + (coupled ? spec.eta / (2.0 * c.alpha) : 0.0);
  const double bt = (spec.beta + spec.tau) * (spec.beta + spec.tau) / (spec.kappa * spec.kappa);
  c.C2 = std::max({spec.tau + k * bt, k * bt, 2.0 * L * L * b.sup_m / (pi2 * b.inf_delta)});
  c.epsilon = 0.5 * std::min({2.0 / c.C2, spec.beta / c.C2, 1.0 / c.mu0});
  c.C_final = 1.0 / (c.epsilon * c.C1) + c.epsilon * (c.mu0 + c.mu1);
  return c;
}

/// L_n = E_n + E_{n+1} + epsilon F_n.
inline double lyapunov(const GeneratorAssembly& a, const StateVector& u, int order, const LyapunovConstants& c) {
  return energy(a, u, order) + energy(a, u, order + 1) + c.epsilon * functional_F(a, u, order);
}

struct ThetaGradientBound {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// sum_mid h (D theta)^2 <= ((beta+tau)^2/kappa^2)(sum h q_t^2 + sum h q^2), q_t taken from A U.
inline ThetaGradientBound check_theta_x_bound(const GeneratorAssembly& a, const StateVector& u) {
  if (a.layout.bc != BoundaryMode::DirichletTheta)
    throw std::invalid_argument("theta gradient bound applies to dirichlet_theta only");
  const double h = a.grid.h;
  const Vector dtheta = a.ops.diff * u.theta();
  const StateVector ut = a.apply(u);
  const auto& s = a.spec;
  const double factor = (s.beta + s.tau) * (s.beta + s.tau) / (s.kappa * s.kappa);
  return {h * dtheta.squaredNorm(), factor * (h * ut.q().squaredNorm() + h * u.q().squaredNorm())};
}

enum class DecayModel { Exponential, Polynomial };

/// Exponential: E ~ a exp(-rate t), rate = -slope of log E vs t.
/// Polynomial:  E ~ a t^rate, rate = slope of log E vs log t.
struct DecayFit {
  DecayModel model = DecayModel::Exponential;
  double rate = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 0;
};

inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& e, DecayModel model,
                          double t_lo, double t_hi) {
  if (t.size() != e.size()) throw std::invalid_argument("fit_decay: series length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(e[i] > 0.0)) throw std::invalid_argument("fit_decay: nonpositive energy in window");
    if (model == DecayModel::Polynomial && !(t[i] > 0.0))
      throw std::invalid_argument("fit_decay: polynomial model needs t > 0");
    xs.push_back(model == DecayModel::Exponential ? t[i] : std::log(t[i]));
    ys.push_back(std::log(e[i]));
  }
  if (xs.size() < 10) throw std::invalid_argument("fit_decay: fewer than 10 samples in window");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double r2 = 1.0;
  if (syy > 0.0) {
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (my + slope * (xs[i] - mx));
      sse += r * r;
    }
    r2 = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  }
  return {model, model == DecayModel::Exponential ? -slope : slope, r2, t_lo, t_hi, static_cast<int>(xs.size())};
}

/// Default window: the last 60% of the samples.
inline DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& e, DecayModel model) {
  if (t.empty()) throw std::invalid_argument("fit_decay: empty series");
  const std::size_t first = static_cast<std::size_t>(std::floor(0.4 * static_cast<double>(t.size())));
  return fit_decay(t, e, model, t[std::min(first, t.size() - 1)], t.back());
}

/// E_1 and E_2 at every trajectory sample.
struct EnergySeries {
  std::vector<double> times;
  std::vector<double> e1;
  std::vector<double> e2;
};

inline EnergySeries energy_series(const GeneratorAssembly& a, const Trajectory& traj) {
  EnergySeries s;
  s.times = traj.times;
  for (const auto& u : traj.states) {
    const Vector v = a.A * u.values;
    s.e1.push_back(detail::half_energy(a, u.values));
    s.e2.push_back(detail::half_energy(a, v));
  }
  return s;
}

struct PolynomialBoundReport {
  double max_ratio = 0.0;  // max over t > 0 of t E_1(t) / (E_1(0) + E_2(0))
  double C_final = 0.0;
  bool pass = true;
};

/// t E_1(t) <= C_final (E_1(0) + E_2(0)) at every sample with t > 0.
inline PolynomialBoundReport check_polynomial_bound(const EnergySeries& s, const LyapunovConstants& c) {
  if (s.e2.size() != s.e1.size() || s.e1.size() != s.times.size() || s.e1.empty())
    throw std::invalid_argument("polynomial bound needs matching E1 and E2 samples");
  PolynomialBoundReport r;
  r.C_final = c.C_final;
  const double initial = s.e1.front() + s.e2.front();
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (!(s.times[i] > 0.0)) continue;
    const double lhs = s.times[i] * s.e1[i];
    if (lhs > c.C_final * initial) r.pass = false;
    if (initial > 0.0) r.max_ratio = std::max(r.max_ratio, lhs / initial);
  }
  return r;
}

struct LyapunovDecayReport {
  bool nonincreasing = true;
  bool slope_inequality = true;
  double max_increase = 0.0;        // largest L_1(t_{k+1}) - L_1(t_k), clipped at 0
  double worst_slope_margin = -std::numeric_limits<double>::infinity();  // max of slope + eps C1 E1(mid)
  double tolerance = 0.0;           // 1e-8 L_1(0)
  std::vector<double> values;       // sampled L_1
};

/// Finite-difference slope of sampled L_1 against -eps C1 E_1 evaluated at the
/// midpoint state (U_k + U_{k+1})/2 of consecutive samples.
inline LyapunovDecayReport check_lyapunov_decay(const GeneratorAssembly& a, const Trajectory& traj,
                                                const LyapunovConstants& c) {
  LyapunovDecayReport r;
  for (const auto& u : traj.states) r.values.push_back(lyapunov(a, u, 1, c));
  if (r.values.empty()) return r;
  r.tolerance = 1e-8 * r.values.front();
  for (std::size_t k = 0; k + 1 < r.values.size(); ++k) {
    const double dl = r.values[k + 1] - r.values[k];
    const double dt = traj.times[k + 1] - traj.times[k];
    const StateVector mid(a.layout, 0.5 * (traj.states[k].values + traj.states[k + 1].values));
    const double margin = dl / dt + c.epsilon * c.C1 * energy(a, mid, 1);
    r.worst_slope_margin = std::max(r.worst_slope_margin, margin);
    if (margin > r.tolerance) r.slope_inequality = false;
    if (dl > 1e-14 * r.values.front()) r.nonincreasing = false;
    r.max_increase = std::max(r.max_increase, dl);
  }
  return r;
}

}  // namespace cattaneo
