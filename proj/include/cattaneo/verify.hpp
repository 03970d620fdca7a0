#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cattaneo/diagnostics.hpp"
#include "cattaneo/discretization.hpp"
#include "cattaneo/io.hpp"
#include "cattaneo/spectral.hpp"
#include "cattaneo/timestepper.hpp"

namespace cattaneo {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  int balance_steps = 2000;
  int random_states = 200;
  BalanceOptions balance;  // fault injection for the energy-balance checks
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline json report_to_json(const VerifyReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass},
                      {"detail", c.detail}});
  return {{"pass", r.pass()}, {"checks", checks}};
}

namespace detail {

inline Vector random_state(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

inline ProblemSpec with_bc(ProblemSpec s, BoundaryMode bc) {
  s.bc = bc;
  return s;
}

}  // namespace detail

/// Runs the property suite at the configuration's resolution for both
/// boundary regimes.
inline VerifyReport run_verification(const RunConfig& config, const VerifyOptions& opt = {}) {
  VerifyReport report;
  auto add = [&](std::string name, double value, double threshold, bool pass, std::string detail = {}) {
    report.checks.push_back({std::move(name), value, threshold, pass, std::move(detail)});
  };
  const Grid grid = build_grid(config.spec.length, config.cells);
  const auto theta_asm = assemble_generator(detail::with_bc(config.spec, BoundaryMode::DirichletTheta), grid);
  const auto flux_asm = assemble_generator(detail::with_bc(config.spec, BoundaryMode::DirichletFlux), grid);
  const auto consts = lyapunov_constants(config.spec, grid);
  std::mt19937_64 rng(config.seed);

  // Per-step energy balance for E1 and E2 in both regimes.
  for (const auto* a : {&theta_asm, &flux_asm}) {
    const auto u0 = to_state(make_preset_initial(Preset{Preset::Kind::RandomSmooth, 0, config.seed + 1}, grid,
                                                 a->layout.bc),
                             *a);
    const auto traj = integrate(*a, u0, config.dt, opt.balance_steps * config.dt, 1, opt.balance);
    const double scale = std::max(energy(*a, u0, 1), 1.0);
    double worst1 = 0.0, worst2 = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      worst1 = std::max(worst1, traj.balance_residual_e1[i]);
      worst2 = std::max(worst2, traj.balance_residual_e2[i]);
    }
    const std::string tag = to_string(a->layout.bc);
    add("energy_balance_E1_" + tag, worst1, 1e-10 * scale, worst1 <= 1e-10 * scale);
    add("energy_balance_E2_" + tag, worst2, 1e-10 * scale, worst2 <= 1e-10 * scale);
    if (a->layout.bc == BoundaryMode::DirichletFlux) {
      const double base = std::abs(grid.h * u0.theta().sum());
      double drift = 0.0;
      for (double d : traj.theta_drift) drift = std::max(drift, d);
      add("theta_mean_conservation", drift, 1e-12 * std::max(1.0, base), drift <= 1e-12 * std::max(1.0, base));
    }
  }

  // Dissipativity and the explicit dissipation identity.
  for (const auto* a : {&theta_asm, &flux_asm}) {
    double max_re = -std::numeric_limits<double>::infinity(), max_err = 0.0;
    for (int i = 0; i < opt.random_states; ++i) {
      const Vector x = detail::random_state(rng, a->layout.dim());
      const double form = x.dot(a->M * (a->A * x));
      max_re = std::max(max_re, form / x.squaredNorm());
      max_err = std::max(max_err, std::abs(form - dissipation_form(*a, x)) / x.squaredNorm());
    }
    add("dissipativity_" + to_string(a->layout.bc), max_re, 0.0, max_re <= 0.0);
    add("dissipation_identity_" + to_string(a->layout.bc), max_err, 1e-12, max_err <= 1e-12);
  }

  // Discrete Poincare-Scheeffer.
  {
    double worst = -std::numeric_limits<double>::infinity();
    double c_h = 0.0;
    for (int i = 0; i < opt.random_states; ++i) {
      const auto pc = check_poincare(detail::random_state(rng, grid.cells - 1), grid);
      c_h = pc.discrete_constant;
      worst = std::max(worst, pc.lhs / (pc.discrete_constant * pc.rhs));
    }
    add("poincare_scheeffer", worst, 1.0, worst <= 1.0 + 1e-14);
    const double l2 = grid.length * grid.length / (std::numbers::pi * std::numbers::pi);
    add("poincare_constant_bound", c_h, l2 * (1.0 + grid.h * grid.h), c_h >= l2 && c_h <= l2 * (1.0 + grid.h * grid.h));
  }

  // Comparison inequality between F1 and E1.
  {
    int violations = 0;
    for (int i = 0; i < opt.random_states; ++i) {
      const StateVector x(theta_asm.layout, detail::random_state(rng, theta_asm.layout.dim()));
      const double e = energy(theta_asm, x, 1), f = functional_F(theta_asm, x, 1);
      if (f < -consts.mu0 * e || f > (consts.mu0 + consts.mu1) * e) ++violations;
    }
    add("comparison_F1_E1", violations, 0.0, violations == 0);
  }

  // Theta gradient bound from the discrete flux equation.
  {
    double worst = 0.0;
    for (int i = 0; i < opt.random_states; ++i) {
      const StateVector x(theta_asm.layout, detail::random_state(rng, theta_asm.layout.dim()));
      const auto b = check_theta_x_bound(theta_asm, x);
      worst = std::max(worst, b.lhs / b.rhs);
    }
    add("theta_gradient_bound", worst, 1.0, worst <= 1.0);
  }

  // Time-domain decay: exponential (flux) and polynomial/Lyapunov (theta).
  const int stride = config.sample_stride;
  {
    const auto u0 = to_state(make_preset_initial("elastic_mode_1", grid, BoundaryMode::DirichletFlux), flux_asm);
    const auto traj = integrate(flux_asm, u0, config.dt, config.t_final, stride);
    const auto series = energy_series(flux_asm, traj);
    const auto spectrum = eigenvalues(flux_asm);
    add("flux_kernel_deflation", static_cast<double>(spectrum.deflated.size()), 1.0, spectrum.deflated.size() == 1);
    add("flux_spectrum_left_half_plane", spectrum.spectral_abscissa, 1e-8, spectrum.spectral_abscissa <= 1e-8);
    try {
      const auto fit = fit_decay(series.times, series.e1, DecayModel::Exponential);
      const double target = 2.0 * std::abs(spectrum.spectral_abscissa);
      const double rel = std::abs(fit.rate - target) / target;
      add("exponential_decay_rate", rel, 0.1, rel <= 0.1 && fit.r_squared >= 0.995,
          "rate=" + format_double(fit.rate) + " r2=" + format_double(fit.r_squared));
    } catch (const std::invalid_argument& e) {
      add("exponential_decay_rate", 0.0, 0.1, false, e.what());
    }
  }
  {
    const auto u0 = to_state(make_preset_initial("elastic_mode_1", grid, BoundaryMode::DirichletTheta), theta_asm);
    const auto traj = integrate(theta_asm, u0, config.dt, config.t_final, stride);
    const auto bound = check_polynomial_bound(energy_series(theta_asm, traj), consts);
    add("polynomial_bound", bound.max_ratio, bound.C_final, bound.pass);
    const auto lyap = check_lyapunov_decay(theta_asm, traj, consts);
    add("lyapunov_nonincreasing", lyap.max_increase, 0.0, lyap.nonincreasing);
    add("lyapunov_slope", lyap.worst_slope_margin, lyap.tolerance, lyap.slope_inequality);
    const auto spectrum = eigenvalues(theta_asm);
    add("theta_spectrum_left_half_plane", spectrum.spectral_abscissa, 1e-8, spectrum.spectral_abscissa <= 1e-8);
    add("eigenpair_residuals", spectrum.max_relative_residual, 1e-8, spectrum.max_relative_residual <= 1e-8);
  }

  // Stationary solve recovers F.
  for (const auto* a : {&theta_asm, &flux_asm}) {
    StateVector f(a->layout, detail::random_state(rng, a->layout.dim()));
    if (a->layout.bc == BoundaryMode::DirichletFlux) f.theta().array() -= f.theta().mean();
    const auto sol = solve_stationary(*a, f);
    const double rel = sol.residual / f.values.norm();
    add("stationary_solve_" + to_string(a->layout.bc), rel, 1e-10, rel <= 1e-10);
  }

  // Resolvent along the imaginary axis is finite on the zero-mean subspace.
  {
    try {
      const auto sweep = sweep_resolvent(flux_asm, config.lambda_max, config.sweep_points);
      add("resolvent_bounded_flux", sweep.sup_norm, std::numeric_limits<double>::max(),
          std::isfinite(sweep.sup_norm));
    } catch (const NumericalError& e) {
      add("resolvent_bounded_flux", 0.0, 0.0, false, e.what());
    }
  }
  return report;
}

}  // namespace cattaneo
