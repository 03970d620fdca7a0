#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cattaneo/coefficient.hpp"
#include "cattaneo/grid.hpp"

namespace cattaneo {

/// Which thermal unknown is clamped at x = 0 and x = L. The displacement is
/// clamped in both regimes.
enum class BoundaryMode { DirichletTheta, DirichletFlux };

inline std::string to_string(BoundaryMode bc) {
  return bc == BoundaryMode::DirichletTheta ? "dirichlet_theta" : "dirichlet_flux";
}

inline BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "dirichlet_theta") return BoundaryMode::DirichletTheta;
  if (s == "dirichlet_flux") return BoundaryMode::DirichletFlux;
  throw std::invalid_argument("unknown boundary mode '" + s + "'");
}

/// Physical problem: mass density m, stiffness p and Kelvin-Voigt damping delta
/// (all x-dependent), thermo-mechanical coupling eta, thermal coupling kappa,
/// relaxation time tau and flux damping beta.
struct ProblemSpec {
  double length = std::numbers::pi;
  CoefficientDef m = constant(1.0);
  CoefficientDef p = constant(1.0);
  CoefficientDef delta = constant(0.1);
  double eta = 0.5;
  double kappa = 1.0;
  double tau = 1.0;
  double beta = 1.0;
  BoundaryMode bc = BoundaryMode::DirichletTheta;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool valid() const { return violations.empty(); }
};

/// Checks positivity of every scalar parameter (eta only nonnegative) and of m, p, delta sampled at
/// n_check + 1 uniform points of [0, L]. Violations are returned, never thrown.
inline ValidationReport validate_spec(const ProblemSpec& spec, int n_check) {
  ValidationReport report;
  auto scalar = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      report.violations.push_back(std::string(name) + " not strictly positive (" + std::to_string(v) + ")");
  };
  scalar("L", spec.length);
  // eta = 0 is the decoupled limit and stays admissible.
  if (!(spec.eta >= 0.0) || !std::isfinite(spec.eta))
    report.violations.push_back("eta negative or not finite (" + std::to_string(spec.eta) + ")");
  scalar("kappa", spec.kappa);
  scalar("tau", spec.tau);
  scalar("beta", spec.beta);
  if (!(spec.length > 0.0) || !std::isfinite(spec.length)) return report;

  const int n = std::max(1, n_check);
  auto field = [&](const char* name, const CoefficientDef& c) {
    for (int i = 0; i <= n; ++i) {
      const double x = spec.length * i / n;
      double v = 0.0;
      try {
        v = evaluate(c, x, spec.length);
      } catch (const std::exception& e) {
        report.violations.push_back(std::string(name) + " not evaluable at x=" + std::to_string(x) + ": " +
                                    e.what());
        return;
      }
      if (!(v > 0.0) || !std::isfinite(v)) {
        report.violations.push_back(std::string(name) + " not strictly positive at x=" + std::to_string(x) +
                                    " (value " + std::to_string(v) + ")");
        return;
      }
    }
  };
  field("m", spec.m);
  field("p", spec.p);
  field("delta", spec.delta);
  return report;
}

/// Grid functions for (u, w, theta, q), boundary values included.
/// u0, w0 live on the N+1 nodes. Under DirichletTheta theta0 is nodal and q0
/// lives on the N midpoints; under DirichletFlux the roles are swapped.
struct InitialData {
  BoundaryMode bc = BoundaryMode::DirichletTheta;
  std::vector<double> u0, w0, theta0, q0;
};

inline bool theta_on_nodes(BoundaryMode bc) { return bc == BoundaryMode::DirichletTheta; }

/// Throws std::invalid_argument when sizes or boundary zeros are wrong.
inline void check_initial_data(const InitialData& d, const Grid& g) {
  const std::size_t nodes = g.cells + 1, mids = g.cells;
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("initial data: " + what);
  };
  auto zero_ends = [](const std::vector<double>& v) { return v.front() == 0.0 && v.back() == 0.0; };
  need(d.u0.size() == nodes && d.w0.size() == nodes, "u0 and w0 need N+1 nodal values");
  need(zero_ends(d.u0) && zero_ends(d.w0), "u0 and w0 must vanish at both ends");
  if (theta_on_nodes(d.bc)) {
    need(d.theta0.size() == nodes, "theta0 needs N+1 nodal values");
    need(zero_ends(d.theta0), "theta0 must vanish at both ends under dirichlet_theta");
    need(d.q0.size() == mids, "q0 needs N midpoint values");
  } else {
    need(d.theta0.size() == mids, "theta0 needs N midpoint values");
    need(d.q0.size() == nodes, "q0 needs N+1 nodal values");
    need(zero_ends(d.q0), "q0 must vanish at both ends under dirichlet_flux");
  }
}

/// Named initial-data presets.
///   elastic_mode_k   u0 = sin(k pi x / L)
///   thermal_mode_k   theta0 = sin(k pi x / L) at nodes (DirichletTheta) or
///                    cos(k pi x / L) at midpoints (DirichletFlux)
///   random_smooth    seeded random combination of the first few modes of every field
struct Preset {
  enum class Kind { ElasticMode, ThermalMode, RandomSmooth } kind = Kind::ElasticMode;
  int k = 1;
  std::uint64_t seed = 0;
};

/// Accepts "elastic_mode_<k>", "thermal_mode_<k>", "random_smooth" and
/// "random_smooth(<seed>)".
inline Preset parse_preset(const std::string& name, std::uint64_t default_seed = 0) {
  auto mode_number = [&](const std::string& prefix) {
    const std::string tail = name.substr(prefix.size());
    if (tail.empty() || !std::all_of(tail.begin(), tail.end(), ::isdigit))
      throw std::invalid_argument("unknown preset '" + name + "'");
    const int k = std::stoi(tail);
    if (k < 1) throw std::invalid_argument("mode number must be >= 1 in '" + name + "'");
    return k;
  };
  if (name.rfind("elastic_mode_", 0) == 0) return {Preset::Kind::ElasticMode, mode_number("elastic_mode_"), 0};
  if (name.rfind("thermal_mode_", 0) == 0) return {Preset::Kind::ThermalMode, mode_number("thermal_mode_"), 0};
  if (name == "random_smooth") return {Preset::Kind::RandomSmooth, 0, default_seed};
  if (name.rfind("random_smooth(", 0) == 0 && name.back() == ')') {
    const std::string inner = name.substr(14, name.size() - 15);
    if (inner.empty() || !std::all_of(inner.begin(), inner.end(), ::isdigit))
      throw std::invalid_argument("bad seed in preset '" + name + "'");
    return {Preset::Kind::RandomSmooth, 0, std::stoull(inner)};
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

namespace detail {

inline std::vector<double> sine_mode(const std::vector<double>& xs, int k, double length) {
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = std::sin(k * std::numbers::pi * xs[i] / length);
  return v;
}

inline std::vector<double> cosine_mode(const std::vector<double>& xs, int k, double length) {
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = std::cos(k * std::numbers::pi * xs[i] / length);
  return v;
}

inline void pin_ends(std::vector<double>& v) { v.front() = v.back() = 0.0; }

// Random combination of modes 1..kmax (or 0..kmax for cosines), amplitudes ~ 1/k^2.
inline std::vector<double> random_series(std::mt19937_64& rng, const std::vector<double>& xs, double length,
                                         bool cosine, int kmax) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> v(xs.size(), 0.0);
  for (int k = cosine ? 0 : 1; k <= kmax; ++k) {
    const double a = coef(rng) / std::max(1, k * k);
    const auto mode = cosine ? cosine_mode(xs, k, length) : sine_mode(xs, k, length);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * mode[i];
  }
  return v;
}

}  // namespace detail

inline InitialData make_preset_initial(const Preset& preset, const Grid& g, BoundaryMode bc) {
  InitialData d;
  d.bc = bc;
  const bool nodal_theta = theta_on_nodes(bc);
  const auto& theta_x = nodal_theta ? g.nodes : g.midpoints;
  const auto& q_x = nodal_theta ? g.midpoints : g.nodes;
  d.u0.assign(g.nodes.size(), 0.0);
  d.w0.assign(g.nodes.size(), 0.0);
  d.theta0.assign(theta_x.size(), 0.0);
  d.q0.assign(q_x.size(), 0.0);

  switch (preset.kind) {
    case Preset::Kind::ElasticMode:
      d.u0 = detail::sine_mode(g.nodes, preset.k, g.length);
      detail::pin_ends(d.u0);
      break;
    case Preset::Kind::ThermalMode:
      if (nodal_theta) {
        d.theta0 = detail::sine_mode(g.nodes, preset.k, g.length);
        detail::pin_ends(d.theta0);
      } else {
        d.theta0 = detail::cosine_mode(g.midpoints, preset.k, g.length);
      }
      break;
    case Preset::Kind::RandomSmooth: {
      constexpr int kmax = 4;
      std::mt19937_64 rng(preset.seed);
      d.u0 = detail::random_series(rng, g.nodes, g.length, false, kmax);
      d.w0 = detail::random_series(rng, g.nodes, g.length, false, kmax);
      d.theta0 = detail::random_series(rng, theta_x, g.length, !nodal_theta, kmax);
      d.q0 = detail::random_series(rng, q_x, g.length, nodal_theta, kmax);
      detail::pin_ends(d.u0);
      detail::pin_ends(d.w0);
      detail::pin_ends(nodal_theta ? d.theta0 : d.q0);
      break;
    }
  }
  return d;
}

inline InitialData make_preset_initial(const std::string& name, const Grid& g, BoundaryMode bc,
                                       std::uint64_t default_seed = 0) {
  return make_preset_initial(parse_preset(name, default_seed), g, bc);
}

/// Quadrature mean of a theta grid function: nodal (trapezoid) or midpoint weights
/// are picked by size.
inline double quadrature_mean(const std::vector<double>& theta, const Grid& g) {
  const auto& w = theta.size() == g.midpoints.size() ? g.midpoint_weights : g.node_weights;
  if (theta.size() != w.size()) throw std::invalid_argument("theta does not match a grid");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * theta[i];
  return s / g.length;
}

/// Removes the quadrature mean of a midpoint theta (DirichletFlux thermal grid).
inline std::vector<double> enforce_zero_mean(std::vector<double> theta, const Grid& g) {
  if (theta.size() != g.midpoints.size())
    throw std::invalid_argument("enforce_zero_mean expects theta on the N midpoints");
  const double mean = quadrature_mean(theta, g);
  for (double& v : theta) v -= mean;
  return theta;
}

}  // namespace cattaneo
