#pragma once

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cattaneo/discretization.hpp"

namespace cattaneo {

/// Raised when a linear solve cannot meet its residual tolerance or a factor is singular.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Implicit midpoint rule (I - dt/2 A) U' = (I + dt/2 A) U with one cached LU
/// factorization. The scheme is A-stable for the dissipative generator, so any
/// dt > 0 is admissible; a negative dt is accepted for backward (reversal) steps.
class MidpointStepper {
 public:
  static constexpr double kResidualTolerance = 1e-12;

  MidpointStepper(const GeneratorAssembly& assembly, double dt) : assembly_(&assembly), dt_(dt) {
    if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("time step must be nonzero and finite");
    const int n = assembly.layout.dim();
    SparseMatrix id(n, n);
    id.setIdentity();
    implicit_ = id - 0.5 * dt * assembly.A;
    explicit_ = id + 0.5 * dt * assembly.A;
    implicit_.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix>>();
    lu_->compute(implicit_);
    if (lu_->info() != Eigen::Success)
      throw NumericalError("factorization of (I - dt/2 A) failed for dt=" + std::to_string(dt));
  }

  double dt() const { return dt_; }
  const GeneratorAssembly& assembly() const { return *assembly_; }

  /// One step; throws NumericalError when the solve residual exceeds
  /// kResidualTolerance * ||rhs|| after one refinement sweep.
  StateVector step(const StateVector& u) const {
    if (!(u.layout == assembly_->layout)) throw std::invalid_argument("state layout does not match assembly");
    const Vector rhs = explicit_ * u.values;
    Vector next = lu_->solve(rhs);
    const double scale = std::max(rhs.norm(), std::numeric_limits<double>::min());
    Vector r = rhs - implicit_ * next;
    if (r.norm() > kResidualTolerance * scale) {
      next += lu_->solve(r);
      r = rhs - implicit_ * next;
    }
    if (!next.allFinite() || r.norm() > kResidualTolerance * scale)
      throw NumericalError("midpoint solve residual " + std::to_string(r.norm() / scale) + " exceeds tolerance");
    return StateVector(u.layout, std::move(next));
  }

 private:
  const GeneratorAssembly* assembly_;
  double dt_;
  SparseMatrix implicit_;
  SparseMatrix explicit_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
};

inline StateVector step(const GeneratorAssembly& a, const StateVector& u, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  return MidpointStepper(a, dt).step(u);
}

/// A^n U.
inline StateVector nth_time_derivative(const GeneratorAssembly& a, const StateVector& u, int order) {
  if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
  Vector v = u.values;
  for (int i = 0; i < order; ++i) v = a.A * v;
  return StateVector(u.layout, std::move(v));
}

/// Sampled trajectory, one sample every `sample_stride` steps (a trailing
/// partial stride is integrated but not sampled). balance_residual_e1/e2[i] is the largest per-step
/// |dE - dt*D(U^mid)| over the steps leading to sample i (0 for the first sample).
struct Trajectory {
  double dt = 0.0;
  int sample_stride = 1;
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> balance_residual_e1;
  std::vector<double> balance_residual_e2;
  std::vector<double> theta_drift;  // |sum h theta(t) - sum h theta(0)| at samples
};

namespace detail {

inline double half_energy(const GeneratorAssembly& a, const Vector& x) { return 0.5 * x.dot(a.M * x); }

inline double theta_integral(const GeneratorAssembly& a, const Vector& x) {
  return a.grid.h * x.segment(a.layout.theta_offset(), a.layout.theta_size()).sum();
}

}  // namespace detail

/// Hook for fault injection in verification runs: scales the beta term of the
/// dissipation form used to evaluate energy balances.
struct BalanceOptions {
  double beta_sign = 1.0;
};

inline double dissipation_form(const GeneratorAssembly& a, const Vector& x, const BalanceOptions& opt) {
  if (opt.beta_sign == 1.0) return dissipation_form(a, x);
  const auto& L = a.layout;
  const auto q = x.segment(L.q_offset(), L.q_size());
  const double beta_part = -a.spec.beta * a.grid.h * q.squaredNorm();
  return dissipation_form(a, x) - beta_part + opt.beta_sign * beta_part;
}

inline Trajectory integrate(const GeneratorAssembly& a, const StateVector& u0, double dt, double t_final,
                            int sample_stride, const BalanceOptions& opt = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_final >= 0.0)) throw std::invalid_argument("final time must be nonnegative");
  if (sample_stride < 1) throw std::invalid_argument("sample stride must be >= 1");

  Trajectory traj;
  traj.dt = dt;
  traj.sample_stride = sample_stride;
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  traj.balance_residual_e1.push_back(0.0);
  traj.balance_residual_e2.push_back(0.0);
  traj.theta_drift.push_back(0.0);

  const long steps = std::lround(t_final / dt);
  if (steps == 0) return traj;

  const MidpointStepper stepper(a, dt);
  const double theta0 = detail::theta_integral(a, u0.values);
  StateVector u = u0;
  Vector v = a.A * u.values;
  double e1 = detail::half_energy(a, u.values), e2 = detail::half_energy(a, v);
  double worst1 = 0.0, worst2 = 0.0;
  for (long s = 1; s <= steps; ++s) {
    StateVector next = stepper.step(u);
    Vector v_next = a.A * next.values;
    const double e1n = detail::half_energy(a, next.values), e2n = detail::half_energy(a, v_next);
    const Vector mid = 0.5 * (u.values + next.values);
    const Vector vmid = 0.5 * (v + v_next);
    worst1 = std::max(worst1, std::abs((e1n - e1) - dt * dissipation_form(a, mid, opt)));
    worst2 = std::max(worst2, std::abs((e2n - e2) - dt * dissipation_form(a, vmid, opt)));
    u = std::move(next);
    v = std::move(v_next);
    e1 = e1n;
    e2 = e2n;
    if (s % sample_stride == 0) {
      traj.times.push_back(s * dt);
      traj.states.push_back(u);
      traj.balance_residual_e1.push_back(worst1);
      traj.balance_residual_e2.push_back(worst2);
      traj.theta_drift.push_back(std::abs(detail::theta_integral(a, u.values) - theta0));
      worst1 = worst2 = 0.0;
    }
  }
  return traj;
}

}  // namespace cattaneo
