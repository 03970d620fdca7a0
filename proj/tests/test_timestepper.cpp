#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <random>

#include "cattaneo/cattaneo.hpp"

using namespace cattaneo;
using Catch::Approx;

namespace {

ProblemSpec ref(BoundaryMode bc, double eta = 0.5) {
  ProblemSpec s;
  s.eta = eta;
  s.bc = bc;
  return s;
}

Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Null vector of the dense generator, normalized.
Vector kernel_vector(const GeneratorAssembly& a) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a.dense_A());
  const Eigen::MatrixXd k = lu.kernel();
  REQUIRE(k.cols() == 1);
  return k.col(0).normalized();
}

// -2 sum h delta (Dw)^2 - beta sum h q^2 from padded arrays.
double dissipation_by_hand(const GeneratorAssembly& a, const Vector& x) {
  const StateVector s(a.layout, x);
  const int n = a.grid.cells;
  std::vector<double> w(n + 1, 0.0);
  for (int j = 1; j < n; ++j) w[j] = s.w()[j - 1];
  double d = 0.0;
  for (int k = 0; k < n; ++k) {
    const double dw = (w[k + 1] - w[k]) / a.grid.h;
    d -= 2.0 * a.grid.h * evaluate(a.spec.delta, a.grid.midpoints[k], a.spec.length) * dw * dw;
  }
  return d - a.spec.beta * a.grid.h * s.q().squaredNorm();
}

}  // namespace

TEST_CASE("step fixed points") {
  for (auto bc : {BoundaryMode::DirichletTheta, BoundaryMode::DirichletFlux}) {
    const auto a = assemble_generator(ref(bc), build_grid(std::numbers::pi, 16));
    CHECK(step(a, a.zero_state(), 1e-3).values.norm() == 0.0);
  }
  const auto a = assemble_generator(ref(BoundaryMode::DirichletFlux), build_grid(std::numbers::pi, 16));
  const StateVector k(a.layout, kernel_vector(a));
  CHECK((step(a, k, 1e-3).values - k.values).norm() <= 1e-12);
  CHECK_THROWS_AS(step(a, k, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step(a, k, -1e-3), std::invalid_argument);
}

TEST_CASE("one step reproduces the discrete energy identity") {
  const auto a = assemble_generator(ref(BoundaryMode::DirichletTheta, 0.0), build_grid(std::numbers::pi, 64));
  const auto u0 = to_state(make_preset_initial("thermal_mode_1", a.grid, a.layout.bc), a);
  const double dt = 1e-3;
  const auto u1 = step(a, u0, dt);
  const double e0 = 0.5 * u0.values.dot(a.M * u0.values);
  const double e1 = 0.5 * u1.values.dot(a.M * u1.values);
  CHECK(e1 < e0);
  const Vector mid = 0.5 * (u0.values + u1.values);
  CHECK(std::abs((e1 - e0) - dt * dissipation_by_hand(a, mid)) <= 1e-11);
}

TEST_CASE("contractive for every step size") {
  for (auto bc : {BoundaryMode::DirichletTheta, BoundaryMode::DirichletFlux}) {
    const auto a = assemble_generator(ref(bc), build_grid(std::numbers::pi, 32));
    std::mt19937_64 rng(4);
    for (double dt : {1e-4, 1e-2, 1.0, 100.0}) {
      const MidpointStepper stepper(a, dt);
      StateVector u(a.layout, random_vector(rng, a.layout.dim()));
      for (int i = 0; i < 20; ++i) {
        const auto next = stepper.step(u);
        CHECK(energy_norm_squared(a, next.values) <= energy_norm_squared(a, u.values) * (1.0 + 1e-14));
        u = next;
      }
    }
  }
}

TEST_CASE("forward then backward step is the identity") {
  for (auto bc : {BoundaryMode::DirichletTheta, BoundaryMode::DirichletFlux}) {
    const auto a = assemble_generator(ref(bc), build_grid(std::numbers::pi, 64));
    std::mt19937_64 rng(12);
    const StateVector u(a.layout, random_vector(rng, a.layout.dim()));
    const MidpointStepper fwd(a, 1e-2), bwd(a, -1e-2);
    const auto back = bwd.step(fwd.step(u));
    CHECK((back.values - u.values).norm() <= 1e-10 * u.values.norm());
  }
}

TEST_CASE("second order in time against the matrix exponential") {
  const auto a = assemble_generator(ref(BoundaryMode::DirichletFlux), build_grid(std::numbers::pi, 8));
  const auto u0 = to_state(make_preset_initial("random_smooth", a.grid, a.layout.bc, 3), a);
  const double T = 1.0;
  const Eigen::MatrixXd at = a.dense_A() * T;
  const Vector exact = at.exp() * u0.values;
  std::vector<double> errors;
  for (int steps : {40, 80, 160}) {
    const auto traj = integrate(a, u0, T / steps, T, steps);
    errors.push_back((traj.states.back().values - exact).norm());
  }
  CHECK(errors[0] / errors[1] == Approx(4.0).epsilon(0.05));
  CHECK(errors[1] / errors[2] == Approx(4.0).epsilon(0.05));
}

TEST_CASE("integrate") {
  const auto a = assemble_generator(ref(BoundaryMode::DirichletFlux), build_grid(std::numbers::pi, 64));
  const auto u0 = to_state(make_preset_initial("random_smooth", a.grid, a.layout.bc, 17), a);

  SECTION("zero final time") {
    const auto traj = integrate(a, u0, 1e-3, 0.0, 10);
    REQUIRE(traj.times.size() == 1);
    CHECK(traj.states[0].values == u0.values);
  }
  SECTION("sampling stride, balance, monotone energy, conserved mean") {
    const auto traj = integrate(a, u0, 1e-3, 0.5, 7);
    CHECK(traj.times.size() == 1 + 500 / 7);
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
      CHECK(traj.times[i] - traj.times[i - 1] == Approx(7e-3));
      CHECK(energy(a, traj.states[i]) <= energy(a, traj.states[i - 1]));
      CHECK(energy(a, traj.states[i], 2) <= energy(a, traj.states[i - 1], 2));
      CHECK(traj.balance_residual_e1[i] <= 1e-12);
      CHECK(traj.theta_drift[i] <= 1e-12);
    }
    CHECK(std::abs(u0.theta().sum()) > 1e-3);  // random_smooth carries a nonzero mean here
  }
  SECTION("exponential decay over T = 20") {
    const auto e0 = to_state(make_preset_initial("elastic_mode_1", a.grid, a.layout.bc), a);
    const auto traj = integrate(a, e0, 1e-3, 20.0, 1000);
    CHECK(energy(a, traj.states.back()) < 1e-3 * energy(a, e0));
  }
  SECTION("fault injection breaks the balance") {
    BalanceOptions fault;
    fault.beta_sign = -1.0;
    const auto traj = integrate(a, u0, 1e-3, 0.05, 10, fault);
    CHECK(traj.balance_residual_e1.back() > 1e-8);
  }
  CHECK_THROWS_AS(integrate(a, u0, 0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(integrate(a, u0, 1e-3, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(integrate(a, u0, 1e-3, 1.0, 0), std::invalid_argument);
}

TEST_CASE("nth_time_derivative") {
  const auto a = assemble_generator(ref(BoundaryMode::DirichletFlux), build_grid(std::numbers::pi, 32));
  std::mt19937_64 rng(2);
  const StateVector u(a.layout, random_vector(rng, a.layout.dim()));
  CHECK(nth_time_derivative(a, u, 0).values == u.values);
  const StateVector k(a.layout, kernel_vector(a));
  CHECK(nth_time_derivative(a, k, 1).values.norm() <= 1e-12 * a.dense_A().norm());
  const auto twice = nth_time_derivative(a, nth_time_derivative(a, u, 1), 1);
  const auto a2 = nth_time_derivative(a, u, 2);
  CHECK((twice.values - a2.values).cwiseAbs().maxCoeff() <= 1e-13 * a2.values.norm());
  CHECK_THROWS_AS(nth_time_derivative(a, u, -1), std::invalid_argument);
}
