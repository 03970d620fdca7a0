#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "cattaneo/cattaneo.hpp"

using namespace cattaneo;
using Catch::Approx;

namespace {

ProblemSpec variable_spec(BoundaryMode bc) {
  ProblemSpec s;
  s.length = 2.0;
  s.m = SmoothBump{1.0, 0.5};
  s.p = LinearRamp{2.0, -0.5};
  s.delta = TableCoefficient{{0.0, 1.0, 2.0}, {0.05, 0.2, 0.08}};
  s.eta = 0.8;
  s.kappa = 1.5;
  s.tau = 0.5;
  s.beta = 2.0;
  s.bc = bc;
  return s;
}

Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// Stencil evaluation on padded arrays (boundary zeros explicit), written
// directly from the difference formulas without the sparse operators.
Vector stencil_rhs(const ProblemSpec& s, const Grid& g, const StateVector& x) {
  const int n = g.cells;
  const double h = g.h;
  const bool nodal = theta_on_nodes(s.bc);
  std::vector<double> u(n + 1, 0.0), w(n + 1, 0.0);
  for (int j = 1; j < n; ++j) {
    u[j] = x.u()[j - 1];
    w[j] = x.w()[j - 1];
  }
  auto m = [&](int j) { return evaluate(s.m, g.nodes[j], s.length); };
  auto p = [&](int k) { return evaluate(s.p, g.midpoints[k], s.length); };
  auto d = [&](int k) { return evaluate(s.delta, g.midpoints[k], s.length); };
  std::vector<double> sigma(n);
  for (int k = 0; k < n; ++k) sigma[k] = p(k) * (u[k + 1] - u[k]) / h + 2.0 * d(k) * (w[k + 1] - w[k]) / h;

  StateVector out(x.layout);
  for (int j = 1; j < n; ++j) out.u()[j - 1] = w[j];
  if (nodal) {
    std::vector<double> th(n + 1, 0.0), q(n);
    for (int j = 1; j < n; ++j) th[j] = x.theta()[j - 1];
    for (int k = 0; k < n; ++k) q[k] = x.q()[k];
    for (int j = 1; j < n; ++j) {
      const double c_theta = (th[j + 1] - th[j - 1]) / (2 * h);
      const double c_w = (w[j + 1] - w[j - 1]) / (2 * h);
      out.w()[j - 1] = ((sigma[j] - sigma[j - 1]) / h - s.eta * c_theta) / m(j);
      out.theta()[j - 1] = -s.kappa * (q[j] - q[j - 1]) / h - s.eta * c_w;
    }
    for (int k = 0; k < n; ++k) out.q()[k] = (-s.beta * q[k] - s.kappa * (th[k + 1] - th[k]) / h) / s.tau;
  } else {
    std::vector<double> th(n), q(n + 1, 0.0);
    for (int k = 0; k < n; ++k) th[k] = x.theta()[k];
    for (int j = 1; j < n; ++j) q[j] = x.q()[j - 1];
    for (int j = 1; j < n; ++j) {
      out.w()[j - 1] = ((sigma[j] - sigma[j - 1]) / h - s.eta * (th[j] - th[j - 1]) / h) / m(j);
      out.q()[j - 1] = (-s.beta * q[j] - s.kappa * (th[j] - th[j - 1]) / h) / s.tau;
    }
    for (int k = 0; k < n; ++k)
      out.theta()[k] = -s.kappa * (q[k + 1] - q[k]) / h - s.eta * (w[k + 1] - w[k]) / h;
  }
  return out.values;
}

// Twice the energy, summed field by field.
double twice_energy(const ProblemSpec& s, const Grid& g, const StateVector& x) {
  const int n = g.cells;
  const double h = g.h;
  std::vector<double> u(n + 1, 0.0);
  for (int j = 1; j < n; ++j) u[j] = x.u()[j - 1];
  double e = 0.0;
  for (int k = 0; k < n; ++k) {
    const double du = (u[k + 1] - u[k]) / h;
    e += h * evaluate(s.p, g.midpoints[k], s.length) * du * du;
  }
  for (int j = 1; j < n; ++j) e += h * evaluate(s.m, g.nodes[j], s.length) * x.w()[j - 1] * x.w()[j - 1];
  e += h * x.theta().squaredNorm() + s.tau * h * x.q().squaredNorm();
  return e;
}

}  // namespace

TEST_CASE("layout dimensions and offsets") {
  for (auto bc : {BoundaryMode::DirichletTheta, BoundaryMode::DirichletFlux}) {
    const StateLayout l{bc, 10};
    CHECK(l.dim() == 4 * 10 - 3);
    CHECK(l.w_offset() == l.u_offset() + l.u_size());
    CHECK(l.theta_offset() == l.w_offset() + l.w_size());
    CHECK(l.q_offset() == l.theta_offset() + l.theta_size());
  }
  CHECK(StateLayout{BoundaryMode::DirichletTheta, 10}.theta_size() == 9);
  CHECK(StateLayout{BoundaryMode::DirichletFlux, 10}.theta_size() == 10);
  CHECK_THROWS_AS(StateVector(StateLayout{BoundaryMode::DirichletFlux, 10}, Vector::Zero(36)), std::invalid_argument);
}

TEST_CASE("difference operators") {
  const Grid g = build_grid(1.3, 12);
  const auto ops = build_difference_operators(g);
  std::mt19937_64 rng(3);

  SECTION("summation by parts") {
    for (int t = 0; t < 20; ++t) {
      const Vector v = random_vector(rng, g.cells - 1);
      const Vector a = random_vector(rng, g.cells);
      const double lhs = g.h * (ops.diff * v).dot(a);
      const double rhs = -g.h * v.dot(ops.diff_tilde * a);
      CHECK(lhs == Approx(rhs).epsilon(1e-13));
    }
  }
  SECTION("centered difference is antisymmetric") {
    const Eigen::MatrixXd c(ops.centered);
    CHECK((c + c.transpose()).norm() == 0.0);
    const Vector x = random_vector(rng, g.cells - 1), y = random_vector(rng, g.cells - 1);
    CHECK((ops.centered * x).dot(y) == Approx(-x.dot(ops.centered * y)).epsilon(1e-13));
  }
}

TEST_CASE("generator matches the stencil formulas") {
  for (auto bc : {BoundaryMode::DirichletTheta, BoundaryMode::DirichletFlux}) {
    const auto spec = variable_spec(bc);
    const Grid g = build_grid(spec.length, 9);
    const auto a = assemble_generator(spec, g);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 5; ++t) {
      const StateVector x(a.layout, random_vector(rng, a.layout.dim()));
      const Vector diff = a.A * x.values - stencil_rhs(spec, g, x);
      CHECK(diff.norm() <= 1e-12 * (a.A * x.values).norm());
      CHECK(x.values.dot(a.M * x.values) == Approx(twice_energy(spec, g, x)).epsilon(1e-13));
    }
    CHECK((a.A * a.zero_state().values).norm() == 0.0);
  }
}

TEST_CASE("Gram matrix is symmetric positive definite") {
  for (auto bc : {BoundaryMode::DirichletTheta, BoundaryMode::DirichletFlux}) {
    const auto a = assemble_generator(variable_spec(bc), build_grid(2.0, 16));
    const Eigen::MatrixXd m = a.dense_M();
    CHECK((m - m.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("discrete dissipativity and the dissipation identity") {
  ProblemSpec ref1;
  for (auto bc : {BoundaryMode::DirichletTheta, BoundaryMode::DirichletFlux}) {
    for (const auto& spec : {variable_spec(bc), [&] {
                               ProblemSpec s = ref1;
                               s.bc = bc;
                               return s;
                             }()}) {
      const auto a = assemble_generator(spec, build_grid(spec.length, 64));
      std::mt19937_64 rng(21);
      for (int t = 0; t < 100; ++t) {
        const Vector x = random_vector(rng, a.layout.dim());
        const double form = x.dot(a.M * (a.A * x));
        CHECK(form <= 0.0);
        CHECK(std::abs(form - dissipation_form(a, x)) <= 1e-12 * x.squaredNorm());
      }
    }
  }
}

TEST_CASE("DirichletFlux conserves the discrete theta integral") {
  const auto a = assemble_generator(variable_spec(BoundaryMode::DirichletFlux), build_grid(2.0, 20));
  const Eigen::MatrixXd dense = a.dense_A();
  const auto& l = a.layout;
  const Eigen::RowVectorXd weights = dense.middleRows(l.theta_offset(), l.theta_size()).colwise().sum() * a.grid.h;
  CHECK(weights.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gram_inner") {
  ProblemSpec spec;
  spec.bc = BoundaryMode::DirichletFlux;
  spec.tau = 0.7;
  const auto a = assemble_generator(spec, build_grid(spec.length, 16));
  CHECK(gram_inner(a, a.zero_state(), a.zero_state()) == 0.0);

  StateVector th(a.layout);
  th.theta().setOnes();
  CHECK(gram_inner(a, th, th) == Approx(spec.length));

  StateVector q(a.layout);
  std::mt19937_64 rng(5);
  q.q() = random_vector(rng, a.layout.q_size());
  CHECK(gram_inner(a, q, q) == Approx(spec.tau * a.grid.h * q.q().squaredNorm()));

  const Eigen::VectorXcd x = random_vector(rng, a.layout.dim()).cast<Complex>() +
                             Complex(0, 1) * random_vector(rng, a.layout.dim()).cast<Complex>();
  const Eigen::VectorXcd y = random_vector(rng, a.layout.dim()).cast<Complex>();
  CHECK(std::abs(gram_inner(a, x, y) - std::conj(gram_inner(a, y, x))) <= 1e-12 * std::abs(gram_inner(a, x, y)));
  CHECK(gram_inner(a, x, x).real() > 0.0);

  const auto other = assemble_generator(spec, build_grid(spec.length, 8));
  CHECK_THROWS_AS(gram_inner(a, other.zero_state(), a.zero_state()), std::invalid_argument);
}

TEST_CASE("discrete Poincare inequality") {
  const double L = std::numbers::pi;
  const Grid g = build_grid(L, 64);

  SECTION("the first Dirichlet eigenvector attains C_h") {
    Vector v(g.cells - 1);
    for (int j = 1; j < g.cells; ++j) v[j - 1] = std::sin(std::numbers::pi * g.nodes[j] / L);
    const auto pc = check_poincare(v, g);
    CHECK(pc.lhs / pc.rhs == Approx(pc.discrete_constant).epsilon(1e-12));
  }
  SECTION("C_h agrees with the smallest eigenvalue of D^T D") {
    const auto ops = build_difference_operators(g);
    const Eigen::MatrixXd dtd = Eigen::MatrixXd(ops.diff).transpose() * Eigen::MatrixXd(ops.diff);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dtd);
    CHECK(1.0 / es.eigenvalues().minCoeff() == Approx(check_poincare(Vector::Ones(63), g).discrete_constant));
  }
  SECTION("zero") {
    const auto pc = check_poincare(Vector::Zero(g.cells - 1), g);
    CHECK(pc.lhs == 0.0);
    CHECK(pc.rhs == 0.0);
  }
  SECTION("constant bounds") {
    const double c = check_poincare(Vector::Zero(63), g).discrete_constant;
    const double l2 = L * L / (std::numbers::pi * std::numbers::pi);
    CHECK(c >= l2);
    CHECK(c <= l2 * (1.0 + g.h * g.h));
    double prev = 1e300;
    for (int n : {8, 16, 32, 64, 128}) {
      const double ch = check_poincare(Vector::Zero(n - 1), build_grid(L, n)).discrete_constant;
      CHECK(ch < prev);
      prev = ch;
    }
    CHECK(prev == Approx(l2).epsilon(1e-4));
  }
  SECTION("random functions") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 50; ++t) {
      const auto pc = check_poincare(random_vector(rng, g.cells - 1), g);
      CHECK(pc.lhs <= pc.discrete_constant * pc.rhs * (1.0 + 1e-14));
    }
  }
  CHECK_THROWS_AS(check_poincare(Vector::Zero(10), g), std::invalid_argument);
}

TEST_CASE("assembly preconditions") {
  ProblemSpec bad;
  bad.delta = constant(0.0);
  CHECK_THROWS_AS(assemble_generator(bad, build_grid(bad.length, 16)), std::invalid_argument);
  ProblemSpec ok;
  CHECK_THROWS_AS(assemble_generator(ok, build_grid(1.0, 16)), std::invalid_argument);

  const auto a = assemble_generator(ok, build_grid(ok.length, 16));
  const auto flux_data = make_preset_initial("elastic_mode_1", a.grid, BoundaryMode::DirichletFlux);
  CHECK_THROWS_AS(to_state(flux_data, a), std::invalid_argument);
}
