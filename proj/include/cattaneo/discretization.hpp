#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cattaneo/grid.hpp"
#include "cattaneo/model.hpp"

namespace cattaneo {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Block placement of (u, w, theta, q) in the flat state vector. Boundary
/// Dirichlet values are eliminated, so every block holds interior unknowns only.
struct StateLayout {
  BoundaryMode bc = BoundaryMode::DirichletTheta;
  int cells = 0;

  int u_offset() const { return 0; }
  int u_size() const { return cells - 1; }
  int w_offset() const { return cells - 1; }
  int w_size() const { return cells - 1; }
  int theta_offset() const { return 2 * (cells - 1); }
  int theta_size() const { return theta_on_nodes(bc) ? cells - 1 : cells; }
  int q_offset() const { return theta_offset() + theta_size(); }
  int q_size() const { return theta_on_nodes(bc) ? cells : cells - 1; }
  int dim() const { return q_offset() + q_size(); }

  bool operator==(const StateLayout&) const = default;
};

/// Flat state with named block views.
struct StateVector {
  StateLayout layout;
  Vector values;

  StateVector() = default;
  explicit StateVector(const StateLayout& l) : layout(l), values(Vector::Zero(l.dim())) {}
  StateVector(const StateLayout& l, Vector v) : layout(l), values(std::move(v)) {
    if (values.size() != layout.dim()) throw std::invalid_argument("state length does not match layout");
  }

  auto u() { return values.segment(layout.u_offset(), layout.u_size()); }
  auto w() { return values.segment(layout.w_offset(), layout.w_size()); }
  auto theta() { return values.segment(layout.theta_offset(), layout.theta_size()); }
  auto q() { return values.segment(layout.q_offset(), layout.q_size()); }
  auto u() const { return values.segment(layout.u_offset(), layout.u_size()); }
  auto w() const { return values.segment(layout.w_offset(), layout.w_size()); }
  auto theta() const { return values.segment(layout.theta_offset(), layout.theta_size()); }
  auto q() const { return values.segment(layout.q_offset(), layout.q_size()); }
};

/// Difference operators on the staggered grid, acting on interior values.
///   diff      (N x N-1)   node -> midpoint,  (Dv)_{j+1/2} = (v_{j+1} - v_j)/h, zero boundary values
///   diff_tilde(N-1 x N)   midpoint -> node,  (D~a)_j = (a_{j+1/2} - a_{j-1/2})/h; equals -diff^T
///   centered  (N-1 x N-1) node -> node, (Cv)_j = (v_{j+1} - v_{j-1})/(2h); antisymmetric
struct DifferenceOperators {
  SparseMatrix diff;
  SparseMatrix diff_tilde;
  SparseMatrix centered;
};

inline DifferenceOperators build_difference_operators(const Grid& g) {
  const int n = g.cells;
  const double ih = 1.0 / g.h;
  DifferenceOperators ops;
  std::vector<Triplet> t;
  for (int k = 0; k < n; ++k) {
    if (k + 1 <= n - 1) t.emplace_back(k, k, ih);      // node k+1 -> interior index k
    if (k >= 1) t.emplace_back(k, k - 1, -ih);         // node k   -> interior index k-1
  }
  ops.diff.resize(n, n - 1);
  ops.diff.setFromTriplets(t.begin(), t.end());
  ops.diff_tilde = -SparseMatrix(ops.diff.transpose());

  t.clear();
  for (int i = 0; i < n - 1; ++i) {
    if (i + 1 < n - 1) t.emplace_back(i, i + 1, 0.5 * ih);
    if (i - 1 >= 0) t.emplace_back(i, i - 1, -0.5 * ih);
  }
  ops.centered.resize(n - 1, n - 1);
  ops.centered.setFromTriplets(t.begin(), t.end());
  return ops;
}

/// Coefficients sampled where the scheme uses them: m at nodes, p and delta at midpoints.
struct SampledCoefficients {
  std::vector<double> m_nodes;
  std::vector<double> p_mid;
  std::vector<double> delta_mid;
};

inline SampledCoefficients sample_on_grid(const ProblemSpec& spec, const Grid& g) {
  return {sample_coefficient(spec.m, g.nodes, g.length), sample_coefficient(spec.p, g.midpoints, g.length),
          sample_coefficient(spec.delta, g.midpoints, g.length)};
}

/// Semi-discrete generator A (dU/dt = A U) and the Gram matrix M of the energy
/// inner product. Immutable after assembly.
struct GeneratorAssembly {
  ProblemSpec spec;
  Grid grid;
  StateLayout layout;
  SampledCoefficients coefficients;
  DifferenceOperators ops;
  SparseMatrix A;
  SparseMatrix M;

  Eigen::MatrixXd dense_A() const { return Eigen::MatrixXd(A); }
  Eigen::MatrixXd dense_M() const { return Eigen::MatrixXd(M); }
  StateVector zero_state() const { return StateVector(layout); }
  StateVector apply(const StateVector& x) const { return StateVector(layout, A * x.values); }
};

inline GeneratorAssembly assemble_generator(const ProblemSpec& spec, const Grid& grid) {
  const auto report = validate_spec(spec, 4 * grid.cells);
  if (!report.valid()) throw std::invalid_argument("invalid problem: " + report.violations.front());
  if (std::abs(grid.length - spec.length) > 1e-12 * spec.length)
    throw std::invalid_argument("grid length does not match problem length");

  GeneratorAssembly a;
  a.spec = spec;
  a.grid = grid;
  a.layout = StateLayout{spec.bc, grid.cells};
  a.coefficients = sample_on_grid(spec, grid);
  a.ops = build_difference_operators(grid);

  const int n = grid.cells;
  const double h = grid.h, ih = 1.0 / h;
  const auto& L = a.layout;
  const auto& c = a.coefficients;
  const bool nodal_theta = theta_on_nodes(spec.bc);
  const double eta = spec.eta, kappa = spec.kappa, tau = spec.tau, beta = spec.beta;

  // Interior node j (1..N-1) maps to block index j-1; midpoint k maps to k.
  auto node = [](int offset, int j) { return offset + j - 1; };
  auto mid = [](int offset, int k) { return offset + k; };

  std::vector<Triplet> t;
  t.reserve(16 * n);

  for (int j = 1; j <= n - 1; ++j) {
    // u_t = w
    t.emplace_back(node(L.u_offset(), j), node(L.w_offset(), j), 1.0);

    // m w_t = D~(p Du + 2 delta Dw) - eta * (theta gradient)
    const int row = node(L.w_offset(), j);
    const double im = 1.0 / c.m_nodes[j];
    // flux through midpoint j+1/2 (between nodes j, j+1) enters with +1/h,
    // through midpoint j-1/2 (nodes j-1, j) with -1/h.
    for (auto [k, sign] : {std::pair{j, 1.0}, std::pair{j - 1, -1.0}}) {
      const double pc = c.p_mid[k], dc = 2.0 * c.delta_mid[k];
      const int left = k, right = k + 1;  // nodes bounding midpoint k
      for (auto [col_node, dsign] : {std::pair{right, 1.0}, std::pair{left, -1.0}}) {
        if (col_node < 1 || col_node > n - 1) continue;
        const double s = sign * dsign * ih * ih * im;
        t.emplace_back(row, node(L.u_offset(), col_node), s * pc);
        t.emplace_back(row, node(L.w_offset(), col_node), s * dc);
      }
    }
    if (nodal_theta) {
      if (j + 1 <= n - 1) t.emplace_back(row, node(L.theta_offset(), j + 1), -eta * im * 0.5 * ih);
      if (j - 1 >= 1) t.emplace_back(row, node(L.theta_offset(), j - 1), eta * im * 0.5 * ih);
    } else {
      t.emplace_back(row, mid(L.theta_offset(), j), -eta * im * ih);
      t.emplace_back(row, mid(L.theta_offset(), j - 1), eta * im * ih);
    }
  }

  if (nodal_theta) {
    for (int j = 1; j <= n - 1; ++j) {
      // theta_t = -kappa D~q - eta C w
      const int row = node(L.theta_offset(), j);
      t.emplace_back(row, mid(L.q_offset(), j), -kappa * ih);
      t.emplace_back(row, mid(L.q_offset(), j - 1), kappa * ih);
      if (j + 1 <= n - 1) t.emplace_back(row, node(L.w_offset(), j + 1), -eta * 0.5 * ih);
      if (j - 1 >= 1) t.emplace_back(row, node(L.w_offset(), j - 1), eta * 0.5 * ih);
    }
    for (int k = 0; k < n; ++k) {
      // tau q_t = -beta q - kappa D theta
      const int row = mid(L.q_offset(), k);
      t.emplace_back(row, row, -beta / tau);
      if (k + 1 <= n - 1) t.emplace_back(row, node(L.theta_offset(), k + 1), -kappa * ih / tau);
      if (k >= 1) t.emplace_back(row, node(L.theta_offset(), k), kappa * ih / tau);
    }
  } else {
    for (int k = 0; k < n; ++k) {
      // theta_t = -kappa D q - eta D w
      const int row = mid(L.theta_offset(), k);
      if (k + 1 <= n - 1) {
        t.emplace_back(row, node(L.q_offset(), k + 1), -kappa * ih);
        t.emplace_back(row, node(L.w_offset(), k + 1), -eta * ih);
      }
      if (k >= 1) {
        t.emplace_back(row, node(L.q_offset(), k), kappa * ih);
        t.emplace_back(row, node(L.w_offset(), k), eta * ih);
      }
    }
    for (int j = 1; j <= n - 1; ++j) {
      // tau q_t = -beta q - kappa D~theta
      const int row = node(L.q_offset(), j);
      t.emplace_back(row, row, -beta / tau);
      t.emplace_back(row, mid(L.theta_offset(), j), -kappa * ih / tau);
      t.emplace_back(row, mid(L.theta_offset(), j - 1), kappa * ih / tau);
    }
  }

  a.A.resize(L.dim(), L.dim());
  a.A.setFromTriplets(t.begin(), t.end());
  a.A.makeCompressed();

  // Gram matrix: D^T diag(p h) D | diag(m h) | diag(h) | tau diag(h).
  t.clear();
  for (int k = 0; k < n; ++k) {
    const double wk = c.p_mid[k] * h * ih * ih;
    const int left = k, right = k + 1;
    for (int a1 : {left, right}) {
      for (int a2 : {left, right}) {
        if (a1 < 1 || a1 > n - 1 || a2 < 1 || a2 > n - 1) continue;
        const double s = (a1 == right ? 1.0 : -1.0) * (a2 == right ? 1.0 : -1.0);
        t.emplace_back(node(L.u_offset(), a1), node(L.u_offset(), a2), s * wk);
      }
    }
  }
  for (int j = 1; j <= n - 1; ++j) t.emplace_back(node(L.w_offset(), j), node(L.w_offset(), j), c.m_nodes[j] * h);
  for (int i = 0; i < L.theta_size(); ++i) t.emplace_back(L.theta_offset() + i, L.theta_offset() + i, h);
  for (int i = 0; i < L.q_size(); ++i) t.emplace_back(L.q_offset() + i, L.q_offset() + i, tau * h);
  a.M.resize(L.dim(), L.dim());
  a.M.setFromTriplets(t.begin(), t.end());
  a.M.makeCompressed();
  return a;
}

/// <M x, y> with the conjugate on y.
inline std::complex<double> gram_inner(const GeneratorAssembly& a, const Eigen::VectorXcd& x,
                                       const Eigen::VectorXcd& y) {
  if (x.size() != a.layout.dim() || y.size() != a.layout.dim())
    throw std::invalid_argument("gram_inner: dimension mismatch");
  const Eigen::VectorXcd mx = a.M.cast<std::complex<double>>() * x;
  return y.dot(mx);  // Eigen's dot conjugates its first argument
}

inline double gram_inner(const GeneratorAssembly& a, const StateVector& x, const StateVector& y) {
  if (!(x.layout == a.layout) || !(y.layout == a.layout))
    throw std::invalid_argument("gram_inner: layout mismatch");
  return y.values.dot(a.M * x.values);
}

inline double energy_norm_squared(const GeneratorAssembly& a, const Vector& x) { return x.dot(a.M * x); }

/// Explicit dissipation quadratic form -2 sum_mid h delta (Dw)^2 - beta sum h q^2;
/// equals x^T M A x identically.
inline double dissipation_form(const GeneratorAssembly& a, const Vector& x) {
  const auto& L = a.layout;
  const Vector dw = a.ops.diff * x.segment(L.w_offset(), L.w_size());
  double s = 0.0;
  for (int k = 0; k < dw.size(); ++k) s += a.grid.h * a.coefficients.delta_mid[k] * dw[k] * dw[k];
  const auto q = x.segment(L.q_offset(), L.q_size());
  return -2.0 * s - a.spec.beta * a.grid.h * q.squaredNorm();
}

/// Interior values in the layout of `bc` built from full grid functions.
inline StateVector to_state(const InitialData& d, const GeneratorAssembly& a) {
  check_initial_data(d, a.grid);
  if (d.bc != a.layout.bc) throw std::invalid_argument("initial data boundary mode does not match assembly");
  StateVector s(a.layout);
  const int n = a.grid.cells;
  for (int j = 1; j <= n - 1; ++j) {
    s.u()[j - 1] = d.u0[j];
    s.w()[j - 1] = d.w0[j];
  }
  if (theta_on_nodes(d.bc)) {
    for (int j = 1; j <= n - 1; ++j) s.theta()[j - 1] = d.theta0[j];
    for (int k = 0; k < n; ++k) s.q()[k] = d.q0[k];
  } else {
    for (int k = 0; k < n; ++k) s.theta()[k] = d.theta0[k];
    for (int j = 1; j <= n - 1; ++j) s.q()[j - 1] = d.q0[j];
  }
  return s;
}

struct PoincareCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double discrete_constant = 0.0;
};

/// Discrete Poincare-Scheeffer: sum_node h v^2 <= C_h sum_mid h (Dv)^2 with
/// C_h = h^2 / (4 sin^2(pi h / (2L))), the inverse smallest eigenvalue of D^T D.
inline PoincareCheck check_poincare(const Vector& interior_values, const Grid& g) {
  if (interior_values.size() != g.cells - 1) throw std::invalid_argument("expected N-1 interior values");
  const auto ops = build_difference_operators(g);
  const Vector dv = ops.diff * interior_values;
  const double s = std::sin(std::numbers::pi * g.h / (2.0 * g.length));
  return {g.h * interior_values.squaredNorm(), g.h * dv.squaredNorm(), g.h * g.h / (4.0 * s * s)};
}

}  // namespace cattaneo
