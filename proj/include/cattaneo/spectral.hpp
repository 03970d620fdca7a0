#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cattaneo/discretization.hpp"
#include "cattaneo/timestepper.hpp"

namespace cattaneo {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// iλ lies (numerically) on the spectrum of the generator.
class SingularShift : public NumericalError {
 public:
  SingularShift(double lambda, const std::string& what) : NumericalError(what), lambda_(lambda) {}
  double lambda() const { return lambda_; }

 private:
  double lambda_;
};

/// Max absolute row sum; the reference scale for spectral tolerances.
inline double generator_norm(const GeneratorAssembly& a) {
  Vector rows = Vector::Zero(a.A.rows());
  for (int k = 0; k < a.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a.A, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.maxCoeff();
}

struct DeflatedPair {
  Complex eigenvalue;
  double residual = 0.0;  // ||A v|| / ||v||
  ComplexVector eigenvector;
};

struct SpectrumReport {
  std::vector<Complex> eigenvalues;  // retained
  double spectral_abscissa = -std::numeric_limits<double>::infinity();
  std::vector<DeflatedPair> deflated;
  double max_relative_residual = 0.0;  // max ||A v - λ v|| / (||A|| ||v||) over all pairs
  double generator_norm = 0.0;
};

inline constexpr int kDenseLimit = 4096;

/// Full dense eigensolve of A. Under DirichletFlux, pairs with |λ| <= 1e-8 ||A||
/// and ||A v|| <= 1e-8 ||v|| are moved to `deflated` (the conserved-mean kernel).
inline SpectrumReport eigenvalues(const GeneratorAssembly& a, int dense_limit = kDenseLimit) {
  const int n = a.layout.dim();
  if (n > dense_limit) throw std::invalid_argument("dimension exceeds dense eigensolver limit");
  const Eigen::MatrixXd dense = a.dense_A();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, true);
  if (solver.info() != Eigen::Success) throw NumericalError("nonsymmetric eigensolve did not converge");

  SpectrumReport r;
  r.generator_norm = generator_norm(a);
  const ComplexMatrix vectors = solver.eigenvectors();
  const ComplexVector values = solver.eigenvalues();
  const ComplexMatrix ac = dense.cast<Complex>();
  for (int i = 0; i < n; ++i) {
    const ComplexVector v = vectors.col(i);
    const ComplexVector av = ac * v;
    const double vn = v.norm();
    r.max_relative_residual =
        std::max(r.max_relative_residual, (av - values[i] * v).norm() / (r.generator_norm * vn));
    const double kernel_residual = av.norm() / vn;
    const bool near_kernel = std::abs(values[i]) <= 1e-8 * r.generator_norm && kernel_residual <= 1e-8;
    if (a.layout.bc == BoundaryMode::DirichletFlux && near_kernel) {
      r.deflated.push_back({values[i], kernel_residual, v / vn});
    } else {
      r.eigenvalues.push_back(values[i]);
      r.spectral_abscissa = std::max(r.spectral_abscissa, values[i].real());
    }
  }
  return r;
}

inline double spectral_abscissa(const GeneratorAssembly& a) { return eigenvalues(a).spectral_abscissa; }

/// Generator and Gram matrix restricted to the invariant subspace used for
/// resolvent analysis. Under DirichletFlux the mean temperature mode is
/// eliminated with the basis theta = (y_0, ..., y_{N-2}, -sum y); otherwise the
/// restriction is the identity.
struct RestrictedSystem {
  SparseMatrix basis;      // V: full <- restricted
  SparseMatrix selector;   // S: restricted <- full, S V = I
  SparseMatrix generator;  // S A V
  SparseMatrix gram;       // V^T M V
};

inline RestrictedSystem restrict_system(const GeneratorAssembly& a) {
  const auto& L = a.layout;
  const int n = L.dim();
  RestrictedSystem r;
  if (L.bc == BoundaryMode::DirichletTheta) {
    r.basis.resize(n, n);
    r.basis.setIdentity();
    r.selector = r.basis;
  } else {
    const int last = L.theta_offset() + L.theta_size() - 1;
    std::vector<Triplet> tv, ts;
    for (int i = 0, col = 0; i < n; ++i) {
      if (i == last) continue;
      tv.emplace_back(i, col, 1.0);
      ts.emplace_back(col, i, 1.0);
      if (i >= L.theta_offset() && i < last) tv.emplace_back(last, col, -1.0);
      ++col;
    }
    r.basis.resize(n, n - 1);
    r.basis.setFromTriplets(tv.begin(), tv.end());
    r.selector.resize(n - 1, n);
    r.selector.setFromTriplets(ts.begin(), ts.end());
  }
  r.generator = r.selector * a.A * r.basis;
  r.gram = SparseMatrix(r.basis.transpose()) * a.M * r.basis;
  r.generator.makeCompressed();
  r.gram.makeCompressed();
  return r;
}

/// Energy-norm resolvent of the restricted generator. With M = L L^T and
/// K = L^T A L^{-T}, ||(iλ - A)^{-1}||_M = ||(iλ - K)^{-1}||_2 = ||(iλ - T)^{-1}||_2
/// for the complex Schur form K = Q T Q^*. The largest singular value of the
/// triangular inverse is found by Lanczos on (B B^*)^{-1}, B = iλ - T.
class ResolventAnalysis {
 public:
  explicit ResolventAnalysis(const GeneratorAssembly& a) : restricted_(restrict_system(a)) {
    const Eigen::MatrixXd ahat(restricted_.generator);
    const Eigen::MatrixXd mhat(restricted_.gram);
    Eigen::LLT<Eigen::MatrixXd> llt(mhat);
    if (llt.info() != Eigen::Success) throw NumericalError("Gram matrix is not positive definite");
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::MatrixXd y = lower.triangularView<Eigen::Lower>().solve(ahat.transpose());  // L^{-1} A^T
    const Eigen::MatrixXd k = lower.transpose() * y.transpose();
    scale_ = k.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::ComplexSchur<ComplexMatrix> schur(k.cast<Complex>());
    if (schur.info() != Eigen::Success) throw NumericalError("complex Schur decomposition failed");
    triangular_ = schur.matrixT();
    ahat_ = ahat;
    lower_ = lower;
  }

  const RestrictedSystem& restricted() const { return restricted_; }
  int dim() const { return static_cast<int>(ahat_.rows()); }

  /// ||(iλ I - A)^{-1}|| in the energy norm.
  double norm(double lambda) const {
    const int n = dim();
    ComplexMatrix b = -triangular_;
    b.diagonal().array() += Complex(0.0, lambda);
    const double min_pivot = b.diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > 1e-14 * std::max(1.0, scale_)))
      throw SingularShift(lambda, "i*lambda is an eigenvalue (lambda=" + std::to_string(lambda) + ")");

    auto apply = [&](const ComplexVector& x) -> ComplexVector {
      const ComplexVector y = b.triangularView<Eigen::Upper>().solve(x);
      return b.adjoint().triangularView<Eigen::Lower>().solve(y);
    };

    const int max_iter = std::min(n, 400);
    std::vector<ComplexVector> basis;
    std::vector<double> alpha, beta;
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    ComplexVector q(n);
    for (int i = 0; i < n; ++i) q[i] = Complex(unif(rng), unif(rng));
    q.normalize();
    double ritz = 0.0;
    for (int j = 0; j < max_iter; ++j) {
      basis.push_back(q);
      ComplexVector z = apply(q);
      alpha.push_back(q.dot(z).real());
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& v : basis) z -= v.dot(z) * v;
      const double bj = z.norm();

      const int m = static_cast<int>(alpha.size());
      Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) tri(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) tri(i, i + 1) = tri(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
      ritz = es.eigenvalues()[m - 1];
      const double residual = bj * std::abs(es.eigenvectors()(m - 1, m - 1));
      if (residual <= 1e-11 * ritz || bj <= 1e-14 * ritz) break;
      beta.push_back(bj);
      q = z / bj;
    }
    const double result = std::sqrt(ritz);
    if (!std::isfinite(result) || result * scale_ > 1e14)
      throw SingularShift(lambda, "resolvent norm blew up at lambda=" + std::to_string(lambda));
    return result;
  }

  /// Direct solve of (iλ I - A) x = f in restricted coordinates (dense LU).
  ComplexVector solve(double lambda, const ComplexVector& f) const {
    ComplexMatrix shifted = -ahat_.cast<Complex>();
    shifted.diagonal().array() += Complex(0.0, lambda);
    return shifted.partialPivLu().solve(f);
  }

  /// ||x||_M in restricted coordinates.
  double energy_norm(const ComplexVector& x) const {
    return (lower_.transpose().cast<Complex>() * x).norm();
  }

 private:
  RestrictedSystem restricted_;
  Eigen::MatrixXd ahat_;
  Eigen::MatrixXd lower_;
  ComplexMatrix triangular_;
  double scale_ = 1.0;
};

inline double resolvent_norm(const GeneratorAssembly& a, double lambda) { return ResolventAnalysis(a).norm(lambda); }

struct ResolventSweep {
  std::vector<double> lambdas;
  std::vector<double> norms;
  double sup_norm = 0.0;
};

/// Uniform grid of n_points values on [-lambda_max, lambda_max]. Points are
/// independent and split across `threads` workers; results do not depend on
/// the thread count.
inline ResolventSweep sweep_resolvent(const ResolventAnalysis& analysis, double lambda_max, int n_points,
                                      unsigned threads = std::max(1u, std::thread::hardware_concurrency())) {
  if (n_points < 3) throw std::invalid_argument("sweep needs at least 3 points");
  if (!(lambda_max >= 0.0)) throw std::invalid_argument("lambda_max must be nonnegative");
  ResolventSweep s;
  s.lambdas.resize(n_points);
  s.norms.assign(n_points, 0.0);
  // Mirrored so that lambdas[n-1-i] == -lambdas[i] exactly.
  for (int i = 0; i <= (n_points - 1) / 2; ++i) {
    const double v = lambda_max * (1.0 - 2.0 * i / (n_points - 1));
    s.lambdas[i] = v == 0.0 ? 0.0 : -v;
    s.lambdas[n_points - 1 - i] = v;
  }

  std::vector<std::exception_ptr> errors(n_points);
  auto work = [&](unsigned worker, unsigned workers) {
    for (int i = static_cast<int>(worker); i < n_points; i += static_cast<int>(workers)) {
      try {
        s.norms[i] = analysis.norm(s.lambdas[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::clamp(threads, 1u, static_cast<unsigned>(n_points));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  s.sup_norm = *std::max_element(s.norms.begin(), s.norms.end());
  return s;
}

inline ResolventSweep sweep_resolvent(const GeneratorAssembly& a, double lambda_max, int n_points) {
  return sweep_resolvent(ResolventAnalysis(a), lambda_max, n_points);
}

struct StationarySolution {
  StateVector state;
  double residual = 0.0;  // ||A U - F'|| with F' the (projected) right-hand side
};

/// Solves A U = F. Under DirichletFlux the theta block of F is first projected
/// to zero mean and U is taken in the zero-mean subspace.
inline StationarySolution solve_stationary(const GeneratorAssembly& a, const StateVector& f) {
  if (!(f.layout == a.layout)) throw std::invalid_argument("right-hand side layout does not match assembly");
  StateVector rhs = f;
  if (a.layout.bc == BoundaryMode::DirichletFlux) rhs.theta().array() -= rhs.theta().mean();
  const RestrictedSystem r = restrict_system(a);
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(r.generator);
  if (lu.info() != Eigen::Success) throw NumericalError("stationary system is singular");
  Vector y = lu.solve(r.selector * rhs.values);
  StationarySolution out{StateVector(a.layout, r.basis * y), 0.0};
  Vector res = a.A * out.state.values - rhs.values;
  if (res.norm() > 1e-12 * rhs.values.norm()) {
    y += lu.solve(r.selector * (-res));
    out.state.values = r.basis * y;
    res = a.A * out.state.values - rhs.values;
  }
  out.residual = res.norm();
  if (!out.state.values.allFinite() || out.residual > 1e-10 * std::max(rhs.values.norm(), 1e-300))
    throw NumericalError("stationary solve residual " + std::to_string(out.residual) + " exceeds tolerance");
  return out;
}

}  // namespace cattaneo
