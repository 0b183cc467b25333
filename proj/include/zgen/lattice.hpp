#pragma once

// Discrete kinetic kernel K = d^2/dt^2 + m^2 - i*eps on a point or a
// temporal chain, and the propagator matrix Delta = -K^{-1}. Everything
// is dense; the models are desk scale by construction.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace zgen::lattice {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

enum class Geometry { Point, Chain };
enum class Boundary { Periodic, Dirichlet };

struct ModelSpec {
  Geometry geometry = Geometry::Point;
  int sites = 1;        // total site count N
  double spacing = 1.0; // lattice spacing a (chain only)
  double mass = 1.0;
  double epsilon = 0.1; // fixed finite damping, never taken to zero
  double coupling = 0.0;
  Boundary boundary = Boundary::Periodic;

  void validate() const {
    if (sites < 1) throw std::invalid_argument("ModelSpec: sites must be >= 1");
    if (geometry == Geometry::Point && sites != 1)
      throw std::invalid_argument("ModelSpec: point geometry has exactly one site");
    if (spacing <= 0) throw std::invalid_argument("ModelSpec: spacing must be positive");
    if (mass <= 0) throw std::invalid_argument("ModelSpec: mass must be positive");
    if (epsilon <= 0) throw std::invalid_argument("ModelSpec: epsilon must be strictly positive");
    if (coupling < 0) throw std::invalid_argument("ModelSpec: coupling must be non-negative");
  }
};

struct Kernel {
  Matrix matrix;
};

struct Propagator {
  Matrix matrix;
  bool external = false;  // true when not backed by the K*Delta = -I contract
  double residual = 0.0;  // max-norm of K*Delta + I at build time
};

/// Second-difference stencil plus (m^2 - i*eps) on the diagonal.
inline Kernel build_kernel(const ModelSpec& spec) {
  spec.validate();
  int n = spec.sites;
  Complex diag_shift(spec.mass * spec.mass, -spec.epsilon);

  Kernel k;
  k.matrix = Matrix::Zero(n, n);
  if (spec.geometry == Geometry::Point) {
    k.matrix(0, 0) = diag_shift;
    return k;
  }
  double inv_a2 = 1.0 / (spec.spacing * spec.spacing);
  for (int j = 0; j < n; ++j) {
    k.matrix(j, j) += diag_shift - Complex(2.0 * inv_a2, 0);
    auto couple = [&](int other) {
      if (other >= 0 && other < n) k.matrix(j, other) += inv_a2;
    };
    if (spec.boundary == Boundary::Periodic) {
      // N = 1 wraps onto the diagonal, N = 2 doubles the off-diagonal
      k.matrix(j, ((j + 1) % n + n) % n) += inv_a2;
      k.matrix(j, ((j - 1) % n + n) % n) += inv_a2;
    } else {
      couple(j + 1);  // field pinned to zero outside the chain
      couple(j - 1);
    }
  }
  return k;
}

/// Delta = -K^{-1} by dense LU, post-symmetrized; rejects solves whose
/// residual ||K*Delta + I||_max exceeds the contract.
inline Propagator propagator(const Kernel& kernel, double tol = 1e-10) {
  int n = (int)kernel.matrix.rows();
  Matrix delta = kernel.matrix.partialPivLu().solve(-Matrix::Identity(n, n));
  delta = ((delta + delta.transpose()) / 2.0).eval();
  double res = (kernel.matrix * delta + Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(res < tol))
    throw std::runtime_error("propagator: solve residual " + std::to_string(res) +
                             " exceeds tolerance");
  return Propagator{std::move(delta), false, res};
}

/// Wraps an externally supplied symmetric matrix (e.g. a continuum
/// single-mode Delta_F sampled on a time grid) as a Propagator. The
/// K*Delta = -I contract is not claimed for these.
inline Propagator external_propagator(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("external_propagator: matrix must be square");
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 0)
    throw std::invalid_argument("external_propagator: matrix must be symmetric");
  return Propagator{matrix, true, 0.0};
}

}  // namespace zgen::lattice
