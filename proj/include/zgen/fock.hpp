#pragma once

// Truncated single-mode Fock-space realization: interaction-picture
// field matrices, time-sliced evolution with a phi^4 vertex and a source
// term, the operator-level Wick identity check, the factorization of the
// time-ordered exponential, and the normalized S operator.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace zgen::fock {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

struct FockSpace {
  int dim = 16;
  double omega = 1.0;

  FockSpace(int d, double w) : dim(d), omega(w) {
    if (d < 2) throw std::invalid_argument("FockSpace: dim must be >= 2");
    if (w <= 0) throw std::invalid_argument("FockSpace: omega must be positive");
  }

  Matrix annihilation() const {
    Matrix a = Matrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt((double)n);
    return a;
  }
  Matrix creation() const { return annihilation().adjoint(); }

  /// Schroedinger-picture field at t = 0: (a + a^dag)/sqrt(2 omega).
  Matrix phi0() const {
    Matrix a = annihilation();
    return (a + a.adjoint()) / std::sqrt(2.0 * omega);
  }
};

struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  int steps = 1;

  TimeGrid(double a, double b, int n) : t0(a), t1(b), steps(n) {
    if (n < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
    if (!(b > a)) throw std::invalid_argument("TimeGrid: t1 must exceed t0");
  }
  double dt() const { return (t1 - t0) / steps; }
  double midpoint(int k) const { return t0 + (k + 0.5) * dt(); }
};

struct FockOperator {
  Matrix matrix;
};

/// Interaction-picture field: e^{iH0 t} phi(0) e^{-iH0 t} with diagonal
/// H0 = omega a^dag a, i.e. entrywise phases e^{i omega (j-k) t}.
inline FockOperator phi_at(const FockSpace& space, double t) {
  Matrix p = space.phi0();
  for (int j = 0; j < space.dim; ++j)
    for (int k = 0; k < space.dim; ++k)
      p(j, k) *= std::exp(Complex(0, space.omega * (j - k) * t));
  return {std::move(p)};
}

/// exp(-i s H) for Hermitian H, by eigendecomposition.
inline Matrix expi(const Matrix& h, double s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXcd phases(h.rows());
  for (int j = 0; j < h.rows(); ++j)
    phases(j) = std::exp(Complex(0, -s * es.eigenvalues()(j)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Time-ordered product of per-slice exponentials (latest slice
/// leftmost) of H_k = lambda/4! phi(t_k)^4 - J_k phi(t_k) at the slice
/// midpoints. lambda = 0 with J = 0 gives the identity.
inline FockOperator sliced_evolution(const FockSpace& space, const TimeGrid& grid,
                                     double lambda, const std::vector<double>& source) {
  if ((int)source.size() != grid.steps)
    throw std::invalid_argument("sliced_evolution: source sample count must equal steps");
  double dt = grid.dt();
  Matrix u = Matrix::Identity(space.dim, space.dim);
  for (int k = 0; k < grid.steps; ++k) {
    Matrix phi = phi_at(space, grid.midpoint(k)).matrix;
    Matrix h = (lambda / 24.0) * phi * phi * phi * phi - source[k] * phi;
    u = (expi(h, dt) * u).eval();
  }
  return {std::move(u)};
}

inline Complex vacuum_amplitude(const FockOperator& op) { return op.matrix(0, 0); }

/// Closed-form single-mode Feynman propagator on the time axis:
/// Delta_F(t,t') = -i e^{-i omega |t-t'|} / (2 omega).
inline Complex propagator_closed_form(double omega, double t, double tp) {
  return Complex(0, -1) * std::exp(Complex(0, -omega * std::abs(t - tp))) / (2.0 * omega);
}

/// Continuum double integral of J(t) Delta_F(t-t') J(t') over the grid
/// window, by a fine composite trapezoid independent of the slicing.
inline Complex source_quadratic_form(const FockSpace& space, const TimeGrid& grid,
                                     const std::function<double(double)>& source,
                                     int ref_nodes = 32769) {
  // 2 * integral over t > t' of J(t) e^{-i w t} J(t') e^{i w t'} * (-i/(2w))
  double h = (grid.t1 - grid.t0) / (ref_nodes - 1);
  Complex outer(0), inner(0);
  double j_prev = source(grid.t0);
  Complex e_prev = std::exp(Complex(0, space.omega * grid.t0));
  for (int k = 1; k < ref_nodes; ++k) {
    double t = grid.t0 + k * h;
    double jt = source(t);
    Complex ep = std::exp(Complex(0, space.omega * t));
    inner += 0.5 * h * (j_prev * e_prev + jt * ep);
    // trapezoid in the outer variable as well; endpoints carry half weight
    double w = (k == ref_nodes - 1) ? 0.5 * h : h;
    outer += w * jt * std::conj(ep) * inner;
    j_prev = jt;
    e_prev = ep;
  }
  return 2.0 * outer * Complex(0, -1) / (2.0 * space.omega);
}

struct WickIdentityReport {
  Complex lhs;              // vacuum amplitude of the sliced T-exponential
  Complex rhs;              // exp(-(i/2) * continuum double integral)
  double residual = 0.0;    // |lhs - rhs|
  double unitarity_defect = 0.0;
};

/// Operator-level Wick identity at lambda = 0: the vacuum amplitude of
/// the sliced source-only evolution against the closed-form Gaussian.
inline WickIdentityReport check_wick_identity(const FockSpace& space, const TimeGrid& grid,
                                              const std::function<double(double)>& source) {
  std::vector<double> samples(grid.steps);
  for (int k = 0; k < grid.steps; ++k) samples[k] = source(grid.midpoint(k));
  FockOperator u = sliced_evolution(space, grid, 0.0, samples);
  WickIdentityReport rep;
  rep.lhs = vacuum_amplitude(u);
  rep.rhs = std::exp(Complex(0, -0.5) * source_quadratic_form(space, grid, source));
  rep.residual = std::abs(rep.lhs - rep.rhs);
  rep.unitarity_defect = (u.matrix.adjoint() * u.matrix -
                          Matrix::Identity(space.dim, space.dim))
                             .cwiseAbs()
                             .maxCoeff();
  return rep;
}

/// T(exp(V_A) exp(V_B)) with each exponential carrying its own slicing:
/// vertex slices at midpoints, source slices at the staggered trapezoid
/// nodes, all factors merged in decreasing-time order.
inline FockOperator factored_evolution(const FockSpace& space, const TimeGrid& grid,
                                       double lambda,
                                       const std::function<double(double)>& source) {
  struct Event {
    double t;
    double weight;
    bool vertex;
  };
  double dt = grid.dt();
  std::vector<Event> events;
  events.reserve(2 * grid.steps + 1);
  for (int k = 0; k < grid.steps; ++k) events.push_back({grid.midpoint(k), dt, true});
  for (int k = 0; k <= grid.steps; ++k) {
    double w = (k == 0 || k == grid.steps) ? 0.5 * dt : dt;
    events.push_back({grid.t0 + k * dt, w, false});
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.t < b.t; });
  Matrix u = Matrix::Identity(space.dim, space.dim);
  for (const Event& ev : events) {
    Matrix phi = phi_at(space, ev.t).matrix;
    Matrix h = ev.vertex ? Matrix((lambda / 24.0) * phi * phi * phi * phi)
                         : Matrix(-source(ev.t) * phi);
    u = (expi(h, ev.weight) * u).eval();
  }
  return {std::move(u)};
}

struct FactorizationReport {
  std::vector<int> steps;
  std::vector<double> deviation;  // ||U_sum - U_factored||_max per grid
  std::vector<double> ratio;      // deviation(k)/deviation(k+1)
};

/// Deviation between sum-slicing and factored slicing of the same
/// T-exponential across successively halved dt.
inline FactorizationReport check_factorization(const FockSpace& space, double t0, double t1,
                                               double lambda,
                                               const std::function<double(double)>& source,
                                               const std::vector<int>& step_counts) {
  FactorizationReport rep;
  for (int n : step_counts) {
    TimeGrid grid(t0, t1, n);
    std::vector<double> samples(n);
    for (int k = 0; k < n; ++k) samples[k] = source(grid.midpoint(k));
    Matrix a = sliced_evolution(space, grid, lambda, samples).matrix;
    Matrix b = factored_evolution(space, grid, lambda, source).matrix;
    rep.steps.push_back(n);
    rep.deviation.push_back((a - b).cwiseAbs().maxCoeff());
  }
  for (std::size_t i = 0; i + 1 < rep.deviation.size(); ++i)
    rep.ratio.push_back(rep.deviation[i] / rep.deviation[i + 1]);
  return rep;
}

/// S = U_M(lambda, J=0) normalized by its vacuum amplitude, so
/// <0|S|0> = 1 exactly.
inline FockOperator smatrix_truncated(const FockSpace& space, const TimeGrid& grid,
                                      double lambda) {
  std::vector<double> zero(grid.steps, 0.0);
  FockOperator u = sliced_evolution(space, grid, lambda, zero);
  Complex z = vacuum_amplitude(u);
  if (std::abs(z) < 1e-12)
    throw std::runtime_error("smatrix_truncated: vanishing vacuum amplitude");
  return {u.matrix / z};
}

}  // namespace zgen::fock
