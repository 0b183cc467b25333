#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "zgen/lattice.hpp"

using namespace zgen::lattice;
using Complex = std::complex<double>;

namespace {

ModelSpec chain(int n, double eps = 0.1, Boundary b = Boundary::Periodic) {
  ModelSpec s;
  s.geometry = Geometry::Chain;
  s.sites = n;
  s.spacing = 1.0;
  s.mass = 1.0;
  s.epsilon = eps;
  s.boundary = b;
  return s;
}

/// Periodic-chain propagator assembled in the discrete Fourier basis,
/// the lattice analogue of the momentum-space propagator.
Matrix fourier_propagator(const ModelSpec& spec) {
  int n = spec.sites;
  double inv_a2 = 1.0 / (spec.spacing * spec.spacing);
  Matrix delta = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    Complex kappa = Complex(spec.mass * spec.mass, -spec.epsilon) +
                    (2.0 * std::cos(2.0 * M_PI * k / n) - 2.0) * inv_a2;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        delta(x, y) += -std::exp(Complex(0, 2.0 * M_PI * k * (x - y) / n)) / (kappa * (double)n);
  }
  return delta;
}

}  // namespace

TEST_CASE("point kernel is m^2 - i eps") {
  ModelSpec s;
  s.mass = 1.0;
  s.epsilon = 0.1;
  auto k = build_kernel(s);
  REQUIRE(k.matrix.rows() == 1);
  CHECK(k.matrix(0, 0) == Complex(1.0, -0.1));

  auto d = propagator(k);
  CHECK(std::abs(d.matrix(0, 0) - (-1.0 / Complex(1.0, -0.1))) < 1e-14);
}

TEST_CASE("two-site periodic chain doubles the off-diagonal wrap") {
  auto k = build_kernel(chain(2)).matrix;
  CHECK(k(0, 0) == Complex(1.0 - 2.0, -0.1));
  CHECK(k(0, 1) == Complex(2.0, 0));
  CHECK(k(1, 0) == Complex(2.0, 0));
}

TEST_CASE("kernel is symmetric for every geometry") {
  for (int n : {1, 2, 3, 5, 8}) {
    for (Boundary b : {Boundary::Periodic, Boundary::Dirichlet}) {
      auto spec = chain(n, 0.2, b);
      auto k = build_kernel(spec).matrix;
      CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(k.imag().diagonal().maxCoeff() == -0.2);
    }
  }
}

TEST_CASE("propagator residual and symmetry contracts") {
  for (int n : {2, 4, 8, 16, 64}) {
    auto k = build_kernel(chain(n));
    auto d = propagator(k);
    double res = (k.matrix * d.matrix + Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    CHECK(res < 1e-10);
    CHECK((d.matrix - d.matrix.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("periodic propagator matches Fourier diagonalization") {
  for (int n : {2, 4, 8}) {
    auto spec = chain(n);
    auto d = propagator(build_kernel(spec));
    CHECK((d.matrix - fourier_propagator(spec)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("external propagator wraps and round-trips") {
  Matrix m = Complex(0.5, -0.25) * Matrix::Identity(3, 3);
  auto p = external_propagator(m);
  CHECK(p.external);
  CHECK(p.matrix == m);

  // three-point time grid at omega = 1: -i e^{-i|t_j - t_k|} / 2
  Eigen::Vector3d t(0.0, 0.7, 1.9);
  Matrix g(3, 3);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      g(j, k) = Complex(0, -0.5) * std::exp(Complex(0, -std::abs(t(j) - t(k))));
  auto gp = external_propagator(g);
  CHECK(gp.matrix == g);
  CHECK(std::abs(gp.matrix(0, 1) - Complex(0, -0.5) * std::exp(Complex(0, -0.7))) < 1e-15);

  Matrix bad = m;
  bad(0, 1) = 1.0;
  CHECK_THROWS(external_propagator(bad));
}

TEST_CASE("model spec validation") {
  ModelSpec s;
  s.epsilon = 0.0;
  CHECK_THROWS(s.validate());
  s.epsilon = 0.1;
  s.sites = 0;
  CHECK_THROWS(s.validate());
}
