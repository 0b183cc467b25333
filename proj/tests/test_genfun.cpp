#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <memory>

#include "zgen/genfun.hpp"
#include "zgen/lattice.hpp"

using namespace zgen;
using genfun::GaussianPolynomial;
using genfun::Monomial;
using Complex = std::complex<double>;

namespace {

lattice::ModelSpec chain(int n, double eps = 0.1) {
  lattice::ModelSpec s;
  s.geometry = n == 1 ? lattice::Geometry::Point : lattice::Geometry::Chain;
  s.sites = n;
  s.mass = 1.0;
  s.epsilon = eps;
  return s;
}

std::shared_ptr<const lattice::Propagator> make_prop(int n) {
  return std::make_shared<lattice::Propagator>(
      lattice::propagator(lattice::build_kernel(chain(n))));
}

}  // namespace

TEST_CASE("first source derivative of the pure Gaussian is -(Delta J)_x") {
  auto prop = make_prop(3);
  auto g = GaussianPolynomial::gaussian(prop);
  auto d = genfun::source_derivative(g, 1);
  for (const auto& [m, c] : d.terms()) {
    REQUIRE(m.j.size() == 1);
    CHECK(std::abs(c - (-prop->matrix(1, m.j[0]))) < 1e-15);
  }
  CHECK(d.terms().size() == 3);
}

TEST_CASE("two derivatives at J=0 give i Delta") {
  auto prop = make_prop(4);
  auto g = GaussianPolynomial::gaussian(prop);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) {
      auto d = genfun::source_derivative(genfun::source_derivative(g, x), y);
      Complex expected = Complex(0, 1) * prop->matrix(x, y);
      CHECK(std::abs(genfun::evaluate_at_zero(d) - expected) < 1e-12);
    }
}

TEST_CASE("odd derivative counts evaluate to exactly zero, structurally") {
  auto prop = make_prop(2);
  auto d = GaussianPolynomial::gaussian(prop);
  for (int k = 0; k < 5; ++k) {
    d = genfun::source_derivative(d, k % 2);
    if (k % 2 == 0) {
      // odd number of derivatives: no J-free monomial survives
      CHECK(d.terms().count(Monomial{}) == 0);
      CHECK(genfun::evaluate_at_zero(d) == 0.0);
    }
  }
}

TEST_CASE("source derivatives commute structurally") {
  auto prop = make_prop(4);
  auto g = GaussianPolynomial::gaussian(prop);
  auto seed = genfun::source_derivative(g, 2);  // nontrivial starting polynomial
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) {
      auto xy = genfun::source_derivative(genfun::source_derivative(seed, x), y);
      auto yx = genfun::source_derivative(genfun::source_derivative(seed, y), x);
      CHECK(xy.max_difference(yx) < 1e-12);
    }
}

TEST_CASE("finite-difference oracle for the source derivative") {
  const double h = 1e-5;
  for (int n : {1, 2}) {
    auto prop = make_prop(n);
    auto series = genfun::z_series(prop, 2);
    Eigen::VectorXcd j0 = Eigen::VectorXcd::Zero(n);
    for (int k = 0; k < n; ++k) j0(k) = 0.3 + 0.2 * k;
    for (const auto& term : series.order_terms) {
      for (int x = 0; x < n; ++x) {
        Eigen::VectorXcd jp = j0, jm = j0;
        jp(x) += h;
        jm(x) -= h;
        Complex numeric =
            (genfun::evaluate_at(term, jp) - genfun::evaluate_at(term, jm)) / (2 * h);
        // source_derivative carries the 1/i prefactor
        Complex symbolic =
            Complex(0, 1) * genfun::evaluate_at(genfun::source_derivative(term, x), j0);
        double scale = std::max(std::abs(numeric), 1e-12);
        CHECK(std::abs(numeric - symbolic) / scale < 1e-6);
      }
    }
  }
}

TEST_CASE("z_series order-0 is the pure Gaussian and order-1 has J-degree at most 4") {
  auto prop = make_prop(2);
  auto s = genfun::z_series(prop, 1);
  REQUIRE(s.order_terms.size() == 2);
  CHECK(s.order_terms[0].terms().size() == 1);
  CHECK(s.order_terms[0].terms().at(Monomial{}) == Complex(1, 0));
  for (const auto& [m, c] : s.order_terms[1].terms()) CHECK(m.j.size() <= 4);
  CHECK_THROWS(genfun::z_series(prop, 100));
}

TEST_CASE("0-D order-1 vacuum coefficient is (-i/4!) * 3 (i Delta)^2") {
  auto prop = make_prop(1);
  Complex idelta = Complex(0, 1) * prop->matrix(0, 0);
  auto s = genfun::z_series(prop, 1);
  Complex expected = Complex(0, -1) / 24.0 * 3.0 * idelta * idelta;
  CHECK(std::abs(genfun::evaluate_at_zero(s.order_terms[1]) - expected) < 1e-12);
}

TEST_CASE("normalization kills vacuum terms order by order and is idempotent") {
  auto prop = make_prop(2);
  auto s = genfun::normalize(genfun::z_series(prop, 2));
  CHECK(std::abs(genfun::evaluate_at_zero(s.order_terms[0]) - 1.0) < 1e-12);
  for (int p = 1; p <= 2; ++p)
    CHECK(std::abs(genfun::evaluate_at_zero(s.order_terms[p])) < 1e-12);
  auto twice = genfun::normalize(s);
  for (int p = 0; p <= 2; ++p)
    CHECK(s.order_terms[p].max_difference(twice.order_terms[p]) < 1e-12);

  // the free series is untouched
  auto free_series = genfun::z_series(prop, 0);
  auto nfree = genfun::normalize(free_series);
  CHECK(free_series.order_terms[0].max_difference(nfree.order_terms[0]) < 1e-15);
}

TEST_CASE("free Green's functions: pairings by hand") {
  auto prop = make_prop(4);
  auto s = genfun::z_series(prop, 0);
  const auto& d = prop->matrix;
  const Complex i(0, 1);

  auto g2 = genfun::green(s, {0, 3});
  CHECK(std::abs(g2.per_order[0] - i * d(0, 3)) < 1e-12);

  auto g4 = genfun::green(s, {0, 1, 2, 3});
  Complex expected =
      (i * d(0, 1)) * (i * d(2, 3)) + (i * d(0, 2)) * (i * d(1, 3)) + (i * d(0, 3)) * (i * d(1, 2));
  CHECK(std::abs(g4.per_order[0] - expected) < 1e-12);

  auto g3 = genfun::green(s, {0, 1, 2});
  CHECK(g3.per_order[0] == 0.0);
}

TEST_CASE("kd identity: -K Delta = I") {
  for (int n : {1, 4}) {
    auto k = lattice::build_kernel(chain(n));
    auto d = lattice::propagator(k);
    CHECK(genfun::verify_kd_identity(k, d));
  }
  // an external propagator fails by design
  auto k = lattice::build_kernel(chain(2));
  auto ext = lattice::external_propagator(Eigen::MatrixXcd::Identity(2, 2));
  CHECK_FALSE(genfun::verify_kd_identity(k, ext));
}

TEST_CASE("C^n Gaussian equals B^n Gaussian when the K-phi term is dropped") {
  for (int n_sites : {1, 2, 4}) {
    auto kernel = lattice::build_kernel(chain(n_sites));
    auto prop = std::make_shared<lattice::Propagator>(lattice::propagator(kernel));
    auto rep = genfun::verify_c_equals_b(kernel, prop, 3);
    CHECK(rep.all_pass);
    REQUIRE(rep.cases.size() == 4);
    for (const auto& c : rep.cases) CHECK(c.max_deviation < 1e-10);
  }
}

TEST_CASE("retaining the -i eps phi remnant breaks the identity measurably") {
  auto kernel = lattice::build_kernel(chain(2, 0.25));
  auto prop = std::make_shared<lattice::Propagator>(lattice::propagator(kernel));
  genfun::OperatorIdentityOptions opt;
  opt.retain_epsilon_term = true;
  opt.epsilon = 0.25;
  auto rep = genfun::verify_c_equals_b(kernel, prop, 2, opt);
  CHECK(rep.cases[0].pass);  // n = 0 trivially
  CHECK(rep.cases[1].pass);  // n = 1: the Gaussian has no polynomial part yet
  CHECK_FALSE(rep.cases[2].pass);
  CHECK(rep.cases[2].max_deviation > 0.01);
}

TEST_CASE("S-matrix series has unit vacuum part at every order") {
  auto prop = make_prop(2);
  auto s = genfun::smatrix_series(prop, 2, 4);
  auto vac = [&](const GaussianPolynomial& t) {
    auto it = t.terms().find(Monomial{});
    return it == t.terms().end() ? Complex(0) : it->second;
  };
  CHECK(std::abs(vac(s.order_terms[0]) - 1.0) < 1e-12);
  CHECK(std::abs(vac(s.order_terms[1])) < 1e-12);
  CHECK(std::abs(vac(s.order_terms[2])) < 1e-12);
  // no source-carrying monomials remain after the J = 0 restriction
  for (const auto& term : s.order_terms)
    for (const auto& [m, c] : term.terms()) CHECK(m.j.empty());
}

TEST_CASE("evaluate rejects polynomials still carrying phi symbols") {
  auto prop = make_prop(2);
  auto g = GaussianPolynomial::gaussian(prop);
  auto b = genfun::apply_b(g);
  CHECK_THROWS(genfun::evaluate_at_zero(b));
  CHECK_THROWS(genfun::evaluate_at(b, Eigen::VectorXcd::Zero(2)));
}
