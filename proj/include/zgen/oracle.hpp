#pragma once

// Independent brute-force routes: Gaussian moments by perfect-matching
// enumeration, and direct tensor-grid quadrature of the discrete damped
// path integral on models with at most three sites. These never share
// code with the symbolic series engine they are checked against.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zgen/genfun.hpp"
#include "zgen/lattice.hpp"
#include "zgen/wick.hpp"

namespace zgen::oracle {

using Complex = std::complex<double>;
using lattice::ModelSpec;
using lattice::Propagator;

inline constexpr int kDefaultMomentCap = 12;

/// Sum over perfect matchings of the site multiset of prod (i Delta_xy).
/// Zero for odd multisets.
inline Complex moment_oracle(const Propagator& prop, const std::vector<int>& sites,
                             int cap = kDefaultMomentCap) {
  int m = (int)sites.size();
  if (m > cap)
    throw std::invalid_argument("moment_oracle: multiset size exceeds the configured cap");
  if (m % 2 != 0) return Complex(0);
  Complex total(0);
  const Complex i_unit(0, 1);
  for (const auto& term : wick::enumerate_pairings(m, m / 2, std::max(cap, m))) {
    Complex prod(1);
    for (const auto& [p, q] : term.pairs)
      prod *= i_unit * prop.matrix(sites[p - 1], sites[q - 1]);
    total += prod;
  }
  return total;
}

struct QuadratureSpec {
  double phi_max = 24.0;
  int nodes = 1024;       // Gauss-Legendre nodes per dimension
  double tail_tol = 1e-12;
};

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
      }
      pp = n * (z * p0 - p1) / (z * z - 1);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
  }
}

/// Verifies that the damped integrand tail (including the largest
/// requested polynomial power) is negligible at the cutoff.
inline void check_tail(double phi_max, double epsilon, int max_power, double tail_tol) {
  auto g = [&](double p) { return std::pow(std::abs(p) + 1e-300, max_power) *
                                  std::exp(-0.5 * epsilon * p * p); };
  double peak = 0;
  for (int k = 0; k <= 400; ++k) peak = std::max(peak, g(phi_max * k / 400.0));
  if (g(phi_max) > tail_tol * peak)
    throw std::invalid_argument(
        "quadrature: integrand tail at phi_max = " + std::to_string(phi_max) +
        " exceeds the tail bound; enlarge phi_max");
}

}  // namespace detail

/// Raw tensor-grid integrals
///   I[o][p] = integral prod_{x in obs_o} phi_x * (sum_x phi_x^4)^p
///             * exp(-(i/2) phi^T K phi + i J^T phi) d^N phi
/// for every requested observable o and order p <= p_max. N <= 3.
inline std::vector<std::vector<Complex>> integrate_moments(
    const Eigen::MatrixXcd& kernel, const QuadratureSpec& quad, const Eigen::VectorXd& source,
    const std::vector<std::vector<int>>& observables, int p_max) {
  int n = (int)kernel.rows();
  if (n < 1 || n > 3)
    throw std::invalid_argument("integrate_moments: tensor-grid quadrature supports 1-3 sites");
  if (quad.nodes < 64) throw std::invalid_argument("integrate_moments: nodes must be >= 64");

  int max_power = 4 * p_max;
  for (const auto& obs : observables) {
    int per_site = 0;
    for (int x : obs) {
      if (x < 0 || x >= n) throw std::invalid_argument("integrate_moments: bad site index");
      ++per_site;
    }
    max_power = std::max(max_power, 4 * p_max + per_site);
  }
  double eps = -kernel.imag().diagonal().minCoeff();
  detail::check_tail(quad.phi_max, eps, max_power, quad.tail_tol);

  std::vector<double> gx, gw;
  detail::gauss_legendre(quad.nodes, gx, gw);
  int m = quad.nodes;
  std::vector<double> node(m), weight(m);
  for (int i = 0; i < m; ++i) {
    node[i] = quad.phi_max * gx[i];
    weight[i] = quad.phi_max * gw[i];
  }

  // per-dimension diagonal factors, weights folded in
  std::vector<std::vector<Complex>> base(n, std::vector<Complex>(m));
  for (int x = 0; x < n; ++x)
    for (int i = 0; i < m; ++i)
      base[x][i] = weight[i] * std::exp(Complex(0, 1) * (-0.5 * kernel(x, x) * node[i] * node[i] +
                                                         Complex(source(x)) * node[i]));
  // pairwise cross factors e^{-i K_xy phi phi'} (K symmetric: both
  // orderings folded into one table)
  auto cross = [&](int x, int y) {
    std::vector<Complex> t((std::size_t)m * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        t[(std::size_t)i * m + j] =
            std::exp(Complex(0, -1) * kernel(x, y) * node[i] * node[j]);
    return t;
  };

  std::size_t n_obs = observables.size();
  std::vector<std::vector<Complex>> out(n_obs, std::vector<Complex>(p_max + 1, Complex(0)));

  auto accumulate = [&](const std::array<double, 3>& phi, Complex cell) {
    double s4 = 0;
    for (int x = 0; x < n; ++x) s4 += phi[x] * phi[x] * phi[x] * phi[x];
    for (std::size_t o = 0; o < n_obs; ++o) {
      Complex v = cell;
      for (int x : observables[o]) v *= phi[x];
      double s4p = 1;
      for (int p = 0; p <= p_max; ++p) {
        out[o][p] += v * s4p;
        s4p *= s4;
      }
    }
  };

  if (n == 1) {
    for (int i = 0; i < m; ++i) accumulate({node[i], 0, 0}, base[0][i]);
  } else if (n == 2) {
    auto c01 = cross(0, 1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        accumulate({node[i], node[j], 0}, base[0][i] * base[1][j] * c01[(std::size_t)i * m + j]);
  } else {
    auto c01 = cross(0, 1);
    auto c02 = cross(0, 2);
    auto c12 = cross(1, 2);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        Complex pre = base[0][i] * base[1][j] * c01[(std::size_t)i * m + j];
        const Complex* r02 = &c02[(std::size_t)i * m];
        const Complex* r12 = &c12[(std::size_t)j * m];
        for (int k = 0; k < m; ++k)
          accumulate({node[i], node[j], node[k]}, pre * base[2][k] * r02[k] * r12[k]);
      }
  }
  return out;
}

/// Discrete path integral of the damped action, normalized by the free
/// J = 0 integral; one coefficient per order with the same lambda
/// bookkeeping as the series engine (lambda^p left implicit).
inline std::vector<Complex> quadrature_z(const ModelSpec& spec, const QuadratureSpec& quad,
                                         const Eigen::VectorXd& source, int p_max) {
  spec.validate();
  Eigen::MatrixXcd k = lattice::build_kernel(spec).matrix;
  int n = (int)k.rows();
  if (source.size() != n) throw std::invalid_argument("quadrature_z: source length mismatch");

  auto raw = integrate_moments(k, quad, source, {{}}, p_max)[0];
  Complex z00 = integrate_moments(k, quad, Eigen::VectorXd::Zero(n), {{}}, 0)[0][0];

  std::vector<Complex> per_order;
  Complex pref(1, 0);
  double pfac = 1;
  for (int p = 0; p <= p_max; ++p) {
    if (p > 0) {
      pref *= Complex(0, -1) / 24.0;
      pfac *= p;
    }
    per_order.push_back(pref / pfac * raw[p] / z00);
  }
  return per_order;
}

/// Resummed integral with the vertex kept inside the exponential,
/// normalized by the free J = 0 integral.
inline Complex quadrature_z_full(const ModelSpec& spec, const QuadratureSpec& quad,
                                 const Eigen::VectorXd& source) {
  spec.validate();
  Eigen::MatrixXcd k = lattice::build_kernel(spec).matrix;
  int n = (int)k.rows();
  // fold the quartic term into an effective per-site phase by adding it
  // to the diagonal evaluation: handled by a dedicated pass
  std::vector<double> gx, gw;
  detail::gauss_legendre(quad.nodes, gx, gw);
  int m = quad.nodes;
  std::vector<double> node(m), weight(m);
  for (int i = 0; i < m; ++i) {
    node[i] = quad.phi_max * gx[i];
    weight[i] = quad.phi_max * gw[i];
  }
  double eps = spec.epsilon;
  detail::check_tail(quad.phi_max, eps, 0, quad.tail_tol);

  auto site_factor = [&](int x, double lambda, double j, int i) {
    double p = node[i];
    return weight[i] * std::exp(Complex(0, 1) * (-0.5 * k(x, x).real() * p * p + j * p -
                                                 lambda / 24.0 * p * p * p * p) -
                                0.5 * eps * p * p);
  };
  auto cross = [&](int x, int y) {
    std::vector<Complex> t((std::size_t)m * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        t[(std::size_t)i * m + j] = std::exp(Complex(0, -1) * k(x, y) * node[i] * node[j]);
    return t;
  };

  auto run = [&](double lambda, const Eigen::VectorXd& j) {
    Complex acc(0);
    if (n == 1) {
      for (int i = 0; i < m; ++i) acc += site_factor(0, lambda, j(0), i);
    } else if (n == 2) {
      auto c01 = cross(0, 1);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          acc += site_factor(0, lambda, j(0), a) * site_factor(1, lambda, j(1), b) *
                 c01[(std::size_t)a * m + b];
    } else if (n == 3) {
      auto c01 = cross(0, 1), c02 = cross(0, 2), c12 = cross(1, 2);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          Complex pre = site_factor(0, lambda, j(0), a) * site_factor(1, lambda, j(1), b) *
                        c01[(std::size_t)a * m + b];
          const Complex* r02 = &c02[(std::size_t)a * m];
          const Complex* r12 = &c12[(std::size_t)b * m];
          for (int c = 0; c < m; ++c)
            acc += pre * site_factor(2, lambda, j(2), c) * r02[c] * r12[c];
        }
    } else {
      throw std::invalid_argument("quadrature_z_full: 1-3 sites only");
    }
    return acc;
  };
  return run(spec.coupling, source) / run(0.0, Eigen::VectorXd::Zero(n));
}

/// Formal power-series quotient u/d with d[0] != 0.
inline std::vector<Complex> series_divide(const std::vector<Complex>& u,
                                          const std::vector<Complex>& d) {
  std::vector<Complex> v(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) {
    Complex acc = u[p];
    for (std::size_t q = 1; q <= p; ++q) acc -= d[q] * v[p - q];
    v[p] = acc / d[0];
  }
  return v;
}

struct CompareRow {
  std::string quantity;
  int order = 0;
  Complex series_value;
  Complex quadrature_value;
  double abs_dev = 0;
  double rel_dev = 0;
  bool pass = false;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  bool all_pass = true;
};

/// Per-order equality of the functional-derivative route and the
/// path-integral quadrature route: normalized Z at a test source, and
/// the normalized 2- and 4-point functions.
inline CompareReport compare_routes(const ModelSpec& spec, const QuadratureSpec& quad,
                                    const Eigen::VectorXd& source, int p_max, double tol) {
  spec.validate();
  int n = spec.sites;
  auto kernel = lattice::build_kernel(spec);
  auto prop = std::make_shared<Propagator>(lattice::propagator(kernel));

  auto series = genfun::normalize(genfun::z_series(prop, p_max));

  int b = std::min(1, n - 1), c = std::min(2, n - 1);
  std::vector<int> pts2{0, b};
  std::vector<int> pts4{0, b, c, 0};
  auto g2 = genfun::green(series, pts2);
  auto g4 = genfun::green(series, pts4);

  // quadrature side
  Eigen::MatrixXcd k = kernel.matrix;
  auto with_j = integrate_moments(k, quad, source, {{}}, p_max)[0];
  auto at_zero = integrate_moments(k, quad, Eigen::VectorXd::Zero(n), {{}, pts2, pts4}, p_max);
  Complex z00 = at_zero[0][0];

  auto scaled = [&](const std::vector<Complex>& raw) {
    std::vector<Complex> out(raw.size());
    Complex pref(1, 0);
    double pfac = 1;
    for (std::size_t p = 0; p < raw.size(); ++p) {
      if (p > 0) {
        pref *= Complex(0, -1) / 24.0;
        pfac *= (double)p;
      }
      out[p] = pref / pfac * raw[p] / z00;
    }
    return out;
  };
  auto qz = scaled(with_j);
  auto q0 = scaled(at_zero[0]);
  auto qg2 = series_divide(scaled(at_zero[1]), q0);
  auto qg4 = series_divide(scaled(at_zero[2]), q0);
  auto qzn = series_divide(qz, q0);

  CompareReport rep;
  auto add = [&](const std::string& name, int p, Complex sv, Complex qv) {
    CompareRow row;
    row.quantity = name;
    row.order = p;
    row.series_value = sv;
    row.quadrature_value = qv;
    row.abs_dev = std::abs(sv - qv);
    double scale = std::max({std::abs(sv), std::abs(qv), 1e-30});
    row.rel_dev = row.abs_dev / scale;
    row.pass = row.rel_dev < tol || row.abs_dev < tol;
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(row);
  };

  for (int p = 0; p <= p_max; ++p) {
    add("Z", p, genfun::evaluate_at(series.order_terms[p], source.cast<Complex>()), qzn[p]);
    add("G2", p, g2.per_order[p], qg2[p]);
    add("G4", p, g4.per_order[p], qg4[p]);
  }
  return rep;
}

}  // namespace zgen::oracle
