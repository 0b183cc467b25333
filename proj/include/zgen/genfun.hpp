#pragma once

// Gaussian-polynomial algebra over discrete sources J. A polynomial in
// J_x and formal field symbols phi_x is carried against the implicit
// factor exp(-(i/2) J^T Delta J); repeated source derivatives of that
// product stay inside the representation, which is what makes the
// perturbative Z[J] series and the operator identities mechanical.

#include <complex>
#include <map>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zgen/lattice.hpp"

namespace zgen::genfun {

using Complex = std::complex<double>;
using lattice::Kernel;
using lattice::Propagator;

/// Multiset of J indices and multiset of formal phi indices, both sorted
/// so equal monomials compare equal.
struct Monomial {
  std::vector<int> j;
  std::vector<int> phi;

  bool operator<(const Monomial& o) const {
    if (j != o.j) return j < o.j;
    return phi < o.phi;
  }
  bool operator==(const Monomial& o) const { return j == o.j && phi == o.phi; }
};

namespace detail {
inline void insert_sorted(std::vector<int>& v, int x) {
  v.insert(std::upper_bound(v.begin(), v.end(), x), x);
}
}  // namespace detail

class GaussianPolynomial {
 public:
  using TermMap = std::map<Monomial, Complex>;

  explicit GaussianPolynomial(std::shared_ptr<const Propagator> prop)
      : prop_(std::move(prop)) {
    if (!prop_) throw std::invalid_argument("GaussianPolynomial: null propagator");
  }

  /// The pure Gaussian, polynomial part 1.
  static GaussianPolynomial gaussian(std::shared_ptr<const Propagator> prop) {
    GaussianPolynomial p(std::move(prop));
    p.terms_[Monomial{}] = Complex(1, 0);
    return p;
  }

  const TermMap& terms() const { return terms_; }
  const Propagator& propagator() const { return *prop_; }
  std::shared_ptr<const Propagator> propagator_ptr() const { return prop_; }
  int sites() const { return (int)prop_->matrix.rows(); }

  void add_term(Monomial m, Complex c) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      if (c != 0.0) terms_.emplace(std::move(m), c);
    } else {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  GaussianPolynomial& operator+=(const GaussianPolynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  GaussianPolynomial& operator*=(Complex s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  bool has_phi() const {
    for (const auto& [m, c] : terms_)
      if (!m.phi.empty()) return true;
    return false;
  }

  /// Largest coefficient difference against another polynomial over the
  /// union of monomials (structural comparison).
  double max_difference(const GaussianPolynomial& o) const {
    double d = 0;
    for (const auto& [m, c] : terms_) {
      auto it = o.terms_.find(m);
      Complex oc = it == o.terms_.end() ? Complex(0) : it->second;
      d = std::max(d, std::abs(c - oc));
    }
    for (const auto& [m, c] : o.terms_)
      if (!terms_.count(m)) d = std::max(d, std::abs(c));
    return d;
  }

 private:
  TermMap terms_;
  std::shared_ptr<const Propagator> prop_;
};

inline void check_site(const GaussianPolynomial& poly, int x) {
  if (x < 0 || x >= poly.sites())
    throw std::invalid_argument("invalid site index " + std::to_string(x));
}

/// (1/i) d/dJ_x applied to poly * exp(-(i/2) J^T Delta J):
/// -i dP/dJ_x - (Delta J)_x P, with the Gaussian factor left implicit.
inline GaussianPolynomial source_derivative(const GaussianPolynomial& poly, int x) {
  check_site(poly, x);
  const auto& delta = poly.propagator().matrix;
  GaussianPolynomial out(poly.propagator_ptr());
  const Complex minus_i(0, -1);
  for (const auto& [mono, c] : poly.terms()) {
    // polynomial part: multiplicity of J_x times the monomial with one J_x removed
    auto lo = std::lower_bound(mono.j.begin(), mono.j.end(), x);
    auto hi = std::upper_bound(mono.j.begin(), mono.j.end(), x);
    long mult = hi - lo;
    if (mult > 0) {
      Monomial m = mono;
      m.j.erase(m.j.begin() + (lo - mono.j.begin()));
      out.add_term(std::move(m), minus_i * (double)mult * c);
    }
    // Gaussian part: -(Delta J)_x times the monomial
    for (int y = 0; y < poly.sites(); ++y) {
      Complex dxy = delta(x, y);
      if (dxy == 0.0) continue;
      Monomial m = mono;
      detail::insert_sorted(m.j, y);
      out.add_term(std::move(m), -dxy * c);
    }
  }
  return out;
}

/// J = 0, phi-free evaluation: the constant term (the Gaussian factor is 1).
inline Complex evaluate_at_zero(const GaussianPolynomial& poly) {
  if (poly.has_phi())
    throw std::invalid_argument("evaluate_at_zero: formal phi symbols present");
  auto it = poly.terms().find(Monomial{});
  return it == poly.terms().end() ? Complex(0) : it->second;
}

/// Numeric evaluation at a given source vector, Gaussian factor included.
inline Complex evaluate_at(const GaussianPolynomial& poly, const Eigen::VectorXcd& source) {
  if (poly.has_phi())
    throw std::invalid_argument("evaluate_at: formal phi symbols present");
  if (source.size() != poly.sites())
    throw std::invalid_argument("evaluate_at: source length mismatch");
  Complex acc(0);
  for (const auto& [mono, c] : poly.terms()) {
    Complex v = c;
    for (int idx : mono.j) v *= source(idx);
    acc += v;
  }
  Complex quad = source.transpose() * poly.propagator().matrix * source;
  return acc * std::exp(Complex(0, -0.5) * quad);
}

struct PerturbativeSeries {
  std::vector<GaussianPolynomial> order_terms;  // index = power of lambda
  int max_order() const { return (int)order_terms.size() - 1; }
};

inline constexpr int kDefaultOrderCap = 6;

/// Sum over sites of the fourth source derivative, with optional
/// per-site weights (unit for lattice models, quadrature weights for
/// external grid propagators).
inline GaussianPolynomial apply_vertex(const GaussianPolynomial& poly,
                                       const std::vector<double>& weights) {
  GaussianPolynomial acc(poly.propagator_ptr());
  for (int x = 0; x < poly.sites(); ++x) {
    double w = weights.empty() ? 1.0 : weights[x];
    if (w == 0.0) continue;
    GaussianPolynomial d = poly;
    for (int k = 0; k < 4; ++k) d = source_derivative(d, x);
    d *= Complex(w, 0);
    acc += d;
  }
  return acc;
}

/// Perturbative expansion of Z[J]: order p carries
/// (1/p!) (-i/4!)^p (sum_x w_x D_x^4)^p applied to the pure Gaussian,
/// with the power of lambda left implicit.
inline PerturbativeSeries z_series(std::shared_ptr<const Propagator> prop, int p_max,
                                   std::vector<double> weights = {},
                                   int order_cap = kDefaultOrderCap) {
  if (p_max < 0) throw std::invalid_argument("z_series: p_max must be >= 0");
  if (p_max > order_cap)
    throw std::invalid_argument("z_series: p_max exceeds the configured cap");
  if (!weights.empty() && (int)weights.size() != (int)prop->matrix.rows())
    throw std::invalid_argument("z_series: weight count must match site count");
  PerturbativeSeries s;
  s.order_terms.push_back(GaussianPolynomial::gaussian(prop));
  const Complex vertex_factor = Complex(0, -1) / 24.0;
  for (int p = 1; p <= p_max; ++p) {
    GaussianPolynomial t = apply_vertex(s.order_terms.back(), weights);
    t *= vertex_factor / (double)p;
    s.order_terms.push_back(std::move(t));
  }
  return s;
}

/// Formal power-series division of the series by its J = 0 value, so
/// that the normalized series evaluates to 1 at J = 0 through every
/// retained order. Phi-free constant terms define the denominator.
inline PerturbativeSeries normalize(const PerturbativeSeries& series) {
  int n = (int)series.order_terms.size();
  std::vector<Complex> denom(n);
  for (int p = 0; p < n; ++p) {
    auto it = series.order_terms[p].terms().find(Monomial{});
    denom[p] = it == series.order_terms[p].terms().end() ? Complex(0) : it->second;
  }
  if (denom[0] == 0.0)
    throw std::invalid_argument("normalize: vanishing order-0 constant term");
  // inverse of the denominator as a power series in lambda
  std::vector<Complex> inv(n);
  inv[0] = 1.0 / denom[0];
  for (int p = 1; p < n; ++p) {
    Complex acc(0);
    for (int q = 1; q <= p; ++q) acc += denom[q] * inv[p - q];
    inv[p] = -acc / denom[0];
  }
  PerturbativeSeries out;
  for (int p = 0; p < n; ++p) {
    GaussianPolynomial t(series.order_terms[0].propagator_ptr());
    for (int q = 0; q <= p; ++q) {
      GaussianPolynomial part = series.order_terms[q];
      part *= inv[p - q];
      t += part;
    }
    out.order_terms.push_back(std::move(t));
  }
  return out;
}

struct GreenResult {
  std::vector<int> points;
  std::vector<Complex> per_order;
  bool normalized = false;
};

/// n-point Green's function per lambda order: one source derivative per
/// point, then J = 0. Odd point counts come out exactly zero.
inline GreenResult green(const PerturbativeSeries& series, const std::vector<int>& points,
                         bool normalized = true) {
  GreenResult g;
  g.points = points;
  g.normalized = normalized;
  for (const auto& term : series.order_terms) {
    GaussianPolynomial d = term;
    for (int x : points) d = source_derivative(d, x);
    g.per_order.push_back(evaluate_at_zero(d));
  }
  return g;
}

/// The discrete form of "K acting on the source derivative of the
/// Gaussian is multiplication by J": reduces to -K*Delta = I.
inline bool verify_kd_identity(const Kernel& kernel, const Propagator& prop,
                               double tol = 1e-10) {
  if (prop.external) return false;
  int n = (int)kernel.matrix.rows();
  double res =
      (-(kernel.matrix * prop.matrix) - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  return res < tol;
}

struct OperatorIdentityOptions {
  // Keep the -i*eps*phi remnant of applying K to a formal field symbol
  // instead of dropping it outright.
  bool retain_epsilon_term = false;
  double epsilon = 0.0;  // used only when retaining
  double tol = 1e-10;
};

struct OperatorIdentityCase {
  int n = 0;
  double max_deviation = 0.0;
  bool pass = false;
};

struct OperatorIdentityReport {
  std::vector<OperatorIdentityCase> cases;
  bool all_pass = true;
};

/// B = sum_x J_x phi_x, as a multiplication operator.
inline GaussianPolynomial apply_b(const GaussianPolynomial& poly) {
  GaussianPolynomial out(poly.propagator_ptr());
  for (int x = 0; x < poly.sites(); ++x)
    for (const auto& [mono, c] : poly.terms()) {
      Monomial m = mono;
      detail::insert_sorted(m.j, x);
      detail::insert_sorted(m.phi, x);
      out.add_term(std::move(m), c);
    }
  return out;
}

/// C = sum_x phi_x K_x (1/i) d/dJ_x. The Gaussian-factor part of the
/// derivative is contracted with K exactly (giving J_x through
/// -K*Delta = I); the polynomial part would carry K phi = -i*eps*phi,
/// which is dropped by default or retained per the options.
inline GaussianPolynomial apply_c(const GaussianPolynomial& poly, const Kernel& kernel,
                                  const OperatorIdentityOptions& opt = {}) {
  const auto& delta = poly.propagator().matrix;
  int n = poly.sites();
  Eigen::MatrixXcd minus_kd = -(kernel.matrix * delta);  // = I up to solver residual
  GaussianPolynomial out(poly.propagator_ptr());
  const Complex minus_i(0, -1);
  for (int x = 0; x < n; ++x) {
    for (const auto& [mono, c] : poly.terms()) {
      // Gaussian part, K applied exactly: phi_x * sum_z (-K Delta)_{xz} J_z
      for (int z = 0; z < n; ++z) {
        Complex w = minus_kd(x, z);
        if (w == 0.0) continue;
        Monomial m = mono;
        detail::insert_sorted(m.j, z);
        detail::insert_sorted(m.phi, x);
        out.add_term(std::move(m), w * c);
      }
      // polynomial part: -i dP/dJ_x, then K phi -> -i*eps*phi (or zero)
      if (opt.retain_epsilon_term) {
        auto lo = std::lower_bound(mono.j.begin(), mono.j.end(), x);
        auto hi = std::upper_bound(mono.j.begin(), mono.j.end(), x);
        long mult = hi - lo;
        if (mult > 0) {
          Monomial m = mono;
          m.j.erase(m.j.begin() + (lo - mono.j.begin()));
          detail::insert_sorted(m.phi, x);
          out.add_term(std::move(m),
                       Complex(0, -opt.epsilon) * minus_i * (double)mult * c);
        }
      }
    }
  }
  return out;
}

/// Applies C n times to the Gaussian and compares structurally against
/// B^n times the Gaussian, for every n <= n_max.
inline OperatorIdentityReport verify_c_equals_b(const Kernel& kernel,
                                                std::shared_ptr<const Propagator> prop,
                                                int n_max,
                                                const OperatorIdentityOptions& opt = {}) {
  if (n_max < 0) throw std::invalid_argument("verify_c_equals_b: n_max must be >= 0");
  OperatorIdentityReport rep;
  GaussianPolynomial c_side = GaussianPolynomial::gaussian(prop);
  GaussianPolynomial b_side = c_side;
  for (int n = 0; n <= n_max; ++n) {
    double dev = c_side.max_difference(b_side);
    bool ok = dev < opt.tol;
    rep.cases.push_back({n, dev, ok});
    rep.all_pass = rep.all_pass && ok;
    if (n < n_max) {
      c_side = apply_c(c_side, kernel, opt);
      b_side = apply_b(b_side);
    }
  }
  return rep;
}

/// S-matrix assembly at the source-functional level: the vertex
/// exponential applied to the exp(iB)-dressed Gaussian, evaluated at
/// J = 0 and normalized so the phi-free part is exactly 1. The result is
/// a lambda series of polynomials in formal phi symbols.
inline PerturbativeSeries smatrix_series(std::shared_ptr<const Propagator> prop, int p_max,
                                         int phi_cap, std::vector<double> weights = {}) {
  if (phi_cap < 0) throw std::invalid_argument("smatrix_series: phi_cap must be >= 0");
  // truncated exp(iB) acting on the Gaussian
  GaussianPolynomial base = GaussianPolynomial::gaussian(prop);
  GaussianPolynomial power = base;
  Complex coeff(1, 0);
  for (int k = 1; k <= phi_cap; ++k) {
    power = apply_b(power);
    coeff *= Complex(0, 1) / (double)k;
    GaussianPolynomial t = power;
    t *= coeff;
    base += t;
  }
  PerturbativeSeries s;
  s.order_terms.push_back(std::move(base));
  const Complex vertex_factor = Complex(0, -1) / 24.0;
  for (int p = 1; p <= p_max; ++p) {
    GaussianPolynomial t = apply_vertex(s.order_terms.back(), weights);
    t *= vertex_factor / (double)p;
    s.order_terms.push_back(std::move(t));
  }
  // J = 0: drop every source-carrying monomial
  for (auto& term : s.order_terms) {
    GaussianPolynomial kept(term.propagator_ptr());
    for (const auto& [m, c] : term.terms())
      if (m.j.empty()) kept.add_term(m, c);
    term = std::move(kept);
  }
  return normalize(s);
}

}  // namespace zgen::genfun
