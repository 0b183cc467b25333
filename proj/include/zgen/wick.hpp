#pragma once

// Exact combinatorics of the time-ordered -> normal-ordered expansion:
// pairing counts, explicit pairing enumeration, and the coefficient
// identity linking the two routes. All arithmetic is exact (big
// rationals plus a tracked power of i); no floating point enters.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace zgen::wick {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Exact scalar of the form q * i^k, closed under addition by keeping
/// Gaussian-rational components (re + i*im) internally.
class ExactScalar {
 public:
  ExactScalar() = default;
  ExactScalar(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}

  /// q * i^k with k taken mod 4.
  static ExactScalar i_power(Rational q, long k) {
    long r = ((k % 4) + 4) % 4;
    switch (r) {
      case 0: return {std::move(q), 0};
      case 1: return {0, std::move(q)};
      case 2: return {-q, 0};
      default: return {0, -q};
    }
  }

  static ExactScalar one() { return {1, 0}; }
  static ExactScalar zero() { return {0, 0}; }

  const Rational& re() const { return re_; }
  const Rational& im() const { return im_; }

  ExactScalar operator+(const ExactScalar& o) const { return {re_ + o.re_, im_ + o.im_}; }
  ExactScalar operator-(const ExactScalar& o) const { return {re_ - o.re_, im_ - o.im_}; }
  ExactScalar operator*(const ExactScalar& o) const {
    return {re_ * o.re_ - im_ * o.im_, re_ * o.im_ + im_ * o.re_};
  }
  ExactScalar operator-() const { return {-re_, -im_}; }
  bool operator==(const ExactScalar& o) const { return re_ == o.re_ && im_ == o.im_; }
  bool is_zero() const { return re_ == 0 && im_ == 0; }

 private:
  Rational re_ = 0;
  Rational im_ = 0;
};

inline BigInt factorial(long n) {
  if (n < 0) throw std::invalid_argument("factorial of negative argument");
  BigInt f = 1;
  for (long k = 2; k <= n; ++k) f *= k;
  return f;
}

/// f_{m,r} = m! / (r! (m-2r)! 2^r); zero when 2r > m (or r < 0).
inline BigInt pairing_count(long m, long r) {
  if (m < 0) throw std::invalid_argument("pairing_count: m must be non-negative");
  if (r < 0 || 2 * r > m) return 0;
  return factorial(m) / (factorial(r) * factorial(m - 2 * r) * (BigInt(1) << r));
}

/// One term of a Wick expansion: disjoint index pairs, the leftover
/// normal-ordered field indices, and an exact coefficient.
struct WickTerm {
  std::vector<std::pair<int, int>> pairs;  // each (p,q) with p < q, sorted by p
  std::vector<int> unpaired;               // ascending
  ExactScalar coefficient = ExactScalar::one();

  void canonicalize() {
    for (auto& pq : pairs)
      if (pq.first > pq.second) std::swap(pq.first, pq.second);
    std::sort(pairs.begin(), pairs.end());
    std::sort(unpaired.begin(), unpaired.end());
  }

  bool same_structure(const WickTerm& o) const {
    return pairs == o.pairs && unpaired == o.unpaired;
  }
  bool operator==(const WickTerm& o) const {
    return same_structure(o) && coefficient == o.coefficient;
  }
};

inline constexpr int kDefaultFieldCap = 16;

/// All distinct ways of choosing r disjoint unordered pairs out of the
/// indices 1..m, each with unit coefficient. Deterministic canonical
/// ordering (lexicographic in the recursion over the smallest free index).
inline std::vector<WickTerm> enumerate_pairings(int m, int r,
                                                int field_cap = kDefaultFieldCap) {
  if (m < 0 || r < 0) throw std::invalid_argument("enumerate_pairings: negative argument");
  if (2 * r > m) throw std::invalid_argument("enumerate_pairings: 2r exceeds m");
  if (m > field_cap)
    throw std::invalid_argument("enumerate_pairings: m = " + std::to_string(m) +
                                " exceeds the configured cap " + std::to_string(field_cap));

  std::vector<WickTerm> out;
  std::vector<int> free_idx(m);
  for (int i = 0; i < m; ++i) free_idx[i] = i + 1;

  WickTerm cur;
  // Recurse on the smallest still-free index: either leave it unpaired or
  // pair it with each larger free index.
  auto rec = [&](auto&& self, std::vector<int>& rem, int pairs_left) -> void {
    if (pairs_left == 0) {
      WickTerm t = cur;
      t.unpaired.insert(t.unpaired.end(), rem.begin(), rem.end());
      t.canonicalize();
      out.push_back(std::move(t));
      return;
    }
    if ((int)rem.size() < 2 * pairs_left) return;
    int head = rem.front();
    // head stays unpaired
    if ((int)rem.size() - 1 >= 2 * pairs_left) {
      std::vector<int> rest(rem.begin() + 1, rem.end());
      cur.unpaired.push_back(head);
      self(self, rest, pairs_left);
      cur.unpaired.pop_back();
    }
    // head pairs with each later index
    for (std::size_t j = 1; j < rem.size(); ++j) {
      std::vector<int> rest;
      rest.reserve(rem.size() - 2);
      for (std::size_t k = 1; k < rem.size(); ++k)
        if (k != j) rest.push_back(rem[k]);
      cur.pairs.emplace_back(head, rem[j]);
      self(self, rest, pairs_left - 1);
      cur.pairs.pop_back();
    }
  };
  rec(rec, free_idx, r);
  return out;
}

/// Symmetrized expansion of a time-ordered product of m fields: one term
/// per pairing stratum r, carrying the multiplicity f_{m,r}. The r = 0
/// stratum is the fully normal-ordered term with coefficient 1.
struct WickExpansion {
  int fields = 0;
  std::vector<WickTerm> terms;  // indexed by r = 0..floor(m/2)
};

inline WickExpansion timeordered_expansion(int m, int field_cap = kDefaultFieldCap) {
  if (m < 0) throw std::invalid_argument("timeordered_expansion: m must be non-negative");
  if (m > field_cap)
    throw std::invalid_argument("timeordered_expansion: m exceeds the configured cap");
  WickExpansion e;
  e.fields = m;
  for (int r = 0; 2 * r <= m; ++r) {
    WickTerm t;
    for (int i = 1; i <= m - 2 * r; ++i) t.unpaired.push_back(i);
    for (int p = 0; p < r; ++p) {
      int base = m - 2 * r + 2 * p + 1;
      t.pairs.emplace_back(base, base + 1);
    }
    t.coefficient = ExactScalar{Rational(pairing_count(m, r)), 0};
    e.terms.push_back(std::move(t));
  }
  return e;
}

/// C_{k,r} = i^{2r+k} / (k! r! 2^r); zero for k < 0.
inline ExactScalar c_coefficient(long k, long r) {
  if (k < 0 || r < 0) return ExactScalar::zero();
  Rational q(1, factorial(k) * factorial(r) * (BigInt(1) << r));
  return ExactScalar::i_power(q, 2 * r + k);
}

struct CoefficientCase {
  int m = 0;
  int r = 0;
  bool pass = false;
};

struct CoefficientReport {
  std::vector<CoefficientCase> cases;
  bool all_pass = true;
};

/// Checks i^m/m! * f_{m,r} == C_{m-2r,r} exactly for every m <= m_max,
/// r <= floor(m/2).
inline CoefficientReport verify_coefficient_identity(int m_max) {
  if (m_max < 1) throw std::invalid_argument("verify_coefficient_identity: m_max must be >= 1");
  CoefficientReport rep;
  for (int m = 0; m <= m_max; ++m) {
    for (int r = 0; 2 * r <= m; ++r) {
      ExactScalar lhs = ExactScalar::i_power(Rational(pairing_count(m, r), factorial(m)), m);
      ExactScalar rhs = c_coefficient(m - 2 * r, r);
      bool ok = lhs == rhs;
      rep.cases.push_back({m, r, ok});
      rep.all_pass = rep.all_pass && ok;
    }
  }
  return rep;
}

}  // namespace zgen::wick
