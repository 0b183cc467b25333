#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "zgen/wick.hpp"

using namespace zgen::wick;

TEST_CASE("pairing counts match the tabulated coefficients") {
  CHECK(pairing_count(2, 1) == 1);
  CHECK(pairing_count(3, 1) == 3);
  CHECK(pairing_count(4, 1) == 6);
  CHECK(pairing_count(4, 2) == 3);
  CHECK(pairing_count(0, 0) == 1);
  CHECK(pairing_count(5, 3) == 0);  // 2r > m convention
  CHECK(pairing_count(6, 3) == 15);
}

TEST_CASE("pairing count recurrence f(m,r) = f(m-1,r) + (m-1) f(m-2,r-1)") {
  for (long m = 2; m <= 16; ++m)
    for (long r = 0; 2 * r <= m; ++r)
      CHECK(pairing_count(m, r) ==
            pairing_count(m - 1, r) + (m - 1) * pairing_count(m - 2, r - 1));
}

TEST_CASE("enumerate_pairings produces distinct canonical terms") {
  auto two = enumerate_pairings(2, 1);
  REQUIRE(two.size() == 1);
  CHECK(two[0].pairs == std::vector<std::pair<int, int>>{{1, 2}});
  CHECK(two[0].unpaired.empty());

  auto four = enumerate_pairings(4, 2);
  REQUIRE(four.size() == 3);
  std::set<std::vector<std::pair<int, int>>> seen;
  for (const auto& t : four) seen.insert(t.pairs);
  CHECK(seen.count({{1, 2}, {3, 4}}) == 1);
  CHECK(seen.count({{1, 3}, {2, 4}}) == 1);
  CHECK(seen.count({{1, 4}, {2, 3}}) == 1);

  CHECK(enumerate_pairings(6, 3).size() == 15);  // 5!!
}

TEST_CASE("enumeration size equals pairing_count and terms are unique") {
  for (int m = 0; m <= 8; ++m)
    for (int r = 0; 2 * r <= m; ++r) {
      auto terms = enumerate_pairings(m, r);
      CHECK(BigInt(terms.size()) == pairing_count(m, r));
      std::set<std::vector<std::pair<int, int>>> seen;
      for (const auto& t : terms) {
        CHECK((int)t.pairs.size() == r);
        CHECK((int)t.unpaired.size() == m - 2 * r);
        seen.insert(t.pairs);
      }
      CHECK((int)seen.size() == (int)terms.size());
    }
}

TEST_CASE("enumerate_pairings rejects bad input") {
  CHECK_THROWS(enumerate_pairings(3, 2));
  CHECK_THROWS(enumerate_pairings(18, 1));  // exceeds the default cap
  CHECK_NOTHROW(enumerate_pairings(18, 1, 20));
}

TEST_CASE("timeordered_expansion strata") {
  auto e0 = timeordered_expansion(0);
  REQUIRE(e0.terms.size() == 1);
  CHECK(e0.terms[0].coefficient == ExactScalar::one());
  CHECK(e0.terms[0].pairs.empty());
  CHECK(e0.terms[0].unpaired.empty());

  auto e2 = timeordered_expansion(2);
  REQUIRE(e2.terms.size() == 2);
  CHECK(e2.terms[0].coefficient == ExactScalar::one());
  CHECK(e2.terms[1].coefficient == ExactScalar(Rational(1), 0));

  auto e3 = timeordered_expansion(3);
  REQUIRE(e3.terms.size() == 2);
  CHECK(e3.terms[1].coefficient == ExactScalar(Rational(3), 0));
  CHECK(e3.terms[1].unpaired == std::vector<int>{1});

  auto e4 = timeordered_expansion(4);
  REQUIRE(e4.terms.size() == 3);
  CHECK(e4.terms[1].coefficient == ExactScalar(Rational(6), 0));
  CHECK(e4.terms[2].coefficient == ExactScalar(Rational(3), 0));

  // stratum count has no gaps and the top even stratum is (m-1)!!
  for (int m = 2; m <= 10; m += 2) {
    auto e = timeordered_expansion(m);
    CHECK((int)e.terms.size() == m / 2 + 1);
    BigInt dfac = 1;
    for (int k = m - 1; k > 1; k -= 2) dfac *= k;
    CHECK(pairing_count(m, m / 2) == dfac);
  }
}

TEST_CASE("exact scalar arithmetic") {
  auto i = ExactScalar::i_power(1, 1);
  CHECK(i * i == ExactScalar(Rational(-1), 0));
  CHECK(i * i * i * i == ExactScalar::one());
  CHECK(ExactScalar::i_power(Rational(1, 2), 2) == ExactScalar(Rational(-1, 2), 0));
  CHECK((i + i) * i == ExactScalar(Rational(-2), 0));
}

TEST_CASE("coefficient identity i^m/m! f_{m,r} = C_{m-2r,r}") {
  // smallest nondegenerate case by hand: m=2, r=1 gives -1/2 on both sides
  ExactScalar lhs = ExactScalar::i_power(Rational(pairing_count(2, 1), factorial(2)), 2);
  CHECK(lhs == ExactScalar(Rational(-1, 2), 0));
  CHECK(c_coefficient(0, 1) == ExactScalar(Rational(-1, 2), 0));

  auto r4 = verify_coefficient_identity(4);
  CHECK(r4.all_pass);
  CHECK(r4.cases.size() == 9);

  auto r12 = verify_coefficient_identity(12);
  CHECK(r12.all_pass);
  for (const auto& c : r12.cases) CHECK(c.pass);
}
