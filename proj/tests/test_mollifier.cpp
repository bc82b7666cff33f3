#include <doctest.h>

#include <cmath>
#include <numbers>

#include "twistlab/arith.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/mollifier.hpp"

using namespace twistlab;
using namespace twistlab::mollifier;

namespace {

const mf::LambdaTable& lambda_table() {
  static const mf::LambdaTable t = mf::build_lambda_table(100'000);
  return t;
}

const arith::PrimeTable& prime_table() {
  static const arith::PrimeTable t = arith::sieve_primes(100'000);
  return t;
}

bool slow_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t k = 2; k * k <= n; ++k) {
    if (n % k == 0) return false;
  }
  return true;
}

double taylor_exp(double y, double x) {
  const int deg = 2 * static_cast<int>(std::ceil(y));
  double term = 1.0, sum = 1.0;
  for (int j = 1; j <= deg; ++j) {
    term *= x / j;
    sum += term;
  }
  return sum;
}

// Block sum by trial division, independent of the sieve and of Ladder::range.
double brute_block(std::uint64_t p, double lo, double hi) {
  double s = 0.0;
  for (std::uint64_t q = 3; static_cast<double>(q) <= hi; q += 2) {
    if (static_cast<double>(q) <= lo || !slow_prime(q)) continue;
    s += arith::kronecker(8 * static_cast<std::int64_t>(p), static_cast<std::int64_t>(q)) * lambda_table()[q] /
         std::sqrt(static_cast<double>(q));
  }
  return s;
}

}  // namespace

TEST_SUITE("mollifier") {
  TEST_CASE("ladder at X = 1e10") {
    const auto L = build_ladder(1e10, 0.0);
    const double llx = std::log(std::log(1e10));
    CHECK(llx * llx == doctest::Approx(9.8383).epsilon(1e-4));
    CHECK(L.J == 2);
    CHECK_FALSE(L.degenerate);
    CHECK(L.alpha(1) == doctest::Approx(0.10164).epsilon(1e-4));
    CHECK(L.alpha(2) == doctest::Approx(2.0329).epsilon(1e-4));
    CHECK(L.alpha0 == doctest::Approx(0.030103).epsilon(1e-4));
    CHECK(L.block_lo(1) == 2.0);
    CHECK(L.block_hi(1) == doctest::Approx(std::pow(1e10, L.alpha(1))));
    CHECK(L.y[0] == doctest::Approx(std::exp(2.0) * std::pow(L.alpha(1), -0.75)));

    const auto D = build_ladder(1e10, 2.0);
    CHECK(D.degenerate);
    CHECK(D.J == 1);
    CHECK(build_ladder(1e10, 0.5).J == 2);
    CHECK_THROWS_AS(build_ladder(2.5, 0.0), DomainError);
    CHECK_THROWS_AS(build_ladder(100.0, -1.0), DomainError);
  }

  TEST_CASE("ladder invariants arithmetic") {
    for (double X : {1e4, 2e4, 1e6, 1e10, 1e20, 1e40}) {
      for (double M : {0.0, 0.5}) {
        const auto L = build_ladder(X, M);
        const double llx = std::log(std::log(X));
        const double base = 1.0 / (llx * llx);
        int J = 1;
        while (base * std::pow(20.0, J - 1) <= std::pow(10.0, -M)) ++J;
        if (base > std::pow(10.0, -M)) J = 1;
        CHECK(L.J == J);
        double sum = 0.0;
        for (int j = 1; j <= J; ++j) {
          const double a = base * std::pow(20.0, j - 1);
          sum += 2.0 * a * std::ceil(std::exp(2.0) * std::pow(a, -0.75));
        }
        const double bound = std::ceil(4.0 * std::exp(2.0) * std::pow(10.0, -M / 4.0)) + 1.0;
        const auto inv = check_ladder(L);
        CHECK(inv.length_sum == doctest::Approx(sum).epsilon(1e-12));
        CHECK(inv.length_bound == bound);
        CHECK(inv.length_ok == (sum <= bound));
        CHECK(inv.increasing_by_20);
      }
    }
  }

  TEST_CASE("prime cap clips blocks") {
    const auto L = build_ladder(1e4, 0.0, 1e4);
    CHECK(L.truncated);
    CHECK(L.block_hi(L.J) == 1e4);
    CHECK_FALSE(build_ladder(1e4, 0.0).truncated);
  }

  TEST_CASE("truncated exponential") {
    CHECK(truncated_exp(3.7, 0.0) == 1.0);
    CHECK(truncated_exp(0.0, 5.0) == 1.0);
    CHECK(truncated_exp(1.0, 1.0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(std::fabs(truncated_exp(5.0, -1.0) - std::exp(-1.0)) <= 3e-8);
    for (double x = -3.0; x <= 3.0; x += 0.25) {
      CHECK(truncated_exp(2.3, x) == doctest::Approx(taylor_exp(2.3, x)).epsilon(1e-13));
    }
  }

  TEST_CASE("truncated exponential inside the S(J) regime") {
    for (double a : {0.01, 0.05, 0.1016, 0.2, 0.5, 1.0, 2.0, 4.06}) {
      const double bound = std::pow(a, -0.75);
      const double y = std::exp(2.0) * bound;
      for (int i = 0; i <= 400; ++i) {
        const double P = -bound + 2.0 * bound * i / 400.0;
        REQUIRE(std::fabs(truncated_exp(y, -P) - std::exp(-P)) <= 1e-6 * std::exp(std::fabs(P)));
      }
      CHECK(kirila_ratio(a) <= 1.001);
    }
  }

  TEST_CASE("blocks against trial division") {
    const auto L = build_ladder(1e4, 0.0, 1e4);
    for (std::uint64_t p : {5ULL, 3ULL, 101ULL}) {
      for (int j = 1; j <= L.J; ++j) {
        const auto b = p_block(p, j, L, lambda_table(), prime_table());
        CHECK(b.j == j);
        CHECK(b.value == doctest::Approx(brute_block(p, b.lo, b.hi)).epsilon(1e-12));
      }
    }
    // A block reduced to the single prime 3.
    const auto one = build_ladder(1e4, 0.0, 4.0);
    const auto b = p_block(5, 1, one, lambda_table(), prime_table());
    CHECK(b.value == doctest::Approx(arith::kronecker(40, 3) * lambda_table()[3] / std::sqrt(3.0)).epsilon(1e-15));
    // And an empty one.
    const auto none = build_ladder(1e4, 0.0, 2.5);
    CHECK(p_block(5, 1, none, lambda_table(), prime_table()).value == 0.0);
    CHECK_THROWS_AS(p_block(5, 0, L, lambda_table(), prime_table()), DomainError);
    const auto big = build_ladder(1e7, 0.0);
    CHECK_THROWS_AS(p_block(5, big.J, big, lambda_table(), prime_table()), CoverageError);
  }

  TEST_CASE("mollifier value") {
    const auto L = build_ladder(1e4, 0.0, 1e4);
    const std::vector<double> zeros(static_cast<std::size_t>(L.J), 0.0);
    CHECK(mollifier_value(zeros, -1.0, L) == doctest::Approx(std::sqrt(std::log(1e4))).epsilon(1e-15));
    CHECK(mollifier_value(3, 0.0, L, lambda_table(), prime_table()) ==
          doctest::Approx(std::sqrt(std::log(1e4))).epsilon(1e-15));
    double oracle = std::sqrt(std::log(1e4));
    for (int j = 1; j <= L.J; ++j) {
      oracle *= taylor_exp(L.y[static_cast<std::size_t>(j - 1)], -brute_block(3, L.block_lo(j), L.block_hi(j)));
    }
    CHECK(std::fabs(mollifier_value(3, -1.0, L, lambda_table(), prime_table()) - oracle) <= 1e-12 * std::fabs(oracle));
    CHECK_THROWS_AS(mollifier_value(std::vector<double>{1.0, 2.0, 3.0}, -1.0, L), DomainError);
  }

  TEST_CASE("M_{i,j}") {
    const auto one = build_ladder(1e4, 0.0, 4.0);
    const double top = one.alpha(1) * std::log(1e4);
    const double expect = arith::kronecker(56, 3) * lambda_table()[3] * std::pow(3.0, -0.5 - 1.0 / top) *
                          (top - std::log(3.0)) / top;
    CHECK(m_ij(7, 1, 1, one, lambda_table(), prime_table()) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(m_ij(7, 1, 1, one, lambda_table(), prime_table(), false) ==
          doctest::Approx(expect / lambda_table()[3]).epsilon(1e-14));
    const auto none = build_ladder(1e4, 0.0, 2.5);
    CHECK(m_ij(7, 1, 1, none, lambda_table(), prime_table()) == 0.0);

    const auto L = build_ladder(1e4, 0.0, 1e4);
    CHECK(m_ij(7, 2, 2, L, lambda_table(), prime_table()) != m_ij(7, 2, 2, L, lambda_table(), prime_table(), false));
    CHECK_THROWS_AS(m_ij(7, 2, 1, L, lambda_table(), prime_table()), DomainError);
    CHECK_THROWS_AS(m_ij(7, 1, 3, L, lambda_table(), prime_table()), DomainError);
    const auto t = m_table(7, L, lambda_table(), prime_table());
    CHECK(t[1][0] == 0.0);
    CHECK(t[0][1] == m_ij(7, 1, 2, L, lambda_table(), prime_table()));
  }

  TEST_CASE("classification rules") {
    const auto L = build_ladder(1e10, 0.0);
    std::vector<std::vector<double>> m(2, std::vector<double>(2, 0.0));
    CHECK(classify(m, L) == 2);
    CHECK(in_set(m, L, 2));
    m[0][1] = 2.0 * std::pow(L.alpha(1), -0.75);
    CHECK(classify(m, L) == 0);
    CHECK(in_set(m, L, 0));
    m[0][1] = 0.0;
    m[1][1] = 2.0 * std::pow(L.alpha(2), -0.75);
    CHECK(classify(m, L) == 1);
    CHECK(in_set(m, L, 1));
    CHECK_FALSE(in_set(m, L, 2));
    CHECK_THROWS_AS(in_set(m, L, 3), DomainError);
  }

  TEST_CASE("partition of the primes up to 1e4") {
    const auto L = build_ladder(1e4, 0.0, 1e4);
    std::vector<int> counts(static_cast<std::size_t>(L.J) + 1, 0);
    for (std::uint32_t p : prime_table().range(2.0, 1e4)) {
      const auto m = m_table(p, L, lambda_table(), prime_table());
      const int c = classify(m, L);
      REQUIRE(c >= 0);
      REQUIRE(c <= L.J);
      REQUIRE(in_set(m, L, c));
      int memberships = 0;
      for (int j = 0; j <= L.J; ++j) memberships += in_set(m, L, j);
      REQUIRE(memberships == 1);
      ++counts[static_cast<std::size_t>(c)];
    }
    int total = 0;
    for (int c : counts) total += c;
    CHECK(total == 1228);
    CHECK(classify(3, L, lambda_table(), prime_table()) == classify(m_table(3, L, lambda_table(), prime_table()), L));
  }
}
