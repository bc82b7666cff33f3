#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "twistlab/arith.hpp"
#include "twistlab/errors.hpp"

using namespace twistlab;
using namespace twistlab::arith;

namespace {

bool trial_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::int64_t pow_mod(std::int64_t b, std::int64_t e, std::int64_t m) {
  std::int64_t r = 1;
  b %= m;
  if (b < 0) b += m;
  while (e) {
    if (e & 1) r = r * b % m;
    b = b * b % m;
    e >>= 1;
  }
  return r;
}

}  // namespace

TEST_SUITE("arith") {
  TEST_CASE("small sieves") {
    const auto t = sieve_primes(10);
    CHECK(std::vector<std::uint32_t>(t.begin(), t.end()) == std::vector<std::uint32_t>{2, 3, 5, 7});
    const auto two = sieve_primes(2);
    CHECK(two.size() == 1);
    CHECK(two.primes()[0] == 2);
    CHECK_THROWS_AS(sieve_primes(1), DomainError);
  }

  TEST_CASE("sieve matches trial division up to 1e4") {
    const auto t = sieve_primes(10'000);
    std::size_t count = 0;
    for (std::uint64_t n = 2; n <= 10'000; ++n) count += trial_prime(n);
    CHECK(t.size() == count);
    CHECK(t.size() == 1229);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.primes()[i - 1] < t.primes()[i]);
  }

  TEST_CASE("segment boundaries and Miller-Rabin agree") {
    // Crosses several 2^18-byte segments.
    const auto t = sieve_primes(3'000'000);
    CHECK(t.size() == 216'816);
    std::size_t k = 0;
    for (std::uint64_t n = 2; n <= 3'000'000; ++n) {
      const bool in = k < t.size() && t.primes()[k] == n;
      if (in) ++k;
      if (in != is_prime(n)) {
        FAIL("mismatch at " << n);
      }
    }
  }

  TEST_CASE("resource cap") {
    CHECK_THROWS_AS(sieve_primes(1000, 100), ResourceError);
    try {
      (void)sieve_primes(1000, 100);
    } catch (const ResourceError& e) {
      CHECK(std::string(e.what()).find("100") != std::string::npos);
    }
  }

  TEST_CASE("Miller-Rabin on large inputs") {
    CHECK(is_prime(18446744073709551557ULL));  // largest 64-bit prime
    CHECK_FALSE(is_prime(18446744073709551557ULL - 2));
    CHECK(is_prime(4611685941117976577ULL));
    CHECK_FALSE(is_prime(3215031751ULL));  // strong pseudoprime to 2, 3, 5, 7
    CHECK_FALSE(is_prime(1));
  }

  TEST_CASE("kronecker examples") {
    CHECK(kronecker(40, 3) == 1);
    CHECK(kronecker(40, 5) == 0);
    CHECK(kronecker(24, 5) == 1);
    for (std::int64_t a = -30; a <= 30; ++a) CHECK(kronecker(a, 1) == 1);
    CHECK(kronecker(1, 0) == 1);
    CHECK(kronecker(-1, 0) == 1);
    CHECK(kronecker(2, 0) == 0);
    CHECK(kronecker(3, 2) == -1);  // (3/2) = -1 since 3 = 3 mod 8
    CHECK(kronecker(7, 2) == 1);
    CHECK(kronecker(-1, -1) == -1);
    CHECK(kronecker(5, -1) == 1);
  }

  TEST_CASE("kronecker matches Euler's criterion") {
    const auto primes = sieve_primes(1000);
    for (std::uint32_t q : primes) {
      if (q == 2) continue;
      for (std::int64_t a = -50; a <= 50; ++a) {
        const std::int64_t e = pow_mod(a, (q - 1) / 2, q);
        const int expect = (a % static_cast<std::int64_t>(q) == 0) ? 0 : (e == 1 ? 1 : -1);
        REQUIRE(kronecker(a, q) == expect);
      }
    }
  }

  TEST_CASE("kronecker multiplicativity and periodicity") {
    for (std::int64_t a = -40; a <= 40; ++a) {
      for (std::int64_t m = 1; m <= 45; ++m) {
        for (std::int64_t n = 1; n <= 45; n += 4) {
          REQUIRE(kronecker(a, m * n) == kronecker(a, m) * kronecker(a, n));
        }
      }
    }
    for (std::int64_t a = -20; a <= 20; ++a) {
      for (std::int64_t b = -20; b <= 20; ++b) {
        for (std::int64_t n = 1; n <= 31; n += 2) REQUIRE(kronecker(a * b, n) == kronecker(a, n) * kronecker(b, n));
      }
    }
    for (std::int64_t c = 1; c <= 99; c += 2) {
      for (std::int64_t a = -300; a <= 300; ++a) REQUIRE(kronecker(a, c) == kronecker(a + c, c));
    }
    for (std::int64_t p : {3, 5, 7, 11, 13, 101}) {
      for (std::int64_t n = 1; n <= 2000; ++n) REQUIRE(kronecker(8 * p, n) == kronecker(8 * p, n + 32 * p));
    }
  }

  TEST_CASE("squarefree split") {
    const auto s45 = squarefree_split(45);
    CHECK(s45.ell1 == 5);
    CHECK(s45.ell2 == 3);
    const auto s1 = squarefree_split(1);
    CHECK(s1.ell1 == 1);
    CHECK(s1.ell2 == 1);
    const auto s105 = squarefree_split(105);
    CHECK(s105.ell1 == 105);
    CHECK(s105.ell2 == 1);
    CHECK_THROWS_AS(squarefree_split(12), DomainError);
    for (std::uint64_t ell = 1; ell <= 100'000; ell += 2) {
      const auto s = squarefree_split(ell);
      REQUIRE(s.ell1 * s.ell2 * s.ell2 == ell);
      REQUIRE(is_squarefree(s.ell1));
    }
  }

  TEST_CASE("chebyshev theta") {
    const auto t = sieve_primes(10'000);
    CHECK(chebyshev_theta(2, t) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(chebyshev_theta(1.5, t) == 0.0);
    CHECK(chebyshev_theta(10'000, t) == doctest::Approx(9895.991379156987).epsilon(1e-14));
    CHECK_THROWS_AS(chebyshev_theta(20'000, t), CoverageError);
  }

  TEST_CASE("Mertens-type sums") {
    const auto t = sieve_primes(10'000'000);
    const double m6 = prime_reciprocal_sum(1e6, t) - std::log(std::log(1e6));
    CHECK(m6 == doctest::Approx(0.261536185091662).epsilon(1e-12));
    CHECK(std::fabs(m6 - 0.2615) <= 5e-3);
    const double m7 = prime_reciprocal_sum(1e7, t) - std::log(std::log(1e7));
    CHECK(std::fabs(m6 - m7) <= 5e-3);
    CHECK(log_power_sum(2, 1, t) == doctest::Approx(std::log(2.0) / 2));
    const double l1 = log_power_sum(1e6, 1, t);
    CHECK(l1 == doctest::Approx(12.483585396239194).epsilon(1e-12));
    CHECK(std::fabs(l1 - std::log(1e6)) <= 5.0);
    const double l2 = log_power_sum(1e6, 2, t);
    CHECK(l2 == doctest::Approx(92.89020443222677).epsilon(1e-12));
    CHECK(std::fabs(l2 - std::pow(std::log(1e6), 2) / 2) <= 3 * std::log(1e6));
    CHECK_THROWS_AS(log_power_sum(10, 0, t), DomainError);
  }

  TEST_CASE("twisted prime sums") {
    const auto t = sieve_primes(1'000'000);
    CHECK(twisted_prime_log_sum(10'000, 1, t) == doctest::Approx(chebyshev_theta(10'000, t)).epsilon(1e-15));
    CHECK(twisted_prime_log_sum(10'000, 9, t) ==
          doctest::Approx(chebyshev_theta(10'000, t) - std::log(3.0)).epsilon(1e-14));
    const double s3 = twisted_prime_log_sum(10'000, 3, t);
    CHECK(s3 == doctest::Approx(-19.52542359749187).epsilon(1e-10));
    CHECK(std::fabs(s3) <= 10 * std::sqrt(1e4) * std::pow(std::log(6e4), 2));
    const double s5 = twisted_prime_log_sum(1e6, 5, t);
    CHECK(std::fabs(s5) <= 10 * std::sqrt(1e6) * std::pow(std::log(1e7), 2));
    CHECK_THROWS_AS(twisted_prime_log_sum(100, 4, t), DomainError);
  }

  TEST_CASE("divisor counts and smallest prime factors") {
    const auto d = divisor_counts(1000);
    const auto spf = smallest_prime_factors(1000);
    for (std::uint64_t n = 1; n <= 1000; ++n) {
      std::uint32_t c = 0;
      for (std::uint64_t k = 1; k <= n; ++k) c += (n % k == 0);
      REQUIRE(d[n] == c);
      if (n >= 2) {
        std::uint64_t p = 2;
        while (n % p) ++p;
        REQUIRE(spf[n] == p);
      }
    }
  }
}
