#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "twistlab/arith.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/modular_form.hpp"
#include "twistlab/ntt.hpp"

using namespace twistlab;
using mf::int128;

namespace {

const mf::TauTable& tau_1e5() {
  static const mf::TauTable t = mf::build_tau_table(100'000);
  return t;
}

const mf::LambdaTable& lambda_1e6() {
  static const mf::LambdaTable t = mf::build_lambda_table(1'000'000);
  return t;
}

std::uint64_t naive_square_coeff(const std::vector<std::uint64_t>& a, std::size_t k, std::uint64_t q) {
  unsigned __int128 acc = 0;
  for (std::size_t i = 0; i <= k; ++i) acc = (acc + static_cast<unsigned __int128>(a[i]) * a[k - i]) % q;
  return static_cast<std::uint64_t>(acc);
}

}  // namespace

TEST_SUITE("modular_form") {
  TEST_CASE("Montgomery field") {
    const ntt::MontgomeryField f(ntt::kPrimes[0]);
    const std::uint64_t q = f.modulus();
    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
      const std::uint64_t a = rng() % q, b = rng() % q;
      const auto expect = static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % q);
      REQUIRE(f.from_mont(f.mul(f.to_mont(a), f.to_mont(b))) == expect);
    }
    CHECK(f.from_mont(f.from_signed(-1)) == q - 1);
    CHECK(f.from_mont(f.from_signed(-static_cast<std::int64_t>(q))) == 0);
    // Generator has full order: g^{(q-1)/2} = -1.
    for (std::size_t i = 0; i < 3; ++i) {
      const ntt::MontgomeryField g(ntt::kPrimes[i]);
      CHECK(arith::is_prime(ntt::kPrimes[i]));
      CHECK((ntt::kPrimes[i] - 1) % (1ULL << 32) == 0);
      CHECK(g.from_mont(g.pow(g.to_mont(ntt::kGenerators[i]), (ntt::kPrimes[i] - 1) / 2)) == ntt::kPrimes[i] - 1);
    }
  }

  TEST_CASE("transform round trip and exact squaring") {
    for (std::size_t pi = 0; pi < 3; ++pi) {
      const ntt::Transform tr(ntt::kPrimes[pi], ntt::kGenerators[pi], 10);
      const auto& f = tr.field();
      std::mt19937_64 rng(pi);
      std::vector<std::uint64_t> a(tr.length());
      for (auto& x : a) x = f.to_mont(rng() % f.modulus());
      auto b = a;
      tr.forward(b);
      tr.inverse(b);
      CHECK(a == b);

      const std::size_t keep = 512;
      std::vector<std::uint64_t> plain(tr.length(), 0), buf(tr.length(), 0);
      for (std::size_t i = 0; i < keep; ++i) {
        plain[i] = rng() % f.modulus();
        buf[i] = f.to_mont(plain[i]);
      }
      tr.square_truncated(buf, keep);
      for (std::size_t k = 0; k < keep; ++k) {
        REQUIRE(f.from_mont(buf[k]) == naive_square_coeff(plain, k, f.modulus()));
      }
      for (std::size_t k = keep; k < tr.length(); ++k) REQUIRE(buf[k] == 0);
    }
  }

  TEST_CASE("first tau values") {
    const auto t = mf::build_tau_table(7);
    const std::int64_t expect[] = {1, -24, 252, -1472, 4830, -6048, -16744};
    for (int n = 1; n <= 7; ++n) CHECK(t.tau[n] == expect[n - 1]);
    CHECK(mf::niebur_tau(2) == -24);
    CHECK(t.tau[6] == t.tau[2] * t.tau[3]);
    CHECK(mf::to_string(t.tau[7]) == "-16744");
  }

  TEST_CASE("eta-power pipeline equals Niebur's formula up to 1000") {
    mf::PipelineStats stats;
    const auto t = mf::build_tau_table(1000, mf::kDefaultTauCap, &stats);
    CHECK(stats.squarings == 9);
    CHECK(stats.sampled_checks >= 9 * 10);
    CHECK(stats.transform_length == 2048);
    for (std::uint64_t n = 1; n <= 1000; ++n) {
      if (t.tau[n] != mf::niebur_tau(n)) FAIL("tau(" << n << ") " << mf::to_string(t.tau[n]));
    }
  }

  TEST_CASE("lambda route agrees with the exact route") {
    const auto& exact = tau_1e5();
    const auto lam_a = mf::normalize(exact);
    const auto lam_b = mf::build_lambda_table(100'000);
    double worst = 0.0;
    for (std::uint64_t n = 1; n <= 100'000; ++n) worst = std::max(worst, std::fabs(lam_a[n] - lam_b[n]));
    CHECK(worst == 0.0);
  }

  TEST_CASE("resource cap") {
    CHECK_THROWS_AS(mf::build_tau_table(3'000'000), ResourceError);
    CHECK_THROWS_AS(mf::build_tau_table(100, 50), ResourceError);
    CHECK_THROWS_AS(mf::build_lambda_table(0), DomainError);
  }

  TEST_CASE("normalization") {
    const auto lam = mf::normalize(tau_1e5());
    CHECK(lam[1] == 1.0);
    CHECK(lam[2] == doctest::Approx(-24.0 / std::pow(2.0, 5.5)).epsilon(1e-15));
    CHECK(lam[2] == doctest::Approx(-0.530330085889911).epsilon(1e-13));
    const auto d = arith::divisor_counts(100'000);
    for (std::uint64_t n = 1; n <= 100'000; ++n) REQUIRE(std::fabs(lam[n]) <= d[n]);
  }

  TEST_CASE("Hecke relations") {
    const auto& tau = tau_1e5();
    const auto lam = mf::normalize(tau);
    CHECK(std::fabs(lam[2] * lam[3] - lam[6]) <= 1e-12);
    CHECK(std::fabs(lam[2] * lam[2] - lam[4] - 1.0) <= 1e-12);
    const auto rep = mf::hecke_verify(tau, lam);
    CHECK(rep.exact_ok);
    CHECK(rep.max_multiplicative_defect <= 1e-9);
    CHECK(rep.max_recursion_defect <= 1e-9);
    CHECK(rep.max_deligne_ratio <= 1.0);
    CHECK(rep.coprime_pairs > 100'000);

    auto broken = lam;
    broken.lambda[6] += 1e-6;
    CHECK_THROWS_AS(mf::hecke_verify(broken), IntegrityError);
    auto broken_tau = tau;
    broken_tau.tau[10] += 1;
    CHECK_THROWS_AS(mf::hecke_verify(broken_tau, lam), IntegrityError);
  }

  TEST_CASE("Rankin-Selberg sums") {
    const auto& lam = lambda_1e6();
    const auto primes = arith::sieve_primes(1'000'000);
    CHECK(mf::rankin_selberg_sum(2, lam, primes) == doctest::Approx(0.140625).epsilon(1e-14));
    CHECK(mf::rankin_selberg_sum(1.5, lam, primes) == 0.0);
    CHECK_THROWS_AS(mf::rankin_selberg_sum(2e6, lam, primes), CoverageError);
    const double b5 = mf::rankin_selberg_sum(1e5, lam, primes) - std::log(std::log(1e5));
    const double b6 = mf::rankin_selberg_sum(1e6, lam, primes) - std::log(std::log(1e6));
    CHECK(std::fabs(b5 - b6) <= 2e-2);
  }

  TEST_CASE("symmetric square Euler product") {
    const auto& lam = lambda_1e6();
    const auto primes = arith::sieve_primes(1'000'000);
    CHECK(mf::sym_square_L(3, 0, lam, primes).value == 1.0);
    CHECK_THROWS_AS(mf::sym_square_L(1.0, 100, lam, primes), DomainError);
    const auto a = mf::sym_square_L(3, 1e3, lam, primes);
    const auto b = mf::sym_square_L(3, 1e4, lam, primes);
    CHECK(std::fabs(a.value - b.value) <= 1e-6);
    CHECK(std::fabs(a.value - b.value) <= a.tail_bound * a.value);

    // zeta(4) sum_{n <= N} lambda(n^2)/n^2 against the product at s = 2.
    const std::uint64_t N = 1000;
    double series = 0.0;
    for (std::uint64_t n = 1; n <= N; ++n) series += lam[n * n] / static_cast<double>(n * n);
    const double zeta4 = std::pow(std::numbers::pi, 4) / 90.0;
    const auto prod = mf::sym_square_L(2, 1e4, lam, primes);
    // d(n^2) <= d_3(n): tail of the series is below 2 int_N u^{-2}(1+log u)^2.
    const double series_tail = 2.0 * mf::log_power_tail_integral(N, 2.0, 2);
    CHECK(std::fabs(prod.value - zeta4 * series) <= zeta4 * series_tail + prod.tail_bound * prod.value);
    CHECK(std::fabs(prod.value - zeta4 * series) <= 1e-2);
  }

  TEST_CASE("diagonal series") {
    const auto& lam = lambda_1e6();
    const auto a = mf::diagonal_series(1, 4.0, 5000, lam);
    const auto b = mf::diagonal_series(1, 4.0, 10000, lam);
    CHECK(std::abs(a.value - b.value) <= 1e-8);
    CHECK(std::abs(a.value - b.value) <= a.tail_bound);
    CHECK(mf::diagonal_series(7, 4.0, 1, lam).value.real() == doctest::Approx(lam[7]).epsilon(1e-15));
    const auto c = mf::diagonal_series(5, 2.0, 5000, lam);
    const auto e = mf::diagonal_series(5, 2.0, 10000, lam);
    CHECK(std::abs(c.value - e.value) <= 1e-4);
    CHECK_THROWS_AS(mf::diagonal_series(1, {1.5, 0.0}, 100, lam), DomainError);
    CHECK_THROWS_AS(mf::diagonal_series(9, 2.0, 100, lam), DomainError);
    CHECK_THROWS_AS(mf::diagonal_series(1, 2.0, 5000, lam, mf::DiagonalRoute::Table), CoverageError);

    // Hecke reconstruction against direct lookup.
    for (std::uint64_t ell1 : {1ULL, 3ULL, 5ULL, 15ULL}) {
      for (std::complex<double> w : {std::complex<double>(2.0, 0.0), std::complex<double>(2.0, 7.5)}) {
        const auto h = mf::diagonal_series(ell1, w, 250, lam, mf::DiagonalRoute::Hecke);
        const auto t = mf::diagonal_series(ell1, w, 250, lam, mf::DiagonalRoute::Table);
        CHECK(std::abs(h.value - t.value) <= 1e-12);
      }
    }
  }

  TEST_CASE("tail integral closed form") {
    // k = 0: N^{1-s}/(s-1).
    CHECK(mf::log_power_tail_integral(100, 3, 0) == doctest::Approx(1e-4 / 2));
    // Compare k = 2 against a crude numerical integral in log u.
    double num = 0.0;
    const double N = 50, s = 2.5;
    for (double x = std::log(N); x < 60; x += 1e-4) {
      num += std::exp((1 - s) * x) * std::pow(1 + x, 2) * 1e-4;
    }
    CHECK(mf::log_power_tail_integral(N, s, 2) == doctest::Approx(num).epsilon(1e-3));
  }
}
