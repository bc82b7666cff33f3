#pragma once

// Primes, quadratic symbols and the classical prime sums.

#include <cstdint>
#include <span>
#include <vector>

namespace twistlab::arith {

/// Largest sieve limit accepted unless the caller passes a different cap.
inline constexpr std::uint64_t kDefaultSieveCap = 2'000'000'000ULL;

/// All primes up to `limit`, ascending.
class PrimeTable {
 public:
  PrimeTable() = default;
  PrimeTable(std::uint64_t limit, std::vector<std::uint32_t> primes)
      : limit_(limit), primes_(std::move(primes)) {}

  [[nodiscard]] std::uint64_t limit() const noexcept { return limit_; }
  [[nodiscard]] std::span<const std::uint32_t> primes() const noexcept { return primes_; }
  [[nodiscard]] std::size_t size() const noexcept { return primes_.size(); }
  [[nodiscard]] bool covers(double x) const noexcept { return x <= static_cast<double>(limit_); }

  /// Number of primes <= x (x may exceed the limit; the caller checks coverage).
  [[nodiscard]] std::size_t count_upto(double x) const noexcept;

  /// Primes q with lo < q <= hi.
  [[nodiscard]] std::span<const std::uint32_t> range(double lo, double hi) const noexcept;

  [[nodiscard]] auto begin() const noexcept { return primes_.begin(); }
  [[nodiscard]] auto end() const noexcept { return primes_.end(); }

 private:
  std::uint64_t limit_ = 0;
  std::vector<std::uint32_t> primes_;
};

/// Segmented sieve of Eratosthenes; memory is O(sqrt(limit) + segment).
/// Throws ResourceError when limit > cap, DomainError when limit < 2.
PrimeTable sieve_primes(std::uint64_t limit, std::uint64_t cap = kDefaultSieveCap);

/// Deterministic Miller-Rabin for all 64-bit inputs.
bool is_prime(std::uint64_t n) noexcept;

/// Kronecker symbol (a/n) for all integers a, n.
int kronecker(std::int64_t a, std::int64_t n) noexcept;

struct SquarefreeSplit {
  std::uint64_t ell = 1;
  std::uint64_t ell1 = 1;  // squarefree part
  std::uint64_t ell2 = 1;  // ell = ell1 * ell2^2
};

/// Unique decomposition ell = ell1 * ell2^2 with ell1 squarefree. ell must be odd.
SquarefreeSplit squarefree_split(std::uint64_t ell);

bool is_squarefree(std::uint64_t n) noexcept;
bool is_perfect_square(std::uint64_t n) noexcept;

/// Distinct prime factors by trial division.
std::vector<std::uint64_t> prime_factors(std::uint64_t n);

/// d(n) for 0 <= n <= N (entry 0 unused).
std::vector<std::uint32_t> divisor_counts(std::size_t N);

/// Smallest prime factor for 0 <= n <= N (entries 0 and 1 are 0).
std::vector<std::uint32_t> smallest_prime_factors(std::size_t N);

// Sums over p <= x, compensated, ascending p. Each throws CoverageError when
// the table does not reach x.
double chebyshev_theta(double x, const PrimeTable& primes);
double prime_reciprocal_sum(double x, const PrimeTable& primes);
double log_power_sum(double x, int j, const PrimeTable& primes);

/// Sum_{p <= x} log p * (p/c) for odd positive c.
double twisted_prime_log_sum(double x, std::uint64_t c, const PrimeTable& primes);

}  // namespace twistlab::arith
