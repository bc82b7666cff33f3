#include "twistlab/arith.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twistlab/errors.hpp"
#include "twistlab/summation.hpp"

namespace twistlab::arith {

namespace {

constexpr std::size_t kSegmentBytes = 1u << 18;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t b, std::uint64_t e, std::uint64_t m) noexcept {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, b, m);
    b = mul_mod(b, b, m);
    e >>= 1;
  }
  return r;
}

std::uint64_t isqrt(std::uint64_t n) noexcept {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

void require_cover(double x, const PrimeTable& primes, const char* what) {
  if (!primes.covers(x)) {
    throw CoverageError(std::string(what) + ": prime table limit " + std::to_string(primes.limit()) +
                        " does not cover x = " + std::to_string(x));
  }
}

}  // namespace

std::size_t PrimeTable::count_upto(double x) const noexcept {
  if (x < 2.0) return 0;
  const auto it = std::upper_bound(primes_.begin(), primes_.end(), x,
                                   [](double v, std::uint32_t p) { return v < static_cast<double>(p); });
  return static_cast<std::size_t>(it - primes_.begin());
}

std::span<const std::uint32_t> PrimeTable::range(double lo, double hi) const noexcept {
  const auto cmp_upper = [](double v, std::uint32_t p) { return v < static_cast<double>(p); };
  const auto first = std::upper_bound(primes_.begin(), primes_.end(), lo, cmp_upper);
  const auto last = std::upper_bound(primes_.begin(), primes_.end(), hi, cmp_upper);
  if (last <= first) return {};
  return {&*first, static_cast<std::size_t>(last - first)};
}

PrimeTable sieve_primes(std::uint64_t limit, std::uint64_t cap) {
  if (limit < 2) throw DomainError("sieve_primes: limit must be >= 2");
  if (limit > cap) {
    throw ResourceError("sieve_primes: limit " + std::to_string(limit) + " exceeds memory cap " +
                        std::to_string(cap));
  }
  if (limit > 0xFFFFFFFFULL) throw ResourceError("sieve_primes: limit exceeds 32-bit prime storage");

  const std::uint64_t root = isqrt(limit);
  // Base primes up to sqrt(limit), odd only.
  std::vector<std::uint32_t> base;
  {
    std::vector<char> small(root + 1, 1);
    for (std::uint64_t i = 3; i * i <= root; i += 2) {
      if (small[i]) {
        for (std::uint64_t j = i * i; j <= root; j += 2 * i) small[j] = 0;
      }
    }
    for (std::uint64_t i = 3; i <= root; i += 2) {
      if (small[i]) base.push_back(static_cast<std::uint32_t>(i));
    }
  }

  std::vector<std::uint32_t> primes;
  const double estimate = static_cast<double>(limit) / std::max(1.0, std::log(static_cast<double>(limit)) - 1.1);
  primes.reserve(static_cast<std::size_t>(estimate * 1.05) + 16);
  primes.push_back(2);

  // Segment byte k represents the odd number low + 2k.
  std::vector<char> segment(kSegmentBytes);
  std::vector<std::uint64_t> next(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) next[i] = static_cast<std::uint64_t>(base[i]) * base[i];

  for (std::uint64_t low = 3; low <= limit; low += 2 * kSegmentBytes) {
    const std::uint64_t high = std::min<std::uint64_t>(limit, low + 2 * kSegmentBytes - 1);
    const std::size_t len = static_cast<std::size_t>((high - low) / 2 + 1);
    std::fill(segment.begin(), segment.begin() + static_cast<std::ptrdiff_t>(len), 1);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const std::uint64_t p = base[i];
      std::uint64_t m = next[i];
      if (m > high) continue;
      for (; m <= high; m += 2 * p) segment[(m - low) / 2] = 0;
      next[i] = m;
    }
    for (std::size_t k = 0; k < len; ++k) {
      if (segment[k]) primes.push_back(static_cast<std::uint32_t>(low + 2 * k));
    }
  }
  primes.shrink_to_fit();
  return PrimeTable(limit, std::move(primes));
}

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  // Bases sufficient for every n < 2^64.
  for (std::uint64_t a : {2ULL, 325ULL, 9375ULL, 28178ULL, 450775ULL, 9780504ULL, 1795265022ULL}) {
    const std::uint64_t base = a % n;
    if (base == 0) continue;
    std::uint64_t x = pow_mod(base, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

int kronecker(std::int64_t a, std::int64_t n) noexcept {
  // Cohen, Algorithm 1.4.10. Two's-complement masks give residues mod 4 and 8
  // for negative a as well; 128-bit copies avoid overflow at |n| = 2^63.
  static constexpr int kTab2[8] = {0, 1, 0, -1, 0, -1, 0, 1};
  if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
  if ((a & 1) == 0 && (n & 1) == 0) return 0;

  __int128 aa = a;
  __int128 nn = n;
  int v = 0;
  while ((nn & 1) == 0) {
    nn >>= 1;
    ++v;
  }
  int k = (v & 1) ? kTab2[static_cast<int>(aa & 7)] : 1;
  if (nn < 0) {
    nn = -nn;
    if (aa < 0) k = -k;
  }
  while (aa != 0) {
    v = 0;
    while ((aa & 1) == 0) {
      aa >>= 1;
      ++v;
    }
    if (v & 1) k *= kTab2[static_cast<int>(nn & 7)];
    if (aa & nn & 2) k = -k;
    const __int128 r = aa < 0 ? -aa : aa;
    aa = nn % r;
    nn = r;
  }
  return nn == 1 ? k : 0;
}

bool is_perfect_square(std::uint64_t n) noexcept {
  const std::uint64_t r = isqrt(n);
  return r * r == n;
}

bool is_squarefree(std::uint64_t n) noexcept {
  if (n == 0) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return false;
    }
  }
  return true;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

SquarefreeSplit squarefree_split(std::uint64_t ell) {
  if (ell == 0 || (ell & 1) == 0) {
    throw DomainError("squarefree_split: expected an odd positive integer, got " + std::to_string(ell));
  }
  SquarefreeSplit s{ell, 1, 1};
  std::uint64_t n = ell;
  for (std::uint64_t p = 3; p * p <= n; p += 2) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    for (int i = 0; i < e / 2; ++i) s.ell2 *= p;
    if (e & 1) s.ell1 *= p;
  }
  s.ell1 *= n;
  return s;
}

std::vector<std::uint32_t> divisor_counts(std::size_t N) {
  std::vector<std::uint32_t> d(N + 1, 0);
  for (std::size_t i = 1; i <= N; ++i) {
    for (std::size_t j = i; j <= N; j += i) ++d[j];
  }
  return d;
}

std::vector<std::uint32_t> smallest_prime_factors(std::size_t N) {
  std::vector<std::uint32_t> spf(N + 1, 0);
  for (std::size_t i = 2; i <= N; ++i) {
    if (spf[i] != 0) continue;
    for (std::size_t j = i; j <= N; j += i) {
      if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);
    }
  }
  return spf;
}

double chebyshev_theta(double x, const PrimeTable& primes) {
  require_cover(x, primes, "chebyshev_theta");
  CompensatedSum s;
  for (std::uint32_t p : primes.range(0.0, x)) s.add(std::log(static_cast<double>(p)));
  return s.value();
}

double prime_reciprocal_sum(double x, const PrimeTable& primes) {
  require_cover(x, primes, "prime_reciprocal_sum");
  CompensatedSum s;
  for (std::uint32_t p : primes.range(0.0, x)) s.add(1.0 / static_cast<double>(p));
  return s.value();
}

double log_power_sum(double x, int j, const PrimeTable& primes) {
  if (j < 1) throw DomainError("log_power_sum: j must be a positive integer");
  require_cover(x, primes, "log_power_sum");
  CompensatedSum s;
  for (std::uint32_t p : primes.range(0.0, x)) {
    const double pd = static_cast<double>(p);
    s.add(std::pow(std::log(pd), j) / pd);
  }
  return s.value();
}

double twisted_prime_log_sum(double x, std::uint64_t c, const PrimeTable& primes) {
  if (c == 0 || (c & 1) == 0) throw DomainError("twisted_prime_log_sum: c must be odd and positive");
  require_cover(x, primes, "twisted_prime_log_sum");
  CompensatedSum s;
  for (std::uint32_t p : primes.range(0.0, x)) {
    const int chi = kronecker(static_cast<std::int64_t>(p), static_cast<std::int64_t>(c));
    if (chi != 0) s.add(chi * std::log(static_cast<double>(p)));
  }
  return s.value();
}

}  // namespace twistlab::arith
