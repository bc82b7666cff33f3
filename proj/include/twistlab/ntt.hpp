#pragma once

// Number-theoretic transforms over word-size primes q < 2^62 with q = 1 mod 2^32,
// used for exact truncated squaring of integer power series.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace twistlab::ntt {

/// Three primes k*2^32 + 1 just below 2^62. Product ~ 2^186.
inline constexpr std::array<std::uint64_t, 3> kPrimes = {
    4611685941117976577ULL, 4611685692009873409ULL, 4611685606110527489ULL};
inline constexpr std::array<std::uint64_t, 3> kGenerators = {3ULL, 19ULL, 3ULL};
inline constexpr int kMaxLogLength = 32;

/// Arithmetic modulo an odd q < 2^62 in Montgomery form (R = 2^64).
class MontgomeryField {
 public:
  explicit MontgomeryField(std::uint64_t q);

  [[nodiscard]] std::uint64_t modulus() const noexcept { return q_; }

  [[nodiscard]] std::uint64_t reduce(unsigned __int128 t) const noexcept {
    const std::uint64_t m = static_cast<std::uint64_t>(t) * qinv_neg_;
    const auto u = static_cast<std::uint64_t>((t + static_cast<unsigned __int128>(m) * q_) >> 64);
    return u >= q_ ? u - q_ : u;
  }
  [[nodiscard]] std::uint64_t mul(std::uint64_t a, std::uint64_t b) const noexcept {
    return reduce(static_cast<unsigned __int128>(a) * b);
  }
  [[nodiscard]] std::uint64_t add(std::uint64_t a, std::uint64_t b) const noexcept {
    const std::uint64_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  [[nodiscard]] std::uint64_t sub(std::uint64_t a, std::uint64_t b) const noexcept {
    return a >= b ? a - b : a + q_ - b;
  }
  [[nodiscard]] std::uint64_t to_mont(std::uint64_t a) const noexcept { return mul(a % q_, r2_); }
  [[nodiscard]] std::uint64_t from_mont(std::uint64_t a) const noexcept { return reduce(a); }
  [[nodiscard]] std::uint64_t pow(std::uint64_t base_mont, std::uint64_t e) const noexcept;
  [[nodiscard]] std::uint64_t one() const noexcept { return one_; }

  /// Residue of a signed integer, in Montgomery form.
  [[nodiscard]] std::uint64_t from_signed(std::int64_t v) const noexcept;

 private:
  std::uint64_t q_;
  std::uint64_t qinv_neg_;  // -q^{-1} mod 2^64
  std::uint64_t r2_;        // 2^128 mod q
  std::uint64_t one_;       // 2^64 mod q
};

/// Cyclic transforms of length 2^log_n. Forward is decimation in frequency
/// (natural in, bit-reversed out); inverse is decimation in time (bit-reversed
/// in, natural out, scaled by 1/n). Pointwise products in between need no
/// permutation.
class Transform {
 public:
  Transform(std::uint64_t q, std::uint64_t generator, int log_n);

  [[nodiscard]] const MontgomeryField& field() const noexcept { return field_; }
  [[nodiscard]] std::size_t length() const noexcept { return n_; }

  void forward(std::span<std::uint64_t> a) const;
  void inverse(std::span<std::uint64_t> a) const;

  /// a <- (a * a) truncated to the first `keep` coefficients; a.size() == length()
  /// and entries at or beyond `keep` must be zero on entry when 2*keep-1 > length().
  void square_truncated(std::span<std::uint64_t> a, std::size_t keep) const;

 private:
  MontgomeryField field_;
  std::size_t n_;
  // twiddles_[len + j] = w_{2 len}^j, Montgomery form.
  std::vector<std::uint64_t> twiddles_;
  std::uint64_t n_inv_;
};

/// Smallest log2 length L with 2^L >= n.
int ceil_log2(std::size_t n) noexcept;

}  // namespace twistlab::ntt
