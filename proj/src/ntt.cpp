#include "twistlab/ntt.hpp"

#include <algorithm>
#include <string>

#include "twistlab/errors.hpp"

namespace twistlab::ntt {

MontgomeryField::MontgomeryField(std::uint64_t q) : q_(q) {
  if ((q & 1) == 0 || q >= (1ULL << 62)) throw DomainError("MontgomeryField: modulus must be odd and < 2^62");
  // Newton iteration for q^{-1} mod 2^64.
  std::uint64_t inv = q;
  for (int i = 0; i < 6; ++i) inv *= 2 - q * inv;
  qinv_neg_ = ~inv + 1;
  const unsigned __int128 r = (static_cast<unsigned __int128>(1) << 64) % q;
  one_ = static_cast<std::uint64_t>(r);
  r2_ = static_cast<std::uint64_t>(static_cast<unsigned __int128>(one_) * one_ % q);
}

std::uint64_t MontgomeryField::pow(std::uint64_t base, std::uint64_t e) const noexcept {
  std::uint64_t r = one_;
  while (e) {
    if (e & 1) r = mul(r, base);
    base = mul(base, base);
    e >>= 1;
  }
  return r;
}

std::uint64_t MontgomeryField::from_signed(std::int64_t v) const noexcept {
  if (v >= 0) return to_mont(static_cast<std::uint64_t>(v));
  const std::uint64_t mag = static_cast<std::uint64_t>(-(v + 1)) + 1;
  const std::uint64_t r = mag % q_;
  return to_mont(r == 0 ? 0 : q_ - r);
}

int ceil_log2(std::size_t n) noexcept {
  int l = 0;
  while ((static_cast<std::size_t>(1) << l) < n) ++l;
  return l;
}

Transform::Transform(std::uint64_t q, std::uint64_t generator, int log_n)
    : field_(q), n_(static_cast<std::size_t>(1) << log_n) {
  if (log_n < 1 || log_n > kMaxLogLength) {
    throw DomainError("Transform: length 2^" + std::to_string(log_n) + " unsupported");
  }
  if ((q - 1) % n_ != 0) throw DomainError("Transform: modulus does not support this length");

  const std::uint64_t g = field_.to_mont(generator);
  const std::uint64_t w_n = field_.pow(g, (q - 1) / n_);

  twiddles_.assign(n_, 0);
  for (std::size_t len = 1; len < n_; len <<= 1) {
    // Primitive (2 len)-th root is w_n^(n / (2 len)).
    const std::uint64_t w = field_.pow(w_n, n_ / (2 * len));
    std::uint64_t cur = field_.one();
    for (std::size_t j = 0; j < len; ++j) {
      twiddles_[len + j] = cur;
      cur = field_.mul(cur, w);
    }
  }
  n_inv_ = field_.pow(field_.to_mont(n_ % q), q - 2);
}

namespace {

// Blocks at or below this size run every remaining stage while in cache.
constexpr std::size_t kCacheBlock = 1u << 14;

void dif_stage(const MontgomeryField& f, std::uint64_t* a, std::size_t len, const std::uint64_t* tw) {
  std::uint64_t* hi = a + len;
  for (std::size_t j = 0; j < len; ++j) {
    const std::uint64_t u = a[j];
    const std::uint64_t v = hi[j];
    a[j] = f.add(u, v);
    hi[j] = f.mul(f.sub(u, v), tw[len + j]);
  }
}

// Inverse stage: twiddle w^{-j} = -w^{len-j} for 0 < j < len.
void dit_stage(const MontgomeryField& f, std::uint64_t* a, std::size_t len, const std::uint64_t* tw) {
  std::uint64_t* hi = a + len;
  const std::uint64_t* neg = tw + 2 * len;
  const std::uint64_t u0 = a[0];
  const std::uint64_t v0 = hi[0];
  a[0] = f.add(u0, v0);
  hi[0] = f.sub(u0, v0);
  for (std::size_t j = 1; j < len; ++j) {
    const std::uint64_t u = a[j];
    const std::uint64_t v = f.mul(hi[j], *(neg - j));
    a[j] = f.sub(u, v);
    hi[j] = f.add(u, v);
  }
}

void dif(const MontgomeryField& f, std::uint64_t* a, std::size_t n, const std::uint64_t* tw) {
  if (n <= kCacheBlock) {
    for (std::size_t len = n / 2; len >= 1; len >>= 1) {
      for (std::size_t start = 0; start < n; start += 2 * len) dif_stage(f, a + start, len, tw);
    }
    return;
  }
  dif_stage(f, a, n / 2, tw);
  dif(f, a, n / 2, tw);
  dif(f, a + n / 2, n / 2, tw);
}

void dit(const MontgomeryField& f, std::uint64_t* a, std::size_t n, const std::uint64_t* tw) {
  if (n <= kCacheBlock) {
    for (std::size_t len = 1; len < n; len <<= 1) {
      for (std::size_t start = 0; start < n; start += 2 * len) dit_stage(f, a + start, len, tw);
    }
    return;
  }
  dit(f, a, n / 2, tw);
  dit(f, a + n / 2, n / 2, tw);
  dit_stage(f, a, n / 2, tw);
}

}  // namespace

void Transform::forward(std::span<std::uint64_t> a) const { dif(field_, a.data(), n_, twiddles_.data()); }

void Transform::inverse(std::span<std::uint64_t> a) const {
  dit(field_, a.data(), n_, twiddles_.data());
  for (auto& x : a) x = field_.mul(x, n_inv_);
}

void Transform::square_truncated(std::span<std::uint64_t> a, std::size_t keep) const {
  if (a.size() != n_) throw DomainError("square_truncated: buffer length mismatch");
  if (2 * keep - 1 > n_) throw DomainError("square_truncated: transform too short for exact squaring");
  forward(a);
  for (auto& x : a) x = field_.mul(x, x);
  inverse(a);
  std::fill(a.begin() + static_cast<std::ptrdiff_t>(keep), a.end(), 0);
}

}  // namespace twistlab::ntt
