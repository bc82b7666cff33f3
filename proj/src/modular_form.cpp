#include "twistlab/modular_form.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "twistlab/errors.hpp"
#include "twistlab/ntt.hpp"
#include "twistlab/summation.hpp"

namespace twistlab::mf {

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t inv_mod(std::uint64_t a, std::uint64_t m) {
  std::uint64_t r = 1, e = m - 2;
  a %= m;
  while (e) {
    if (e & 1) r = mul_mod(r, a, m);
    a = mul_mod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

std::string to_string(int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  std::string s;
  while (u) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

namespace {

long double abs_ld(int128 v) { return v < 0 ? -static_cast<long double>(v) : static_cast<long double>(v); }

// Residues of the three transforms at one index, reconstructed by mixed radix
// x = v1 + v2 q1 + v3 q1 q2 with v3 taken in the centered range.
class Crt {
 public:
  Crt()
      : q1_(ntt::kPrimes[0]),
        q2_(ntt::kPrimes[1]),
        q3_(ntt::kPrimes[2]),
        inv12_(inv_mod(q1_ % q2_, q2_)),
        inv13_(inv_mod(q1_ % q3_, q3_)),
        inv23_(inv_mod(q2_ % q3_, q3_)),
        q12_(static_cast<u128>(q1_) * q2_) {}

  struct Parts {
    u128 low;         // v1 + v2 q1, in [0, q1 q2)
    std::int64_t v3;  // centered top digit
  };

  [[nodiscard]] Parts split(std::uint64_t r1, std::uint64_t r2, std::uint64_t r3) const {
    const std::uint64_t v1 = r1;
    const std::uint64_t v2 = mul_mod((r2 + q2_ - v1 % q2_) % q2_, inv12_, q2_);
    std::uint64_t t = mul_mod((r3 + q3_ - v1 % q3_) % q3_, inv13_, q3_);
    t = (t + q3_ - v2 % q3_) % q3_;
    const std::uint64_t v3 = mul_mod(t, inv23_, q3_);
    const std::int64_t v3c = v3 > q3_ / 2 ? static_cast<std::int64_t>(v3) - static_cast<std::int64_t>(q3_)
                                          : static_cast<std::int64_t>(v3);
    return {static_cast<u128>(v1) + static_cast<u128>(v2) * q1_, v3c};
  }

  // Exact value when it fits in 128 bits (|v3| <= 6 keeps |x| < 7 q1 q2 < 2^127).
  [[nodiscard]] bool exact(const Parts& p, int128& out) const {
    if (p.v3 > 6 || p.v3 < -6) return false;
    out = static_cast<int128>(p.low) + static_cast<int128>(p.v3) * static_cast<int128>(q12_);
    return true;
  }

  [[nodiscard]] long double approx(const Parts& p) const {
    int128 x;
    if (exact(p, x)) return static_cast<long double>(x);
    return static_cast<long double>(p.v3) * static_cast<long double>(q12_) + static_cast<long double>(p.low);
  }

 private:
  std::uint64_t q1_, q2_, q3_;
  std::uint64_t inv12_, inv13_, inv23_;
  u128 q12_;
};

void check_size(std::uint64_t N, std::uint64_t cap, const char* what) {
  if (N < 1) throw DomainError(std::string(what) + ": N must be positive");
  if (N > cap) {
    throw ResourceError(std::string(what) + ": N = " + std::to_string(N) + " exceeds cap " + std::to_string(cap));
  }
  if (2 * N - 1 > (static_cast<std::uint64_t>(1) << ntt::kMaxLogLength)) {
    throw ResourceError(std::string(what) + ": N too large for the transform primes");
  }
}

// Deligne: |tau(n)| <= d(n) n^{11/2}; a small relative slack absorbs rounding
// in the long double bound itself.
bool deligne_ok(long double abs_tau, std::uint64_t n, std::uint32_t dn) {
  const long double bound = static_cast<long double>(dn) * std::pow(static_cast<long double>(n), 5.5L);
  return abs_tau <= bound * (1.0L + 1e-15L);
}

std::array<std::vector<std::uint64_t>, 3> all_residues(std::uint64_t N, PipelineStats* stats) {
  std::array<std::vector<std::uint64_t>, 3> r;
  for (int i = 0; i < 3; ++i) r[static_cast<std::size_t>(i)] = eta24_residues(N, i, stats);
  return r;
}

std::vector<std::uint64_t> sigma_table(std::uint64_t n) {
  std::vector<std::uint64_t> s(n + 1, 0);
  for (std::uint64_t i = 1; i <= n; ++i) {
    for (std::uint64_t j = i; j <= n; j += i) s[j] += i;
  }
  return s;
}

void record_defect(double& slot, double v) { slot = std::max(slot, v); }

bool mul_overflows(int128 a, int128 b, int128& out) { return __builtin_mul_overflow(a, b, &out); }

}  // namespace

std::vector<std::uint64_t> eta24_residues(std::uint64_t N, int prime_index, PipelineStats* stats) {
  if (prime_index < 0 || prime_index > 2) throw DomainError("eta24_residues: prime index out of range");
  const auto idx = static_cast<std::size_t>(prime_index);
  const int log_n = std::max(1, ntt::ceil_log2(2 * N - 1));
  const ntt::Transform tr(ntt::kPrimes[idx], ntt::kGenerators[idx], log_n);
  const auto& f = tr.field();

  std::vector<std::uint64_t> buf(tr.length(), 0);
  // Jacobi: eta^3 / q^{1/8} = sum_k (-1)^k (2k+1) q^{k(k+1)/2}.
  for (std::uint64_t k = 0;; ++k) {
    const std::uint64_t m = k * (k + 1) / 2;
    if (m >= N) break;
    const auto c = static_cast<std::int64_t>(2 * k + 1);
    buf[m] = f.from_signed((k & 1) ? -c : c);
  }

  // About 1% of indices, capped so the O(N) direct convolutions stay a small
  // fraction of the transform cost at large N.
  const std::size_t samples =
      std::min<std::size_t>(std::clamp<std::size_t>(N / 100, 1, 64), std::max<std::uint64_t>(2, 40'000'000 / N));
  std::mt19937_64 rng(0x7461755fULL + static_cast<std::uint64_t>(prime_index));
  std::uniform_int_distribution<std::uint64_t> pick(0, N - 1);
  std::vector<std::uint64_t> prev(N);

  for (int step = 0; step < 3; ++step) {
    std::copy(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(N), prev.begin());
    tr.square_truncated(buf, N);
    for (std::size_t s = 0; s < samples; ++s) {
      const std::uint64_t k = s == 0 ? N - 1 : pick(rng);
      std::uint64_t acc = 0;
      for (std::uint64_t i = 0; i <= k; ++i) {
        if (prev[i] != 0) acc = f.add(acc, f.mul(prev[i], prev[k - i]));
      }
      if (acc != buf[k]) {
        throw IntegrityError("eta24_residues: transform squaring disagrees with direct convolution at index " +
                             std::to_string(k));
      }
    }
    if (stats) {
      stats->squarings += 1;
      stats->sampled_checks += samples;
    }
  }
  if (stats) stats->transform_length = tr.length();

  std::vector<std::uint64_t> out(N);
  for (std::uint64_t i = 0; i < N; ++i) out[i] = f.from_mont(buf[i]);
  return out;
}

TauTable build_tau_table(std::uint64_t N, std::uint64_t cap, PipelineStats* stats) {
  check_size(N, cap, "build_tau_table");
  const auto r = all_residues(N, stats);
  const auto d = arith::divisor_counts(N);
  const Crt crt;

  TauTable t;
  t.N = N;
  t.tau.assign(N + 1, 0);
  for (std::uint64_t n = 1; n <= N; ++n) {
    const auto parts = crt.split(r[0][n - 1], r[1][n - 1], r[2][n - 1]);
    int128 x;
    if (!crt.exact(parts, x) || !deligne_ok(abs_ld(x), n, d[n])) {
      throw OverflowError("build_tau_table: reconstructed tau(" + std::to_string(n) +
                          ") violates the Deligne bound");
    }
    t.tau[n] = x;
  }
  return t;
}

LambdaTable build_lambda_table(std::uint64_t N, std::uint64_t cap, PipelineStats* stats) {
  check_size(N, cap, "build_lambda_table");
  const auto r = all_residues(N, stats);
  const auto d = arith::divisor_counts(N);
  const Crt crt;

  LambdaTable t;
  t.N = N;
  t.lambda.assign(N + 1, 0.0);
  for (std::uint64_t n = 1; n <= N; ++n) {
    const long double x = crt.approx(crt.split(r[0][n - 1], r[1][n - 1], r[2][n - 1]));
    const long double lam = x / std::pow(static_cast<long double>(n), 5.5L);
    if (!(std::fabs(lam) <= static_cast<long double>(d[n]) * (1.0L + 1e-12L))) {
      throw OverflowError("build_lambda_table: reconstructed tau(" + std::to_string(n) +
                          ") violates the Deligne bound");
    }
    t.lambda[n] = static_cast<double>(lam);
  }
  return t;
}

LambdaTable normalize(const TauTable& t) {
  LambdaTable l;
  l.N = t.N;
  l.lambda.assign(t.N + 1, 0.0);
  for (std::uint64_t n = 1; n <= t.N; ++n) {
    l.lambda[n] = static_cast<double>(static_cast<long double>(t.tau[n]) / std::pow(static_cast<long double>(n), 5.5L));
  }
  return l;
}

int128 niebur_tau(std::uint64_t n) {
  if (n == 0) throw DomainError("niebur_tau: n must be positive");
  const auto s = sigma_table(n);
  const int128 nn = n;
  int128 acc = 0;
  for (std::uint64_t k = 1; k < n; ++k) {
    const int128 kk = k;
    acc += kk * kk * (35 * kk * kk - 52 * kk * nn + 18 * nn * nn) * static_cast<int128>(s[k]) *
           static_cast<int128>(s[n - k]);
  }
  return nn * nn * nn * nn * static_cast<int128>(s[n]) - 24 * acc;
}

HeckeReport hecke_verify(const LambdaTable& lam, double tolerance) {
  const std::uint64_t N = lam.N;
  if (N < 4) throw DomainError("hecke_verify: need N >= 4");
  HeckeReport rep;
  const auto d = arith::divisor_counts(N);
  for (std::uint64_t n = 1; n <= N; ++n) record_defect(rep.max_deligne_ratio, std::fabs(lam[n]) / d[n]);

  for (std::uint64_t m = 2; m * m < N; ++m) {
    for (std::uint64_t n = m + 1; m * n <= N; ++n) {
      if (std::gcd(m, n) != 1) continue;
      record_defect(rep.max_multiplicative_defect, std::fabs(lam[m] * lam[n] - lam[m * n]));
      ++rep.coprime_pairs;
    }
  }
  const auto spf = arith::smallest_prime_factors(N);
  for (std::uint64_t p = 2; p * p <= N; ++p) {
    if (spf[p] != p) continue;
    for (std::uint64_t pk = p, prev = 1; pk * p <= N; prev = pk, pk *= p) {
      record_defect(rep.max_recursion_defect, std::fabs(lam[p] * lam[pk] - lam[pk * p] - lam[prev]));
      ++rep.recursion_checks;
    }
  }
  if (rep.max_deligne_ratio > 1.0 + 1e-12) throw IntegrityError("hecke_verify: Deligne bound violated");
  if (rep.max_multiplicative_defect > tolerance || rep.max_recursion_defect > tolerance) {
    throw IntegrityError("hecke_verify: Hecke defect above tolerance");
  }
  return rep;
}

HeckeReport hecke_verify(const TauTable& tau, const LambdaTable& lam, double tolerance) {
  if (tau.N != lam.N) throw DomainError("hecke_verify: table sizes differ");
  HeckeReport rep = hecke_verify(lam, tolerance);
  const std::uint64_t N = tau.N;
  const auto& t = tau.tau;
  for (std::uint64_t m = 2; m * m < N && rep.exact_ok; ++m) {
    for (std::uint64_t n = m + 1; m * n <= N; ++n) {
      if (std::gcd(m, n) != 1) continue;
      int128 prod;
      if (mul_overflows(t[m], t[n], prod) || prod != t[m * n]) {
        rep.exact_ok = false;
        break;
      }
    }
  }
  const auto spf = arith::smallest_prime_factors(N);
  for (std::uint64_t p = 2; p * p <= N && rep.exact_ok; ++p) {
    if (spf[p] != p) continue;
    int128 p11 = 1;
    for (int i = 0; i < 11; ++i) p11 *= static_cast<int128>(p);
    for (std::uint64_t pk = p, prev = 1; pk * p <= N; prev = pk, pk *= p) {
      int128 lhs, rhs;
      if (mul_overflows(t[p], t[pk], lhs) || mul_overflows(p11, t[prev], rhs) ||
          __builtin_add_overflow(rhs, t[pk * p], &rhs) || lhs != rhs) {
        rep.exact_ok = false;
        break;
      }
    }
  }
  if (!rep.exact_ok) throw IntegrityError("hecke_verify: integer Hecke identity failed");
  return rep;
}

double rankin_selberg_sum(double x, const LambdaTable& lam, const arith::PrimeTable& primes) {
  if (x < 2.0) return 0.0;
  if (!primes.covers(x) || !lam.covers(x)) {
    throw CoverageError("rankin_selberg_sum: tables do not cover x = " + std::to_string(x));
  }
  CompensatedSum s;
  for (std::uint32_t p : primes.range(0.0, x)) s.add(lam[p] * lam[p] / p);
  return s.value();
}

SymSquareValue sym_square_L(double s, double P, const LambdaTable& lam, const arith::PrimeTable& primes) {
  if (!(s > 1.0)) throw DomainError("sym_square_L: requires s > 1");
  SymSquareValue out;
  if (P < 2.0) return out;
  if (!primes.covers(P) || !lam.covers(P)) {
    throw CoverageError("sym_square_L: tables do not cover P = " + std::to_string(P));
  }
  // Sum of logs keeps the product order-independent and well conditioned.
  CompensatedSum log_prod;
  for (std::uint32_t p : primes.range(0.0, P)) {
    const double x = std::pow(static_cast<double>(p), -s);
    const double lp2 = lam[p] * lam[p] - 1.0;
    log_prod.add(-std::log1p(-lp2 * x + lp2 * x * x - x * x * x));
  }
  out.value = std::exp(log_prod.value());
  out.tail_bound = 9.0 * std::pow(P, 1.0 - s) / (s - 1.0);
  return out;
}

double log_power_tail_integral(double N, double sigma, int k) {
  if (!(sigma > 1.0) || N < 1.0 || k < 0) throw DomainError("log_power_tail_integral: need sigma > 1, N >= 1");
  const double L = 1.0 + std::log(N);
  double total = 0.0;
  double falling = 1.0;  // k!/(k-i)!
  for (int i = 0; i <= k; ++i) {
    if (i > 0) falling *= k - i + 1;
    total += falling * std::pow(L, k - i) / std::pow(sigma - 1.0, i + 1);
  }
  return std::pow(N, 1.0 - sigma) * total;
}

DiagonalSeries::DiagonalSeries(std::uint64_t ell1, std::uint64_t N, const LambdaTable& lam, DiagonalRoute route)
    : ell1_(ell1), N_(N) {
  if (ell1 == 0 || (ell1 & 1) == 0 || !arith::is_squarefree(ell1)) {
    throw DomainError("diagonal_series: ell1 must be odd and squarefree");
  }
  const std::uint64_t terms = (N + 1) / 2;
  coeff_.assign(terms, 0.0);
  log_m_.assign(terms, 0.0);
  for (std::uint64_t i = 0; i < terms; ++i) log_m_[i] = std::log(static_cast<double>(2 * i + 1));

  const auto ell_primes = arith::prime_factors(ell1);
  divisor_ell1_ = std::ldexp(1.0, static_cast<int>(ell_primes.size()));

  if (route == DiagonalRoute::Table) {
    const double top = static_cast<double>(ell1) * static_cast<double>(N) * static_cast<double>(N);
    if (!lam.covers(top)) throw CoverageError("diagonal_series: table route needs lambda up to ell1 N^2");
    for (std::uint64_t i = 0; i < terms; ++i) {
      const std::uint64_t m = 2 * i + 1;
      coeff_[i] = lam[ell1 * m * m];
    }
    return;
  }

  std::uint64_t need = std::max<std::uint64_t>(N, 1);
  for (auto p : ell_primes) need = std::max(need, p);
  if (!lam.covers(static_cast<double>(need))) {
    throw CoverageError("diagonal_series: lambda table must cover max(N, primes of ell1) = " + std::to_string(need));
  }
  // lambda(p^e) from lambda(p): lambda(p^{e+1}) = lambda(p) lambda(p^e) - lambda(p^{e-1}).
  const auto lam_pow = [&lam](std::uint64_t p, int e) {
    double a = 1.0, b = lam[p];
    if (e == 0) return a;
    for (int i = 1; i < e; ++i) {
      const double c = lam[p] * b - a;
      a = b;
      b = c;
    }
    return b;
  };
  const auto spf = arith::smallest_prime_factors(std::max<std::uint64_t>(N, 2));
  for (std::uint64_t i = 0; i < terms; ++i) {
    std::uint64_t m = 2 * i + 1;
    double c = 1.0;
    for (auto p : ell_primes) {
      if (m % p != 0) c *= lam[p];
    }
    while (m > 1) {
      const std::uint64_t p = spf[m];
      int a = 0;
      while (m % p == 0) {
        m /= p;
        ++a;
      }
      c *= lam_pow(p, 2 * a + (ell1 % p == 0 ? 1 : 0));
    }
    coeff_[i] = c;
  }
}

DiagonalValue DiagonalSeries::operator()(std::complex<double> w) const {
  if (w.real() < 2.0) throw DomainError("diagonal_series: requires Re w >= 2");
  CompensatedSum re, im;
  for (std::size_t i = 0; i < coeff_.size(); ++i) {
    const std::complex<double> term = coeff_[i] * std::exp(-w * log_m_[i]);
    re.add(term.real());
    im.add(term.imag());
  }
  DiagonalValue out;
  out.value = {re.value(), im.value()};
  // d(ell1 m^2) <= d(ell1) d_4(m) and sum_{m<=x} d_4(m) <= x (1 + log x)^3.
  out.tail_bound =
      N_ >= 1 ? divisor_ell1_ * w.real() * log_power_tail_integral(static_cast<double>(N_), w.real(), 3) : 0.0;
  return out;
}

DiagonalValue diagonal_series(std::uint64_t ell1, std::complex<double> w, std::uint64_t N, const LambdaTable& lambda,
                              DiagonalRoute route) {
  if (w.real() < 2.0) throw DomainError("diagonal_series: requires Re w >= 2");
  return DiagonalSeries(ell1, N, lambda, route)(w);
}

}  // namespace twistlab::mf
