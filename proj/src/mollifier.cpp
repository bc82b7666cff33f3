#include "twistlab/mollifier.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "twistlab/errors.hpp"
#include "twistlab/summation.hpp"

namespace twistlab::mollifier {

namespace {

constexpr double kE2 = std::numbers::e * std::numbers::e;

void check_block(const Ladder& L, int j) {
  if (j < 1 || j > L.J) throw DomainError("block index " + std::to_string(j) + " outside 1.." + std::to_string(L.J));
}

void check_cover(const Ladder& L, int j, const mf::LambdaTable& lambda, const arith::PrimeTable& primes) {
  const double hi = L.block_hi(j);
  if (!primes.covers(hi) || !lambda.covers(hi)) {
    throw CoverageError("block " + std::to_string(j) + " needs tables up to " + std::to_string(hi));
  }
}

int chi8(std::uint64_t d, std::uint32_t q) {
  return arith::kronecker(static_cast<std::int64_t>(8 * d), static_cast<std::int64_t>(q));
}

}  // namespace

double Ladder::block_lo(int j) const {
  if (j == 1) return 2.0;
  return std::min(std::pow(X, alpha(j - 1)), prime_cap > 0.0 ? prime_cap : INFINITY);
}

double Ladder::block_hi(int j) const {
  const double hi = std::pow(X, alpha(j));
  return prime_cap > 0.0 ? std::min(hi, prime_cap) : hi;
}

Ladder build_ladder(double X, double M, double prime_cap) {
  if (!(X > std::numbers::e)) throw DomainError("build_ladder: X must exceed e");
  if (!(M >= 0.0)) throw DomainError("build_ladder: M must be non-negative");
  Ladder L;
  L.X = X;
  L.M = M;
  const double lx = std::log(X);
  const double llx = std::log(lx);
  L.alpha0 = std::numbers::ln2 / lx;
  const double base = 1.0 / (llx * llx);
  const double limit = std::pow(10.0, -M);
  int jmax = 0;
  while (base * std::pow(20.0, jmax) <= limit) ++jmax;  // alpha_{jmax+1} > limit
  if (jmax == 0) {
    L.J = 1;
    L.degenerate = true;
  } else {
    L.J = jmax + 1;
  }
  for (int j = 1; j <= L.J; ++j) {
    const double a = base * std::pow(20.0, j - 1);
    L.alphas.push_back(a);
    L.y.push_back(kE2 * std::pow(a, -0.75));
  }
  L.prime_cap = prime_cap;
  if (prime_cap > 0.0) {
    for (double a : L.alphas) L.truncated = L.truncated || std::pow(X, a) > prime_cap;
  }
  return L;
}

LadderInvariants check_ladder(const Ladder& L) {
  LadderInvariants inv;
  for (double a : L.alphas) inv.length_sum += 2.0 * a * std::ceil(kE2 * std::pow(a, -0.75));
  inv.length_bound = std::ceil(4.0 * kE2 * std::pow(10.0, -L.M / 4.0)) + 1.0;
  inv.length_ok = inv.length_sum <= inv.length_bound;
  inv.increasing_by_20 = true;
  for (std::size_t j = 1; j < L.alphas.size(); ++j) {
    inv.increasing_by_20 = inv.increasing_by_20 && std::fabs(L.alphas[j] / L.alphas[j - 1] - 20.0) < 1e-9;
  }
  const double lll = std::log(std::log(std::log(L.X)));
  inv.J_bound_applies = lll >= 1.0;
  if (inv.J_bound_applies) inv.J_bound_ok = L.J <= lll;
  return inv;
}

double truncated_exp(double y, double x) noexcept {
  const int deg = 2 * static_cast<int>(std::ceil(y));
  // For negative x the alternating sum cancels badly; when the dropped terms
  // are negligible next to exp(x) the exponential itself is the better value.
  if (x < 0.0 && deg + 1 > 2.0 * -x) {
    const double first_dropped = (deg + 1) * std::log(-x) - std::lgamma(deg + 2.0);
    if (first_dropped < x - 40.0) return std::exp(x);
  }
  double acc = 1.0;
  for (int j = deg; j >= 1; --j) acc = 1.0 + acc * x / j;
  return acc;
}

double kirila_ratio(double alpha, int points) {
  const double bound = std::pow(alpha, -0.75);
  const double y = kE2 * bound;
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -bound + 2.0 * bound * i / (points - 1);
    worst = std::max(worst, std::exp(x) / truncated_exp(y, x));
  }
  return worst;
}

BlockValue p_block(std::uint64_t p, int j, const Ladder& L, const mf::LambdaTable& lambda,
                   const arith::PrimeTable& primes) {
  check_block(L, j);
  check_cover(L, j, lambda, primes);
  BlockValue b{j, 0.0, L.block_lo(j), L.block_hi(j)};
  CompensatedSum s;
  for (std::uint32_t q : primes.range(b.lo, b.hi)) {
    const int c = chi8(p, q);
    if (c != 0) s.add(c * lambda[q] / std::sqrt(static_cast<double>(q)));
  }
  b.value = s.value();
  return b;
}

double mollifier_value(std::span<const double> blocks, double alpha, const Ladder& L) {
  if (blocks.size() != static_cast<std::size_t>(L.J)) throw DomainError("mollifier_value: need one value per block");
  double m = std::sqrt(std::log(L.X));
  for (int j = 1; j <= L.J; ++j) {
    m *= truncated_exp(L.y[static_cast<std::size_t>(j - 1)], alpha * blocks[static_cast<std::size_t>(j - 1)]);
  }
  return m;
}

double mollifier_value(std::uint64_t p, double alpha, const Ladder& L, const mf::LambdaTable& lambda,
                       const arith::PrimeTable& primes) {
  std::vector<double> blocks;
  for (int j = 1; j <= L.J; ++j) blocks.push_back(p_block(p, j, L, lambda, primes).value);
  return mollifier_value(blocks, alpha, L);
}

double m_ij(std::uint64_t d, int i, int j, const Ladder& L, const mf::LambdaTable& lambda,
            const arith::PrimeTable& primes, bool include_lambda) {
  check_block(L, i);
  check_block(L, j);
  if (i > j) throw DomainError("m_ij: requires i <= j");
  check_cover(L, i, lambda, primes);
  const double log_top = L.alpha(j) * std::log(L.X);
  const double expo = 0.5 + 1.0 / log_top;
  CompensatedSum s;
  for (std::uint32_t q : primes.range(L.block_lo(i), L.block_hi(i))) {
    const int c = chi8(d, q);
    if (c == 0) continue;
    const double lq = std::log(static_cast<double>(q));
    const double w = include_lambda ? lambda[q] : 1.0;
    s.add(c * w * std::exp(-expo * lq) * (log_top - lq) / log_top);
  }
  return s.value();
}

std::vector<std::vector<double>> m_table(std::uint64_t d, const Ladder& L, const mf::LambdaTable& lambda,
                                         const arith::PrimeTable& primes, bool include_lambda) {
  std::vector<std::vector<double>> m(static_cast<std::size_t>(L.J), std::vector<double>(static_cast<std::size_t>(L.J)));
  for (int i = 1; i <= L.J; ++i) {
    for (int l = i; l <= L.J; ++l) {
      m[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(l - 1)] =
          m_ij(d, i, l, L, lambda, primes, include_lambda);
    }
  }
  return m;
}

namespace {

bool level_fails(const std::vector<std::vector<double>>& m, const Ladder& L, int i) {
  const double bound = std::pow(L.alpha(i), -0.75);
  for (int l = i; l <= L.J; ++l) {
    if (std::fabs(m[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(l - 1)]) > bound) return true;
  }
  return false;
}

}  // namespace

int classify(const std::vector<std::vector<double>>& m, const Ladder& L) {
  for (int i = 1; i <= L.J; ++i) {
    if (level_fails(m, L, i)) return i - 1;
  }
  return L.J;
}

int classify(std::uint64_t p, const Ladder& L, const mf::LambdaTable& lambda, const arith::PrimeTable& primes,
             bool include_lambda) {
  return classify(m_table(p, L, lambda, primes, include_lambda), L);
}

bool in_set(const std::vector<std::vector<double>>& m, const Ladder& L, int j) {
  if (j < 0 || j > L.J) throw DomainError("in_set: index outside 0..J");
  if (j == L.J) {
    for (int i = 1; i <= L.J; ++i) {
      if (std::fabs(m[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(L.J - 1)]) >
          std::pow(L.alpha(i), -0.75)) {
        return false;
      }
    }
    return true;
  }
  for (int i = 1; i <= j; ++i) {
    if (level_fails(m, L, i)) return false;
  }
  return level_fails(m, L, j + 1);
}

}  // namespace twistlab::mollifier
