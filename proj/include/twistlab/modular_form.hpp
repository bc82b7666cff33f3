#pragma once

// Coefficients of the discriminant form Delta = q prod (1 - q^n)^24 and the
// Dirichlet series built from them.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "twistlab/arith.hpp"

namespace twistlab::mf {

using int128 = __int128;

inline constexpr int kWeight = 12;
inline constexpr std::uint64_t kDefaultTauCap = 2'000'000;
inline constexpr std::uint64_t kDefaultLambdaCap = 16'000'000;

/// Exact tau(1..N). tau(0) is stored as 0 so that index = argument.
struct TauTable {
  std::uint64_t N = 0;
  std::vector<int128> tau;

  [[nodiscard]] int128 at(std::uint64_t n) const { return tau.at(n); }
};

/// lambda(n) = tau(n) / n^{11/2} for 1 <= n <= N; entry 0 is 0.
struct LambdaTable {
  std::uint64_t N = 0;
  int kappa = kWeight;
  std::vector<double> lambda;

  [[nodiscard]] double operator[](std::uint64_t n) const noexcept { return lambda[n]; }
  [[nodiscard]] bool covers(double x) const noexcept { return x <= static_cast<double>(N); }
};

struct PipelineStats {
  std::size_t transform_length = 0;
  std::size_t squarings = 0;
  std::size_t sampled_checks = 0;
};

/// tau via eta^24 = (eta^3)^8: three truncated squarings modulo each of three
/// 62-bit primes, mixed-radix CRT, and a Deligne-bound check per coefficient.
/// Throws ResourceError above `cap`, OverflowError on any bound violation.
TauTable build_tau_table(std::uint64_t N, std::uint64_t cap = kDefaultTauCap, PipelineStats* stats = nullptr);

/// Same pipeline, but the reconstruction goes straight to floating point and
/// the exact table is never materialized. Works past the 128-bit range.
LambdaTable build_lambda_table(std::uint64_t N, std::uint64_t cap = kDefaultLambdaCap,
                               PipelineStats* stats = nullptr);

LambdaTable normalize(const TauTable& t);

std::string to_string(int128 v);

/// Niebur's convolution formula, O(n) per value. Oracle for small n.
int128 niebur_tau(std::uint64_t n);

/// Residues of eta^24 coefficients (first N) modulo one transform prime;
/// exposed for testing the squaring stage in isolation.
std::vector<std::uint64_t> eta24_residues(std::uint64_t N, int prime_index, PipelineStats* stats = nullptr);

struct HeckeReport {
  double max_multiplicative_defect = 0.0;
  double max_recursion_defect = 0.0;
  double max_deligne_ratio = 0.0;  // max |lambda(n)| / d(n)
  std::size_t coprime_pairs = 0;
  std::size_t recursion_checks = 0;
  bool exact_ok = true;  // integer identities on tau, when a TauTable was given
};

/// Checks lambda(mn) = lambda(m)lambda(n) for coprime m, n with mn <= N and
/// lambda(p)lambda(p^k) = lambda(p^{k+1}) + lambda(p^{k-1}) for p^{k+1} <= N.
/// Throws IntegrityError when a defect exceeds `tolerance` or Deligne fails.
HeckeReport hecke_verify(const LambdaTable& lambda, double tolerance = 1e-9);

/// Same, plus the integer identities tau(m)tau(n) = tau(mn) and
/// tau(p)tau(p^k) = tau(p^{k+1}) + p^11 tau(p^{k-1}).
HeckeReport hecke_verify(const TauTable& tau, const LambdaTable& lambda, double tolerance = 1e-9);

/// Sum_{p <= x} lambda(p)^2 / p.
double rankin_selberg_sum(double x, const LambdaTable& lambda, const arith::PrimeTable& primes);

struct SymSquareValue {
  double value = 1.0;
  double tail_bound = 0.0;  // 9 P^{1-s}/(s-1), bounding sum_{p>P} 3 d(p^2)/p^s
};

/// prod_{p <= P} (1 - lambda(p^2) p^{-s} + lambda(p^2) p^{-2s} - p^{-3s})^{-1}, s > 1.
SymSquareValue sym_square_L(double s, double P, const LambdaTable& lambda, const arith::PrimeTable& primes);

enum class DiagonalRoute { Hecke, Table };

struct DiagonalValue {
  std::complex<double> value;
  double tail_bound = 0.0;
};

/// Sum_{m odd <= N} lambda(ell1 m^2) / m^w for squarefree odd ell1 and Re w >= 2.
/// The Hecke route rebuilds lambda(ell1 m^2) from lambda(p) by the prime-power
/// recursion; the Table route reads it directly and needs ell1 N^2 in the table.
DiagonalValue diagonal_series(std::uint64_t ell1, std::complex<double> w, std::uint64_t N, const LambdaTable& lambda,
                              DiagonalRoute route = DiagonalRoute::Hecke);

/// Precomputed multiplicative data for repeated diagonal_series calls with a
/// fixed ell1 and cutoff (the main-term contour evaluates hundreds of w).
class DiagonalSeries {
 public:
  DiagonalSeries(std::uint64_t ell1, std::uint64_t N, const LambdaTable& lambda,
                 DiagonalRoute route = DiagonalRoute::Hecke);

  [[nodiscard]] DiagonalValue operator()(std::complex<double> w) const;
  [[nodiscard]] std::uint64_t ell1() const noexcept { return ell1_; }
  [[nodiscard]] std::uint64_t cutoff() const noexcept { return N_; }

 private:
  std::uint64_t ell1_;
  std::uint64_t N_;
  std::vector<double> coeff_;    // lambda(ell1 m^2) for odd m, m = 2i+1
  std::vector<double> log_m_;
  double divisor_ell1_ = 1.0;
};

/// Upper bound for sum_{n > N} (1 + log n)^k-weighted terms:
/// int_N^inf u^{-sigma} (1 + log u)^k du, sigma > 1.
double log_power_tail_integral(double N, double sigma, int k);

}  // namespace twistlab::mf
