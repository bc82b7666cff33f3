#pragma once

// Ladder of prime ranges (X^{alpha_{j-1}}, X^{alpha_j}], truncated exponentials
// and the mollifier M(p) = (log X)^{1/2} prod_j E_{y_j}(-P_j(p)).

#include <cstdint>
#include <span>
#include <vector>

#include "twistlab/arith.hpp"
#include "twistlab/modular_form.hpp"

namespace twistlab::mollifier {

struct Ladder {
  double X = 0.0;
  double M = 0.0;
  double alpha0 = 0.0;
  std::vector<double> alphas;  // alpha_1 .. alpha_J
  std::vector<double> y;       // e^2 alpha_j^{-3/4}
  int J = 0;
  bool degenerate = false;  // no alpha_j <= 10^{-M}; a single block is used
  double prime_cap = 0.0;   // block ranges are clipped to q <= prime_cap
  bool truncated = false;   // some X^{alpha_j} exceeds prime_cap

  [[nodiscard]] double alpha(int j) const { return j == 0 ? alpha0 : alphas.at(static_cast<std::size_t>(j - 1)); }
  /// (lo, hi] for block j >= 1, with X^{alpha_0} = 2 exactly and hi clipped.
  [[nodiscard]] double block_lo(int j) const;
  [[nodiscard]] double block_hi(int j) const;
};

/// Throws DomainError for X <= e or M < 0. prime_cap <= 0 means no clipping.
Ladder build_ladder(double X, double M, double prime_cap = 0.0);

struct LadderInvariants {
  double length_sum = 0.0;    // sum_j 2 alpha_j ceil(e^2 alpha_j^{-3/4})
  double length_bound = 0.0;  // ceil(4 e^2 10^{-M/4}) + 1
  bool length_ok = false;
  bool increasing_by_20 = false;
  bool J_bound_applies = false;  // log log log X >= 1
  bool J_bound_ok = true;        // J <= log log log X when it applies
};

LadderInvariants check_ladder(const Ladder& L);

/// sum_{j=0}^{2 ceil(y)} x^j / j!, by Horner (or exp(x) when the dropped terms are below its rounding).
double truncated_exp(double y, double x) noexcept;

/// Largest exp(x) / E_y(x) over |x| <= alpha^{-3/4} (grid of `points`), y = e^2 alpha^{-3/4}.
double kirila_ratio(double alpha, int points = 2001);

struct BlockValue {
  int j = 0;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// P_j(p) = sum_{q in block j} (8p/q) lambda(q) / sqrt(q).
BlockValue p_block(std::uint64_t p, int j, const Ladder& L, const mf::LambdaTable& lambda,
                   const arith::PrimeTable& primes);

/// (log X)^{1/2} prod_j E_{y_j}(alpha * blocks[j-1]).
double mollifier_value(std::span<const double> blocks, double alpha, const Ladder& L);
double mollifier_value(std::uint64_t p, double alpha, const Ladder& L, const mf::LambdaTable& lambda,
                       const arith::PrimeTable& primes);

/// M_{i,j}(d): sum over q in block i of (8d/q) w(q) q^{-1/2 - 1/(alpha_j log X)}
/// log(X^{alpha_j}/q) / log X^{alpha_j}; w = lambda when include_lambda, else 1.
double m_ij(std::uint64_t d, int i, int j, const Ladder& L, const mf::LambdaTable& lambda,
            const arith::PrimeTable& primes, bool include_lambda = true);

/// All M_{i,l}(d), 1 <= i <= l <= J, as table[i-1][l-1] (zero below the diagonal).
std::vector<std::vector<double>> m_table(std::uint64_t d, const Ladder& L, const mf::LambdaTable& lambda,
                                         const arith::PrimeTable& primes, bool include_lambda = true);

/// Smallest level i with |M_{i,l}| > alpha_i^{-3/4} for some l >= i gives class
/// i - 1; otherwise J.
int classify(const std::vector<std::vector<double>>& m, const Ladder& L);
int classify(std::uint64_t p, const Ladder& L, const mf::LambdaTable& lambda, const arith::PrimeTable& primes,
             bool include_lambda = true);

/// The set predicates exactly as written: membership in S(j) for 0 <= j < J,
/// and in S(J) (which only constrains l = J).
bool in_set(const std::vector<std::vector<double>>& m, const Ladder& L, int j);

}  // namespace twistlab::mollifier
