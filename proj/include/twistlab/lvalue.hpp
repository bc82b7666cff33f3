#pragma once

// Central values L(1/2, Delta x chi_{8d}) from the approximate functional
// equation 2 sum_n lambda(n) chi_{8d}(n) n^{-1/2} V(n/d).

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "twistlab/arith.hpp"
#include "twistlab/kernels.hpp"
#include "twistlab/modular_form.hpp"

namespace twistlab::lvalue {

/// n -> (8d/n) for odd squarefree d > 0. For odd n this is
/// (2/n) (-1)^{(d-1)/2 (n-1)/2} (n/d), so one table of size d and one of
/// size 8 answer every query.
class QuadraticCharacter {
 public:
  explicit QuadraticCharacter(std::uint64_t d);

  [[nodiscard]] int operator()(std::uint64_t n) const noexcept {
    if ((n & 1) == 0) return 0;
    return sign8_[n & 7] * jacobi_[n % d_];
  }
  [[nodiscard]] std::uint64_t modulus() const noexcept { return d_; }
  [[nodiscard]] int sign8(std::uint64_t n) const noexcept { return sign8_[n & 7]; }
  [[nodiscard]] int jacobi(std::uint64_t r) const noexcept { return jacobi_[r]; }

 private:
  std::uint64_t d_;
  std::vector<signed char> jacobi_;
  int sign8_[8];
};

struct CentralValue {
  std::uint64_t d = 0;
  double value = 0.0;
  std::uint64_t cutoff = 0;
  double tail_bound = 0.0;
  double kernel_error = 0.0;
};

/// V tabulated on a uniform grid in t as cubic pieces (power basis in the
/// local coordinate), so the AFE loop needs one multiply and three FMAs per
/// term. Node values come from VKernel; `error()` is the largest midpoint
/// deviation from VKernel plus VKernel's own pointwise error.
class UniformKernelTable {
 public:
  UniformKernelTable(const kernels::VKernel& V, double t_max, int per_unit = 64);

  [[nodiscard]] double at_scaled(double u) const noexcept {
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    const Piece& c = pieces_[i];
    return c.c0 + f * (c.c1 + f * (c.c2 + f * c.c3));
  }
  [[nodiscard]] double operator()(double t) const noexcept { return at_scaled(t * per_unit_); }
  [[nodiscard]] double per_unit() const noexcept { return per_unit_; }
  [[nodiscard]] double t_max() const noexcept { return t_max_; }
  [[nodiscard]] double error() const noexcept { return error_; }

 private:
  struct Piece {
    double c0, c1, c2, c3;
  };
  double per_unit_;
  double t_max_;
  double error_ = 0.0;
  std::vector<Piece> pieces_;
};

/// Holds lambda(n)/sqrt(n) up to the largest cutoff and the tabulated kernel so
/// repeated central values share the work.
class AfeEngine {
 public:
  AfeEngine(const mf::LambdaTable& lambda, const kernels::VKernel& V, double A, std::uint64_t max_d);

  /// Throws DomainError for even / non-squarefree d, CoverageError when
  /// A d exceeds the tables.
  [[nodiscard]] CentralValue operator()(std::uint64_t d) const;

  [[nodiscard]] double A() const noexcept { return A_; }
  [[nodiscard]] std::uint64_t max_d() const noexcept { return max_d_; }
  [[nodiscard]] const kernels::VKernel& kernel() const noexcept { return V_; }
  [[nodiscard]] const UniformKernelTable& kernel_table() const noexcept { return table_; }

 private:
  const kernels::VKernel& V_;
  double A_;
  std::uint64_t max_d_;
  std::uint64_t limit_;
  std::vector<double> a_;          // lambda(n)/sqrt(n)
  std::vector<double> abs_odd_;    // sum of |a| over odd m <= n
  UniformKernelTable table_;
};

/// One-shot convenience wrapper around AfeEngine.
CentralValue central_value(std::uint64_t d, const mf::LambdaTable& lambda, const kernels::VKernel& V, double A = 50.0);

struct BatchMetadata {
  double A = 0.0;
  std::string cutoff_policy;
  kernels::KernelConfig kernel;
  kernels::ContourQuadrature quadrature;
  double kernel_pointwise_error = 0.0;
  std::string table_hash;
  std::uint64_t table_size = 0;
  std::size_t chunk_size = 0;
  unsigned workers = 0;
};

struct BatchResult {
  std::vector<CentralValue> records;
  BatchMetadata metadata;
};

inline constexpr std::size_t kChunkSize = 1024;

/// Runs `work(i)` for i in [0, n) in fixed chunks of kChunkSize on `workers`
/// threads. Each index is written by exactly one worker; the first exception
/// in index order is rethrown after all workers stop.
void parallel_for_chunks(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& work);

BatchResult batch_central_values(std::span<const std::uint64_t> moduli, const AfeEngine& engine, unsigned workers,
                                 const std::string& table_hash = {});

struct EulerCheck {
  double series = 0.0;
  double product = 1.0;
  double gap = 0.0;
  double series_tail = 0.0;   // bound for sum_{n > N} d(n) n^{-s}
  double product_tail = 0.0;  // |product| * sum_{n > P} d(n) n^{-s}
  bool within_bounds = true;
};

/// sum_{n <= max(N,1)} lambda(n) chi_{8d}(n) n^{-s} against
/// prod_{p <= P, p not dividing 2d} (1 - lambda(p) chi(p) p^{-s} + p^{-2s})^{-1}, s >= 2.
EulerCheck dirichlet_vs_euler_check(std::uint64_t d, double s, std::uint64_t N, std::uint64_t P,
                                    const mf::LambdaTable& lambda, const arith::PrimeTable& primes);

std::string to_csv(const BatchResult& r);
std::string to_json(const BatchResult& r);

}  // namespace twistlab::lvalue
