#pragma once

// Experiment drivers behind the twistlab CLI. Each run_* returns a Report
// that embeds its full configuration and the coefficient-table provenance.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "twistlab/arith.hpp"
#include "twistlab/kernels.hpp"
#include "twistlab/lvalue.hpp"
#include "twistlab/modular_form.hpp"
#include "twistlab/report.hpp"

namespace twistlab::experiments {

struct ExperimentConfig {
  double X = 1e4;
  double M = 0.0;
  double A = 50.0;
  unsigned threads = 1;
  std::string format = "csv";
  std::string cache_dir;  // empty: build tables in memory
  bool large = false;     // extend sweeps by one or two doublings
  std::vector<std::uint64_t> ells{1, 3, 5, 9};
  std::vector<std::uint64_t> cs{1, 3, 9, 15};
  std::vector<int> ks{0, 1, 2};
  double x_exponent = 0.2;
  // |L| > max(threshold_floor, threshold_multiplier * (tail + kernel error))
  // counts as non-vanishing; anything smaller is undecided.
  double threshold_floor = 1e-8;
  double threshold_multiplier = 10.0;
};

report::json to_json(const ExperimentConfig& cfg);

/// The positive root of e^{-x} = x + x^2/2 (bisection to machine precision).
double lambda0();

struct PowerFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;  // NaN with fewer than three points
  std::size_t points = 0;
};

/// Least squares for log|y| = intercept + exponent log x. Points with y = 0
/// are skipped.
PowerFit fit_power_law(std::span<const double> x, std::span<const double> y);

/// Sum of 1/p over lo < p <= hi, exact up to the table limit and continued by
/// log log hi - log log limit beyond it.
struct ReciprocalSum {
  double value = 0.0;
  bool extrapolated = false;
};
ReciprocalSum prime_reciprocal_range(double lo, double hi, const arith::PrimeTable& primes);

/// Shared state: coefficient table, primes, kernel and a memo of central
/// values (a central value depends only on d and A, so the memo survives
/// table growth).
class Workspace {
 public:
  explicit Workspace(ExperimentConfig cfg);

  [[nodiscard]] const ExperimentConfig& config() const noexcept { return cfg_; }

  /// New run parameters over the same tables. Central values survive unless A changes.
  void reconfigure(ExperimentConfig cfg);

  /// Grows the lambda table (and the AFE engine) to cover A * max_d.
  void ensure_moduli(double max_d);
  /// Grows the lambda table to at least N entries.
  void ensure_lambda(std::uint64_t N);
  /// Grows the prime table to at least `limit`.
  void ensure_primes(double limit);

  [[nodiscard]] const mf::LambdaTable& lambda() const;
  [[nodiscard]] const arith::PrimeTable& primes() const noexcept { return primes_; }
  [[nodiscard]] const kernels::VKernel& kernel();
  [[nodiscard]] const std::string& table_hash();

  /// Central values in the order of `moduli`; missing ones are computed in
  /// parallel batches.
  std::vector<lvalue::CentralValue> central_values(std::span<const std::uint64_t> moduli);

  /// Odd primes 2 < p <= x.
  [[nodiscard]] std::vector<std::uint64_t> odd_primes_up_to(double x);

  [[nodiscard]] double threshold(const lvalue::CentralValue& v) const noexcept;

  report::json provenance();

 private:
  ExperimentConfig cfg_;
  mf::LambdaTable lambda_;
  arith::PrimeTable primes_;
  std::unique_ptr<kernels::VKernel> V_;
  std::unique_ptr<lvalue::AfeEngine> engine_;
  std::string hash_;
  std::map<std::uint64_t, lvalue::CentralValue> memo_;
};

/// Rows per odd prime p <= X with the non-vanishing verdict; summary carries
/// theta over odd primes, the non-vanishing log-sum, undecided count and ratio.
report::Report run_census(Workspace& ws);

/// S(l, X) = sum over odd p of log p L(1/2, p) (8p/l) Phi(p/X) against the
/// contour prediction, over X, 2X, 4X (8X with --large).
report::Report run_first_moment(Workspace& ws);

/// sum over odd p of log p (8p/c) Phi(p/X) minus [c square] Phi^(1) X.
report::Report run_char_sum(Workspace& ws);

/// Slack of the log|L| upper bound with x = X^{x_exponent} over X and 2X.
report::Report run_upper_bound(Workspace& ws);

/// Mollified first and second moments and the Cauchy-Schwarz lower bound.
report::Report run_mollified_moments(Workspace& ws);

/// sum over odd squarefree d < X of |L|^{2k} / (X (log X)^{2k^2-k}).
report::Report run_moment_growth(Workspace& ws);

/// Mertens, Rankin-Selberg, log-power and twisted prime sums.
report::Report run_prime_sum_checks(Workspace& ws);

/// Ladder table, invariants and the displayed prime-reciprocal sums.
report::Report run_ladder_report(Workspace& ws);

/// Builds (or loads) the lambda table for the configured X and reports it.
report::Report run_build_cache(Workspace& ws);

}  // namespace twistlab::experiments
