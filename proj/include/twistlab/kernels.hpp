#pragma once

// Smooth weights and Mellin-Barnes kernels: the bump Phi and its Mellin
// transform, complex log-gamma, the AFE weight V(t) and the first-moment
// main-term integral.

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include "twistlab/modular_form.hpp"

namespace twistlab::kernels {

/// Phi = 1 on [1, 2], 0 outside [1/2, 5/2], glued by g(u) = G(u)/(G(u)+G(1-u)),
/// G(u) = exp(-1/u).
double phi(double x) noexcept;

struct PhiHatResult {
  std::complex<double> value;
  double error_estimate = 0.0;  // change under the last panel doubling
  int panels = 0;
};

/// int_0^inf Phi(x) x^{s-1} dx. The plateau is integrated in closed form, the
/// two glue pieces by composite Gauss-Legendre with panel doubling.
PhiHatResult phi_hat_detailed(std::complex<double> s, double tolerance = 1e-13);
std::complex<double> phi_hat(std::complex<double> s);

/// Principal-branch log Gamma (the branch continuous in z off the negative
/// axis). Throws DomainError at the poles.
std::complex<long double> log_gamma(std::complex<long double> z);
std::complex<double> log_gamma(std::complex<double> z);

struct ContourQuadrature {
  double abscissa = 1.0;
  double step = 0.05;
  double height = 60.0;
  double error_estimate = 0.0;  // max change under (h, T) -> (h/2, 2T)
  int refinements = 0;
};

struct KernelConfig {
  int kappa = 12;
  /// c in c^{-s} Gamma(kappa/2 + s)/Gamma(kappa/2). pi/4 makes the AFE for
  /// conductor 8d self-dual; pi/8 is available for comparison.
  double scale = std::numbers::pi / 4.0;
  double abscissa = 1.0;
  double step = 0.05;
  double height = 60.0;
  double doubling_tolerance = 1e-10;
  int max_refinements = 4;
  std::size_t grid_points = 8192;
  double grid_lo = 1e-6;
  double grid_hi = 1e3;
  double small_t = 1e-3;  // below: residue series
  double large_t = 1e3;   // above: 0, covered by the decay bound
};

/// Trapezoid rule for (1/2 pi) int G(sigma + iy) t^{-sigma-iy} dy with
/// G(s) = c^{-s} Gamma(k+s) / (Gamma(k) s), nodes precomputed.
class ContourRule {
 public:
  ContourRule(const KernelConfig& cfg, double abscissa, double step, double height);
  [[nodiscard]] long double operator()(double t) const;

 private:
  double sigma_;
  double step_;
  std::vector<std::complex<long double>> g_;  // G at y_k = k h, k >= 0
  std::vector<long double> y_;
};

/// V(t) by contour quadrature only; builds its own rule (slow, no cache).
double v_kernel_contour(double t, const KernelConfig& cfg);

/// Closed form available when kappa/2 is an integer k: V(t) = Q(k, ct) =
/// e^{-ct} sum_{j<k} (ct)^j / j!.
double v_kernel_closed_form(double t, const KernelConfig& cfg = {});

class VKernel {
 public:
  explicit VKernel(KernelConfig cfg = {});

  /// Production path: residue series for t < small_t, 0 above large_t, cubic
  /// interpolation on the log-spaced grid in between.
  [[nodiscard]] double operator()(double t) const;

  /// Same, from log t (the hot loop keeps log n tables).
  [[nodiscard]] double at_log(double log_t) const noexcept {
    if (log_t >= log_hi_cut_) return 0.0;
    if (log_t < log_lo_cut_) return residue_series(std::exp(log_t));
    const double u = (log_t - log_lo_) * inv_dlog_;
    auto i = static_cast<std::ptrdiff_t>(u);
    if (i < 1) i = 1;
    if (i > static_cast<std::ptrdiff_t>(grid_.size()) - 3) i = static_cast<std::ptrdiff_t>(grid_.size()) - 3;
    const double f = u - static_cast<double>(i);
    const double* y = grid_.data() + i;
    const double wm = -f * (f - 1.0) * (f - 2.0) / 6.0;
    const double w0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
    const double w1 = -(f + 1.0) * f * (f - 2.0) / 2.0;
    const double w2 = (f + 1.0) * f * (f - 1.0) / 6.0;
    return wm * y[-1] + w0 * y[0] + w1 * y[1] + w2 * y[2];
  }

  /// Contour quadrature with the certified rule, bypassing the grid.
  [[nodiscard]] double direct(double t) const;

  /// 1 - sum_j (-1)^j (ct)^{k+j} / (Gamma(k) j! (k+j)).
  [[nodiscard]] double residue_series(double t) const noexcept;

  /// K_E with |V(t)| <= K_E t^{-E} for all t > 0 (contour moved to Re s = E).
  [[nodiscard]] double decay_constant(double E) const;

  /// min over the tabulated E of K_E t^{-E}.
  [[nodiscard]] double decay_bound(double t) const;

  /// Bound for 2 sum_{n > N} d(n) n^{-1/2} |V(n/d)|, minimized over E.
  [[nodiscard]] double afe_tail_bound(double N, double d) const;

  [[nodiscard]] const KernelConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const ContourQuadrature& quadrature() const noexcept { return quad_; }

  /// Largest |interpolated - direct| over all grid-interval midpoints in the
  /// interpolated range, plus the quadrature error estimate.
  [[nodiscard]] double pointwise_error() const noexcept { return interp_error_ + quad_.error_estimate; }
  [[nodiscard]] double interpolation_error() const noexcept { return interp_error_; }

 private:
  KernelConfig cfg_;
  ContourQuadrature quad_;
  std::vector<double> grid_;
  double log_lo_ = 0.0;
  double inv_dlog_ = 0.0;
  double log_lo_cut_ = 0.0;
  double log_hi_cut_ = 0.0;
  double interp_error_ = 0.0;
  int k_ = 6;
  double gamma_k_ = 120.0;
  std::vector<double> decay_E_;
  std::vector<double> decay_K_;
  std::shared_ptr<const ContourRule> rule_;
};

struct FirstMomentPrediction {
  double value = 0.0;
  double quadrature_error = 0.0;  // change under (h, T) -> (h/2, 2T)
  double truncation_error = 0.0;  // change when the diagonal cutoff doubles
  double truncation_bound = 0.0;  // rigorous, from the divisor-bound tail (pessimistic)
  std::uint64_t ell1 = 1;
  std::uint64_t diagonal_cutoff = 0;
};

struct FirstMomentOptions {
  double abscissa = 0.5;
  double step = 0.05;
  double height = 60.0;
  double relative_tolerance = 1e-9;
  int max_refinements = 3;
  std::uint64_t diagonal_cutoff = 10'000;
};

/// (2X/sqrt(l1)) (1/2 pi) int_{Re s = a} Phi^(1+s) c^{-s} Gamma(k+s)/Gamma(k)
/// (X/l1)^s D(l1, 1+2s) ds/s with D the odd-m diagonal series. Throws
/// AccuracyError when refinement does not settle.
FirstMomentPrediction predicted_first_moment(std::uint64_t ell, double X, const mf::LambdaTable& lambda,
                                             const KernelConfig& kernel = {}, const FirstMomentOptions& opt = {});

/// Same, over several X with one diagonal-series setup.
std::vector<FirstMomentPrediction> predicted_first_moment(std::uint64_t ell, const std::vector<double>& Xs,
                                                          const mf::LambdaTable& lambda,
                                                          const KernelConfig& kernel = {},
                                                          const FirstMomentOptions& opt = {});

}  // namespace twistlab::kernels
