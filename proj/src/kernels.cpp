#include "twistlab/kernels.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>

#include "twistlab/arith.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/summation.hpp"

namespace twistlab::kernels {

namespace {

using cld = std::complex<long double>;
using cd = std::complex<double>;

constexpr long double kPiL = 3.141592653589793238462643383279502884L;
constexpr double kLog2 = std::numbers::ln2;

// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
  static constexpr int kOrder = 20;
  std::array<double, kOrder> x{};
  std::array<double, kOrder> w{};

  GaussLegendre() {
    for (int i = 0; i < kOrder; ++i) {
      long double z = std::cos(kPiL * (i + 0.75L) / (kOrder + 0.5L));
      long double dp = 0.0L;
      for (int it = 0; it < 100; ++it) {
        long double p0 = 1.0L, p1 = z;
        for (int k = 2; k <= kOrder; ++k) {
          const long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kOrder * (z * p1 - p0) / (z * z - 1.0L);
        const long double dz = p1 / dp;
        z -= dz;
        if (std::fabs(dz) < 1e-19L) break;
      }
      x[static_cast<std::size_t>(i)] = static_cast<double>(z);
      w[static_cast<std::size_t>(i)] = static_cast<double>(2.0L / ((1.0L - z * z) * dp * dp));
    }
  }
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre rule;
  return rule;
}

double glue(double u) noexcept {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// int_a^b Phi(x) x^{s-1} dx over `panels` equal panels.
cd glue_integral(cd s, double a, double b, int panels) {
  const auto& gl = gauss_legendre();
  const double width = (b - a) / panels;
  CompensatedSum re, im;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    for (int i = 0; i < GaussLegendre::kOrder; ++i) {
      const double x = mid + 0.5 * width * gl.x[static_cast<std::size_t>(i)];
      const cd v = phi(x) * std::exp((s - 1.0) * std::log(x)) * (0.5 * width * gl.w[static_cast<std::size_t>(i)]);
      re.add(v.real());
      im.add(v.imag());
    }
  }
  return {re.value(), im.value()};
}

cd plateau(cd s) {
  const cd z = s * kLog2;
  if (std::abs(z) < 1e-3) {
    // (e^z - 1)/s = log 2 * (1 + z/2 + z^2/6 + ...)
    cd term = 1.0, sum = 1.0;
    for (int j = 1; j < 8; ++j) {
      term *= z / static_cast<double>(j + 1);
      sum += term;
    }
    return kLog2 * sum;
  }
  return (std::exp(z) - 1.0) / s;
}

// Bernoulli numbers B_2 .. B_20 for the Stirling tail.
constexpr std::array<long double, 10> kBernoulli = {
    1.0L / 6,   -1.0L / 30,     1.0L / 42,  -1.0L / 30,      5.0L / 66,
    -691.0L / 2730, 7.0L / 6, -3617.0L / 510, 43867.0L / 798, -174611.0L / 330};

cld stirling(cld z) {
  const long double half_log_2pi = 0.918938533204672741780329736405617639L;
  cld sum = (z - 0.5L) * std::log(z) - z + half_log_2pi;
  const cld z2 = z * z;
  cld zp = z;
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    const auto kk = static_cast<long double>(k);
    sum += kBernoulli[k - 1] / ((2 * kk) * (2 * kk - 1) * zp);
    zp *= z2;
  }
  return sum;
}

}  // namespace

double phi(double x) noexcept {
  if (x <= 0.5 || x >= 2.5) return 0.0;
  if (x >= 1.0 && x <= 2.0) return 1.0;
  if (x < 1.0) return glue(2.0 * (x - 0.5));
  return glue(2.0 * (2.5 - x));
}

PhiHatResult phi_hat_detailed(cd s, double tolerance) {
  constexpr int kMaxPanels = 1 << 13;
  int panels = 4;
  cd prev = glue_integral(s, 0.5, 1.0, panels) + glue_integral(s, 2.0, 2.5, panels);
  PhiHatResult out;
  for (;;) {
    panels *= 2;
    const cd cur = glue_integral(s, 0.5, 1.0, panels) + glue_integral(s, 2.0, 2.5, panels);
    out.error_estimate = std::abs(cur - prev);
    prev = cur;
    if (out.error_estimate <= tolerance || panels >= kMaxPanels) break;
  }
  out.value = plateau(s) + prev;
  out.panels = panels;
  return out;
}

cd phi_hat(cd s) { return phi_hat_detailed(s).value; }

cld log_gamma(cld z) {
  const long double re = z.real();
  if (z.imag() == 0.0L && re <= 0.0L && re == std::floor(re)) {
    throw DomainError("log_gamma: pole at z = " + std::to_string(static_cast<double>(re)));
  }
  if (re < 0.5L) {
    // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
    return std::log(cld(kPiL)) - std::log(std::sin(kPiL * z)) - log_gamma(1.0L - z);
  }
  cld shift = 0.0L;
  while (z.real() < 20.0L) {
    shift += std::log(z);
    z += 1.0L;
  }
  return stirling(z) - shift;
}

cd log_gamma(cd z) {
  const cld r = log_gamma(cld(z.real(), z.imag()));
  return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
}

ContourRule::ContourRule(const KernelConfig& cfg, double abscissa, double step, double height)
    : sigma_(abscissa), step_(step) {
  if (cfg.kappa <= 0 || cfg.kappa % 2 != 0) throw DomainError("ContourRule: kappa must be a positive even integer");
  if (!(abscissa > 0.0) || !(step > 0.0) || !(height > step)) {
    throw DomainError("ContourRule: need abscissa > 0 and 0 < step < height");
  }
  const long double k = cfg.kappa / 2;
  const cld lgk = log_gamma(cld(k));
  const long double log_c = std::log(static_cast<long double>(cfg.scale));
  const auto nodes = static_cast<std::size_t>(std::llround(height / step));
  g_.resize(nodes + 1);
  y_.resize(nodes + 1);
  for (std::size_t j = 0; j <= nodes; ++j) {
    const long double y = static_cast<long double>(j) * step;
    const cld s(abscissa, y);
    y_[j] = y;
    g_[j] = std::exp(-s * log_c + log_gamma(k + s) - lgk) / s;
  }
}

long double ContourRule::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("v_kernel: t must be positive");
  const long double lt = std::log(static_cast<long double>(t));
  long double sum = 0.5L * g_[0].real();
  for (std::size_t j = 1; j < g_.size(); ++j) {
    const long double ph = y_[j] * lt;
    sum += g_[j].real() * std::cos(ph) + g_[j].imag() * std::sin(ph);
  }
  return std::exp(-sigma_ * lt) * sum * step_ / kPiL;
}

double v_kernel_contour(double t, const KernelConfig& cfg) {
  const ContourRule rule(cfg, cfg.abscissa, cfg.step, cfg.height);
  return static_cast<double>(rule(t));
}

double v_kernel_closed_form(double t, const KernelConfig& cfg) {
  if (!(t > 0.0)) throw DomainError("v_kernel: t must be positive");
  const int k = cfg.kappa / 2;
  const long double u = static_cast<long double>(cfg.scale) * t;
  long double term = 1.0L, sum = 1.0L;
  for (int j = 1; j < k; ++j) {
    term *= u / j;
    sum += term;
  }
  return static_cast<double>(std::exp(-u) * sum);
}

VKernel::VKernel(KernelConfig cfg) : cfg_(cfg) {
  if (cfg_.kappa <= 0 || cfg_.kappa % 2 != 0) throw DomainError("VKernel: kappa must be a positive even integer");
  if (cfg_.grid_points < 8) throw DomainError("VKernel: grid needs at least 8 points");
  if (!(cfg_.grid_lo < cfg_.small_t && cfg_.small_t < cfg_.large_t && cfg_.large_t <= cfg_.grid_hi)) {
    throw DomainError("VKernel: need grid_lo < small_t < large_t <= grid_hi");
  }
  k_ = cfg_.kappa / 2;
  gamma_k_ = std::tgamma(static_cast<double>(k_));

  // Certify (h, T) by comparison with (h/2, 2T) on a spread of t.
  std::vector<double> probes;
  for (int j = 0; j <= 24; ++j) probes.push_back(std::pow(10.0, -3.0 + 6.0 * j / 24.0));
  double h = cfg_.step, T = cfg_.height;
  auto coarse = std::make_shared<const ContourRule>(cfg_, cfg_.abscissa, h, T);
  for (int r = 0;; ++r) {
    const ContourRule fine(cfg_, cfg_.abscissa, h / 2, 2 * T);
    double diff = 0.0;
    for (double t : probes) diff = std::max(diff, static_cast<double>(std::fabs((*coarse)(t) - fine(t))));
    if (diff <= cfg_.doubling_tolerance) {
      quad_ = {cfg_.abscissa, h, T, diff, r};
      break;
    }
    if (r + 1 > cfg_.max_refinements) {
      throw AccuracyError("VKernel: contour doubling test failed (change " + std::to_string(diff) + ")");
    }
    h /= 2;
    T *= 2;
    coarse = std::make_shared<const ContourRule>(cfg_, cfg_.abscissa, h, T);
  }
  rule_ = coarse;

  const std::size_t M = cfg_.grid_points;
  log_lo_ = std::log(cfg_.grid_lo);
  const double dlog = (std::log(cfg_.grid_hi) - log_lo_) / static_cast<double>(M - 1);
  inv_dlog_ = 1.0 / dlog;
  log_lo_cut_ = std::log(cfg_.small_t);
  log_hi_cut_ = std::log(cfg_.large_t);
  grid_.resize(M);
  for (std::size_t i = 0; i < M; ++i) grid_[i] = static_cast<double>((*rule_)(std::exp(log_lo_ + dlog * i)));

  // Interpolation error at every interval midpoint that the production path uses.
  const auto first = static_cast<std::size_t>(std::max(0.0, std::floor((log_lo_cut_ - log_lo_) * inv_dlog_)));
  const auto last = static_cast<std::size_t>(std::ceil((log_hi_cut_ - log_lo_) * inv_dlog_));
  for (std::size_t i = first; i < std::min(last, M - 1); ++i) {
    const double lt = log_lo_ + dlog * (static_cast<double>(i) + 0.5);
    if (lt < log_lo_cut_ || lt >= log_hi_cut_) continue;
    const double err = std::fabs(at_log(lt) - static_cast<double>((*rule_)(std::exp(lt))));
    interp_error_ = std::max(interp_error_, err);
  }

  // K_E = (1/pi) int_0^inf c^{-E} |Gamma(k+E+iy)| / (Gamma(k) |E+iy|) dy.
  const long double lgk = log_gamma(cld(static_cast<long double>(k_))).real();
  const long double log_c = std::log(static_cast<long double>(cfg_.scale));
  for (double E = 0.5; E <= 80.0; E += 0.5) {
    const long double hy = 0.02L;
    const long double ymax = 4.0L * (k_ + E) + 100.0L;
    long double sum = 0.0L;
    for (long double y = 0.0L; y <= ymax; y += hy) {
      const long double lg = log_gamma(cld(k_ + E, y)).real();
      const long double f = std::exp(-E * log_c + lg - lgk) / std::hypot(static_cast<long double>(E), y);
      sum += (y == 0.0L ? 0.5L : 1.0L) * f;
    }
    decay_E_.push_back(E);
    decay_K_.push_back(static_cast<double>(sum * hy / kPiL));
  }
}

double VKernel::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("v_kernel: t must be positive");
  return at_log(std::log(t));
}

double VKernel::direct(double t) const { return static_cast<double>((*rule_)(t)); }

double VKernel::residue_series(double t) const noexcept {
  const long double u = static_cast<long double>(cfg_.scale) * t;
  long double up = std::pow(u, static_cast<long double>(k_));  // u^{k+j}
  long double fact = 1.0L;                                      // j!
  long double sum = 0.0L;
  for (int j = 0; j < 60; ++j) {
    if (j > 0) {
      up *= u;
      fact *= j;
    }
    const long double term = up / (fact * (k_ + j));
    sum += (j & 1) ? -term : term;
    if (term < 1e-22L * std::max(1e-300L, std::fabs(sum))) break;
  }
  return static_cast<double>(1.0L - sum / gamma_k_);
}

double VKernel::decay_constant(double E) const {
  for (std::size_t i = 0; i < decay_E_.size(); ++i) {
    if (decay_E_[i] == E) return decay_K_[i];
  }
  throw DomainError("VKernel::decay_constant: E must be a multiple of 1/2 in [1/2, 80]");
}

double VKernel::decay_bound(double t) const {
  if (!(t > 0.0)) throw DomainError("v_kernel: t must be positive");
  double best = std::numeric_limits<double>::infinity();
  const double lt = std::log(t);
  for (std::size_t i = 0; i < decay_E_.size(); ++i) {
    best = std::min(best, std::log(decay_K_[i]) - decay_E_[i] * lt);
  }
  return std::exp(best);
}

double VKernel::afe_tail_bound(double N, double d) const {
  if (!(N >= 1.0) || !(d > 0.0)) throw DomainError("afe_tail_bound: need N >= 1, d > 0");
  // sum_{n>N} d(n) n^{-a} <= a int_N^inf u^{-a}(1 + log u) du, a = 1/2 + E > 1.
  const double L = 1.0 + std::log(N);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < decay_E_.size(); ++i) {
    const double E = decay_E_[i];
    const double a = 0.5 + E;
    if (a <= 1.0) continue;
    const double log_sum = std::log(a) + (1.0 - a) * std::log(N) + std::log(L / (a - 1.0) + 1.0 / ((a - 1.0) * (a - 1.0)));
    best = std::min(best, std::log(2.0 * decay_K_[i]) + E * std::log(d) + log_sum);
  }
  return std::exp(best);
}

namespace {

std::vector<FirstMomentPrediction> first_moment_at_cutoff(std::uint64_t ell, const std::vector<double>& Xs,
                                                          const mf::LambdaTable& lambda, const KernelConfig& kernel,
                                                          const FirstMomentOptions& opt, std::uint64_t cutoff) {
  const auto split = arith::squarefree_split(ell);
  const mf::DiagonalSeries D(split.ell1, cutoff, lambda);
  const long double k = kernel.kappa / 2;
  const cld lgk = log_gamma(cld(k));
  const long double log_c = std::log(static_cast<long double>(kernel.scale));
  const long double l1 = static_cast<long double>(split.ell1);

  struct Node {
    cld base;          // everything except (X/l1)^s
    long double size;  // |base| / |D| (for the truncation bound)
    long double y;
  };
  double diag_tail = 0.0;
  const auto build = [&](double h, double T) {
    std::vector<Node> nodes;
    const auto count = static_cast<std::size_t>(std::llround(T / h));
    for (std::size_t j = 0; j <= count; ++j) {
      const long double y = static_cast<long double>(j) * h;
      const cld s(opt.abscissa, y);
      const cd ph = phi_hat(cd(1.0 + opt.abscissa, static_cast<double>(y)));
      const auto dv = D(cd(1.0 + 2.0 * opt.abscissa, 2.0 * static_cast<double>(y)));
      diag_tail = dv.tail_bound;
      const cld common = cld(ph.real(), ph.imag()) * std::exp(-s * log_c + log_gamma(k + s) - lgk) / s;
      nodes.push_back({common * cld(dv.value.real(), dv.value.imag()), std::abs(common), y});
    }
    return nodes;
  };
  const auto integrate = [&](const std::vector<Node>& nodes, double h, double X, long double* abs_sum) {
    const long double lx = std::log(static_cast<long double>(X) / l1);
    long double sum = 0.0L, asum = 0.0L;
    for (const auto& n : nodes) {
      const cld v = n.base * std::exp(cld(opt.abscissa, n.y) * lx);
      const long double w = n.y == 0.0L ? 0.5L : 1.0L;
      sum += w * v.real();
      asum += w * n.size * std::exp(opt.abscissa * lx);
    }
    const long double pref = 2.0L * X / std::sqrt(l1) * h / kPiL;
    if (abs_sum) *abs_sum = pref * asum;
    return static_cast<double>(pref * sum);
  };

  std::vector<FirstMomentPrediction> out(Xs.size());
  double h = opt.step, T = opt.height;
  auto coarse = build(h, T);
  for (int r = 0;; ++r) {
    const auto fine = build(h / 2, 2 * T);
    bool ok = true;
    for (std::size_t i = 0; i < Xs.size(); ++i) {
      long double abs_int = 0.0L;
      const double a = integrate(coarse, h, Xs[i], &abs_int);
      const double b = integrate(fine, h / 2, Xs[i], nullptr);
      out[i].value = a;
      out[i].quadrature_error = std::fabs(a - b);
      // |D - D_N| <= tail on Re w = 1 + 2a, uniformly in Im w.
      out[i].truncation_bound = static_cast<double>(abs_int) * diag_tail;
      out[i].ell1 = split.ell1;
      out[i].diagonal_cutoff = cutoff;
      if (out[i].quadrature_error > opt.relative_tolerance * std::max(std::fabs(b), 1e-300)) ok = false;
    }
    if (ok) break;
    if (r + 1 > opt.max_refinements) throw AccuracyError("predicted_first_moment: contour doubling test failed");
    h /= 2;
    T *= 2;
    coarse = fine;
  }
  return out;
}


}  // namespace

std::vector<FirstMomentPrediction> predicted_first_moment(std::uint64_t ell, const std::vector<double>& Xs,
                                                          const mf::LambdaTable& lambda, const KernelConfig& kernel,
                                                          const FirstMomentOptions& opt) {
  if (ell == 0 || (ell & 1) == 0) throw DomainError("predicted_first_moment: ell must be odd and positive");
  if (opt.abscissa < 0.5) throw DomainError("predicted_first_moment: abscissa must be >= 1/2 (Re w >= 2)");
  for (double X : Xs) {
    if (!(X > 0.0)) throw DomainError("predicted_first_moment: X must be positive");
  }
  auto out = first_moment_at_cutoff(ell, Xs, lambda, kernel, opt, opt.diagonal_cutoff);
  const auto doubled = first_moment_at_cutoff(ell, Xs, lambda, kernel, opt, 2 * opt.diagonal_cutoff);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].truncation_error = std::fabs(doubled[i].value - out[i].value);
  return out;
}

FirstMomentPrediction predicted_first_moment(std::uint64_t ell, double X, const mf::LambdaTable& lambda,
                                             const KernelConfig& kernel, const FirstMomentOptions& opt) {
  return predicted_first_moment(ell, std::vector<double>{X}, lambda, kernel, opt).front();
}

}  // namespace twistlab::kernels
