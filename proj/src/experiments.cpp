#include "twistlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "twistlab/coeff_cache.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/mollifier.hpp"
#include "twistlab/summation.hpp"

namespace twistlab::experiments {

using report::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> doublings(double X, int count) {
  std::vector<double> xs;
  for (int i = 0; i < count; ++i) xs.push_back(X * std::ldexp(1.0, i));
  return xs;
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double odd_theta(double x, const arith::PrimeTable& primes) {
  return x >= 2.0 ? arith::chebyshev_theta(x, primes) - std::log(2.0) : 0.0;
}

int chi8(std::uint64_t p, std::uint64_t n) {
  return arith::kronecker(8 * static_cast<std::int64_t>(p), static_cast<std::int64_t>(n));
}

void check_odd(const std::vector<std::uint64_t>& v, const char* what) {
  if (v.empty()) throw DomainError(std::string(what) + " list is empty");
  for (auto x : v) {
    if (x == 0 || (x & 1) == 0) throw DomainError(std::string(what) + " values must be odd and positive");
  }
}

report::Report start(Workspace& ws, const std::string& name) {
  report::Report r;
  r.name = name;
  r.config = to_json(ws.config());
  return r;
}

void finish(Workspace& ws, report::Report& r) { r.provenance = ws.provenance(); }

}  // namespace

report::json to_json(const ExperimentConfig& cfg) {
  json j;
  j["X"] = cfg.X;
  j["M"] = cfg.M;
  j["A"] = cfg.A;
  j["threads"] = cfg.threads;
  j["format"] = cfg.format;
  j["cache_dir"] = cfg.cache_dir;
  j["large"] = cfg.large;
  j["ell"] = cfg.ells;
  j["c"] = cfg.cs;
  j["k"] = cfg.ks;
  j["x_exponent"] = cfg.x_exponent;
  j["threshold_floor"] = cfg.threshold_floor;
  j["threshold_multiplier"] = cfg.threshold_multiplier;
  return j;
}

double lambda0() {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (std::exp(-mid) - mid - 0.5 * mid * mid > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

PowerFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] != 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(std::fabs(y[i])));
    }
  }
  PowerFit f;
  f.points = lx.size();
  if (f.points < 2) {
    f.exponent = f.intercept = f.standard_error = kNaN;
    return f;
  }
  const double n = static_cast<double>(f.points);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  if (f.points < 3) {
    f.standard_error = kNaN;
    return f;
  }
  double rss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - f.intercept - f.exponent * lx[i];
    rss += r * r;
  }
  f.standard_error = std::sqrt(rss / (n - 2.0) / sxx);
  return f;
}

ReciprocalSum prime_reciprocal_range(double lo, double hi, const arith::PrimeTable& primes) {
  ReciprocalSum out;
  if (!(hi > lo)) return out;
  const double lim = static_cast<double>(primes.limit());
  CompensatedSum s;
  for (std::uint32_t p : primes.range(lo, std::min(hi, lim))) s.add(1.0 / p);
  out.value = s.value();
  if (hi > lim) {
    out.extrapolated = true;
    out.value += std::log(std::log(hi)) - std::log(std::log(std::max(lim, lo)));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void validate(const ExperimentConfig& cfg) {
  if (!(cfg.X > 0.0) || !std::isfinite(cfg.X)) throw DomainError("X must be positive");
  if (!(cfg.A >= 10.0)) throw DomainError("cutoff multiplier A must be >= 10");
  if (!(cfg.M >= 0.0)) throw DomainError("M must be >= 0");
  if (cfg.threads == 0) throw DomainError("threads must be >= 1");
  if (!(cfg.x_exponent > 0.0 && cfg.x_exponent < 1.0)) throw DomainError("x-exponent must lie in (0, 1)");
  (void)report::parse_format(cfg.format);
}

}  // namespace

Workspace::Workspace(ExperimentConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

void Workspace::reconfigure(ExperimentConfig cfg) {
  validate(cfg);
  if (cfg.A != cfg_.A) {
    engine_.reset();
    memo_.clear();
  }
  cfg_ = std::move(cfg);
}

void Workspace::ensure_lambda(std::uint64_t N) {
  if (lambda_.N >= N) return;
  lambda_ = cfg_.cache_dir.empty() ? mf::build_lambda_table(N) : cache::load_or_build_lambda(cfg_.cache_dir, N);
  hash_.clear();
  engine_.reset();
}

void Workspace::ensure_primes(double limit) {
  const auto need = static_cast<std::uint64_t>(std::ceil(std::max(limit, 1000.0)));
  if (primes_.limit() >= need) return;
  primes_ = arith::sieve_primes(need);
}

void Workspace::ensure_moduli(double max_d) {
  const auto d = static_cast<std::uint64_t>(std::ceil(max_d));
  ensure_lambda(static_cast<std::uint64_t>(std::floor(cfg_.A * static_cast<double>(d))));
  if (!engine_ || engine_->max_d() < d) engine_ = std::make_unique<lvalue::AfeEngine>(lambda_, kernel(), cfg_.A, d);
}

const mf::LambdaTable& Workspace::lambda() const { return lambda_; }

const kernels::VKernel& Workspace::kernel() {
  if (!V_) V_ = std::make_unique<kernels::VKernel>();
  return *V_;
}

const std::string& Workspace::table_hash() {
  if (hash_.empty() && lambda_.N > 0) hash_ = cache::table_hash(lambda_);
  return hash_;
}

std::vector<lvalue::CentralValue> Workspace::central_values(std::span<const std::uint64_t> moduli) {
  std::vector<std::uint64_t> missing;
  for (auto d : moduli) {
    if (!memo_.count(d)) missing.push_back(d);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  if (!missing.empty()) {
    ensure_moduli(static_cast<double>(missing.back()));
    const auto batch = lvalue::batch_central_values(missing, *engine_, cfg_.threads);
    for (const auto& v : batch.records) memo_.emplace(v.d, v);
  }
  std::vector<lvalue::CentralValue> out;
  out.reserve(moduli.size());
  for (auto d : moduli) out.push_back(memo_.at(d));
  return out;
}

std::vector<std::uint64_t> Workspace::odd_primes_up_to(double x) {
  ensure_primes(x);
  std::vector<std::uint64_t> out;
  for (std::uint32_t p : primes_.range(2.0, x)) out.push_back(p);
  return out;
}

double Workspace::threshold(const lvalue::CentralValue& v) const noexcept {
  return std::max(cfg_.threshold_floor, cfg_.threshold_multiplier * (v.tail_bound + v.kernel_error));
}

report::json Workspace::provenance() {
  json p;
  p["table_size"] = lambda_.N;
  p["table_hash"] = table_hash();
  p["prime_limit"] = primes_.limit();
  if (V_) {
    const auto& k = V_->config();
    const auto& q = V_->quadrature();
    p["kernel"] = {{"kappa", k.kappa},
                   {"scale", k.scale},
                   {"abscissa", q.abscissa},
                   {"step", q.step},
                   {"height", q.height},
                   {"grid_points", k.grid_points},
                   {"quadrature_error", q.error_estimate},
                   {"interpolation_error", V_->interpolation_error()}};
  }
  if (engine_) p["afe_kernel_table_error"] = engine_->kernel_table().error();
  p["afe_cutoff"] = "floor(A d)";
  p["chunk_size"] = lvalue::kChunkSize;
  return p;
}

// ---------------------------------------------------------------------------

report::Report run_census(Workspace& ws) {
  const double X = ws.config().X;
  if (X < 3.0) throw DomainError("census: X must be >= 3");
  auto r = start(ws, "census");
  const auto ps = ws.odd_primes_up_to(X);
  const auto vals = ws.central_values(ps);
  CompensatedSum good;
  std::size_t nonvanishing = 0, undecided = 0;
  for (const auto& v : vals) {
    const double thr = ws.threshold(v);
    const bool ok = std::fabs(v.value) > thr;
    if (ok) {
      good.add(std::log(static_cast<double>(v.d)));
      ++nonvanishing;
    } else {
      ++undecided;
    }
    r.rows.push_back(json{{"p", v.d},
                          {"value", v.value},
                          {"tail_bound", v.tail_bound},
                          {"kernel_error", v.kernel_error},
                          {"threshold", thr},
                          {"status", ok ? "nonvanishing" : "undecided"}});
  }
  const double theta = odd_theta(X, ws.primes());
  r.summary = {{"X", X},
               {"theta", theta},
               {"nonvanishing_log_sum", good.value()},
               {"primes", ps.size()},
               {"nonvanishing", nonvanishing},
               {"undecided", undecided},
               {"undecided_fraction", static_cast<double>(undecided) / static_cast<double>(ps.size())},
               {"ratio", good.value() / theta}};
  r.plot_x = "p";
  r.plot_y = "value";
  finish(ws, r);
  return r;
}

report::Report run_first_moment(Workspace& ws) {
  const auto& cfg = ws.config();
  check_odd(cfg.ells, "ell");
  const auto Xs = doublings(cfg.X, cfg.large ? 4 : 3);
  const double top = 2.5 * max_of(Xs);
  auto r = start(ws, "first-moment");
  const auto ps = ws.odd_primes_up_to(top);
  const auto vals = ws.central_values(ps);
  const auto& lam = ws.lambda();
  const double phi_hat1 = kernels::phi_hat(1.0).real();

  std::map<std::uint64_t, std::vector<double>> S, P;
  json fits = json::array();
  for (auto ell : cfg.ells) {
    const auto pred = kernels::predicted_first_moment(ell, Xs, lam, ws.kernel().config());
    const auto split = arith::squarefree_split(ell);
    const double main_shape = lam[split.ell1] / std::sqrt(static_cast<double>(split.ell1));
    std::vector<double> residuals;
    for (std::size_t i = 0; i < Xs.size(); ++i) {
      const double X = Xs[i];
      CompensatedSum s;
      for (const auto& v : vals) {
        const double w = kernels::phi(static_cast<double>(v.d) / X);
        if (w == 0.0) continue;
        const int c = chi8(v.d, ell);
        if (c != 0) s.add(c * std::log(static_cast<double>(v.d)) * v.value * w);
      }
      const double value = s.value();
      const double residual = value - pred[i].value;
      S[ell].push_back(value);
      P[ell].push_back(pred[i].value);
      residuals.push_back(residual);
      r.rows.push_back(json{{"ell", ell},
                            {"X", X},
                            {"S", value},
                            {"predicted", pred[i].value},
                            {"residual", residual},
                            {"quadrature_error", pred[i].quadrature_error},
                            {"truncation_error", pred[i].truncation_error},
                            {"truncation_bound", pred[i].truncation_bound},
                            {"S_over_X", value / X},
                            {"fitted_C", value / (phi_hat1 * X * main_shape)}});
    }
    const auto fit = fit_power_law(Xs, residuals);
    fits.push_back(json{{"ell", ell},
                        {"residual_exponent", fit.exponent},
                        {"standard_error", fit.standard_error},
                        {"points", fit.points},
                        {"sign_matches_lambda", std::signbit(S[ell].front()) == std::signbit(main_shape)}});
  }
  r.summary["fits"] = fits;
  if (S.count(1) && S.count(9)) {
    const double measured = S[9].front() / S[1].front();
    const double predicted = P[9].front() / P[1].front();
    r.summary["ratio_9_1"] = {{"X", Xs.front()},
                              {"measured", measured},
                              {"predicted", predicted},
                              {"relative_difference", std::fabs(measured / predicted - 1.0)}};
  }
  r.plot_x = "X";
  r.plot_y = "residual";
  finish(ws, r);
  return r;
}

report::Report run_char_sum(Workspace& ws) {
  const auto& cfg = ws.config();
  check_odd(cfg.cs, "c");
  std::vector<double> Xs = doublings(cfg.X, 3);
  Xs.push_back(10.0 * cfg.X);
  if (cfg.large) Xs.push_back(20.0 * cfg.X);
  auto r = start(ws, "char-sum");
  const auto ps = ws.odd_primes_up_to(2.5 * max_of(Xs));
  const double phi_hat1 = kernels::phi_hat(1.0).real();
  json fits = json::array();
  for (auto c : cfg.cs) {
    const bool square = arith::is_perfect_square(c);
    std::vector<double> residuals;
    for (double X : Xs) {
      CompensatedSum s;
      for (auto p : ps) {
        const double w = kernels::phi(static_cast<double>(p) / X);
        if (w == 0.0) continue;
        const int k = chi8(p, c);
        if (k != 0) s.add(k * std::log(static_cast<double>(p)) * w);
      }
      const double main = square ? phi_hat1 * X : 0.0;
      const double residual = s.value() - main;
      const double bound = 5.0 * std::pow(X, 0.75);
      residuals.push_back(residual);
      r.rows.push_back(json{{"c", c},
                            {"X", X},
                            {"sum", s.value()},
                            {"main", main},
                            {"residual", residual},
                            {"bound", bound},
                            {"within", std::fabs(residual) <= bound}});
    }
    const auto fit = fit_power_law(Xs, residuals);
    fits.push_back(json{{"c", c},
                        {"square", square},
                        {"residual_exponent", fit.exponent},
                        {"standard_error", fit.standard_error}});
  }
  r.summary["fits"] = fits;
  r.summary["phi_hat_1"] = phi_hat1;
  r.plot_x = "X";
  r.plot_y = "residual";
  finish(ws, r);
  return r;
}

report::Report run_upper_bound(Workspace& ws) {
  const auto& cfg = ws.config();
  const auto Xs = doublings(cfg.X, cfg.large ? 3 : 2);
  auto r = start(ws, "upper-bound");
  const auto ps = ws.odd_primes_up_to(max_of(Xs));
  const auto vals = ws.central_values(ps);
  const auto& lam = ws.lambda();
  std::vector<double> medians;
  for (double X : Xs) {
    const double x = std::pow(X, cfg.x_exponent);
    if (x < 2.0) throw DomainError("upper-bound: x = X^e must be >= 2");
    const double lx = std::log(x);
    std::vector<std::pair<std::uint64_t, double>> poly;  // q, lambda(q) q^{-1/2-1/log x} log(x/q)/log x
    for (std::uint32_t q : ws.primes().range(0.0, x)) {
      poly.emplace_back(q, lam[q] * std::pow(static_cast<double>(q), -0.5 - 1.0 / lx) * std::log(x / q) / lx);
    }
    const double constant = -0.5 * std::log(lx) + 2.0 * std::log(X) / lx;
    std::vector<double> slack;
    std::size_t excluded = 0;
    for (const auto& v : vals) {
      if (static_cast<double>(v.d) > X) break;
      if (std::fabs(v.value) <= ws.threshold(v)) {
        ++excluded;
        continue;
      }
      CompensatedSum rhs;
      for (const auto& [q, w] : poly) rhs.add(chi8(v.d, q) * w);
      double correction = 0.0;
      if (static_cast<double>(v.d) <= x) {
        const double l = lam[v.d];
        correction = (l * l - 2.0) / (2.0 * static_cast<double>(v.d));
      }
      slack.push_back(rhs.value() + constant - correction - std::log(std::fabs(v.value)));
    }
    const double below =
        static_cast<double>(std::count_if(slack.begin(), slack.end(), [](double s) { return s < -5.0; }));
    const double med = median(slack);
    medians.push_back(med);
    r.rows.push_back(json{{"X", X},
                          {"x", x},
                          {"primes", slack.size()},
                          {"excluded", excluded},
                          {"min_slack", slack.empty() ? kNaN : *std::min_element(slack.begin(), slack.end())},
                          {"median_slack", med},
                          {"fraction_ge_minus5", slack.empty() ? kNaN : 1.0 - below / slack.size()}});
  }
  json drift = json::array();
  for (std::size_t i = 1; i < medians.size(); ++i) drift.push_back(medians[i] - medians[i - 1]);
  const double l0 = 0.4912;
  r.summary = {{"lambda0", lambda0()},
               {"lambda0_quoted_residual", std::exp(-l0) - (l0 + l0 * l0 / 2.0)},
               {"median_drift", drift}};
  r.plot_x = "X";
  r.plot_y = "median_slack";
  finish(ws, r);
  return r;
}

report::Report run_mollified_moments(Workspace& ws) {
  const auto& cfg = ws.config();
  const auto Xs = doublings(cfg.X, cfg.large ? 3 : 2);
  auto r = start(ws, "mollified");
  const auto ps = ws.odd_primes_up_to(2.5 * max_of(Xs));
  const auto vals = ws.central_values(ps);
  const auto& lam = ws.lambda();
  const auto& primes = ws.primes();
  std::vector<double> s1x, s2x;
  for (double X : Xs) {
    const auto L = mollifier::build_ladder(X, cfg.M, X);
    std::vector<double> moll(vals.size());
    std::vector<int> cls(vals.size(), -1);
    std::vector<int> memberships(vals.size(), 0);
    lvalue::parallel_for_chunks(vals.size(), cfg.threads, [&](std::size_t i) {
      const std::uint64_t p = vals[i].d;
      const double w = kernels::phi(static_cast<double>(p) / X);
      if (w == 0.0 && static_cast<double>(p) > X) return;
      moll[i] = mollifier::mollifier_value(p, -1.0, L, lam, primes);
      if (static_cast<double>(p) <= X) {
        const auto m = mollifier::m_table(p, L, lam, primes);
        cls[i] = mollifier::classify(m, L);
        for (int j = 0; j <= L.J; ++j) memberships[i] += mollifier::in_set(m, L, j);
      }
    });
    CompensatedSum s1, s1p, s2;
    std::vector<std::size_t> counts(static_cast<std::size_t>(L.J) + 1, 0);
    std::size_t overlaps = 0, uncovered = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double p = static_cast<double>(vals[i].d);
      const double lp = std::log(p);
      const double w = kernels::phi(p / X);
      if (w != 0.0) s1.add(lp * vals[i].value * moll[i] * w);
      if (p <= X) {
        s1p.add(lp * vals[i].value * moll[i]);
        s2.add(lp * vals[i].value * vals[i].value * moll[i] * moll[i]);
        ++counts[static_cast<std::size_t>(cls[i])];
        overlaps += memberships[i] > 1;
        uncovered += memberships[i] == 0;
      }
    }
    const double theta = odd_theta(X, primes);
    std::ostringstream classes;
    for (std::size_t j = 0; j < counts.size(); ++j) classes << (j ? "/" : "") << counts[j];
    s1x.push_back(s1.value() / X);
    s2x.push_back(s2.value() / X);
    r.rows.push_back(json{{"X", X},
                          {"M", cfg.M},
                          {"J", L.J},
                          {"degenerate", L.degenerate},
                          {"truncated", L.truncated},
                          {"S1", s1.value()},
                          {"S1_over_X", s1.value() / X},
                          {"S1_prime", s1p.value()},
                          {"S2", s2.value()},
                          {"S2_over_X", s2.value() / X},
                          {"theta", theta},
                          {"lower_bound", s1p.value() * s1p.value() / (s2.value() * theta)},
                          {"classes", classes.str()},
                          {"multiply_classified", overlaps},
                          {"unclassified", uncovered}});
  }
  json r1 = json::array(), r2 = json::array();
  for (std::size_t i = 1; i < Xs.size(); ++i) {
    r1.push_back(s1x[i] / s1x[i - 1]);
    r2.push_back(s2x[i] / s2x[i - 1]);
  }
  r.summary = {{"S1_doubling_ratio", r1}, {"S2_doubling_ratio", r2}};
  r.plot_x = "X";
  r.plot_y = "S2_over_X";
  finish(ws, r);
  return r;
}

report::Report run_moment_growth(Workspace& ws) {
  const auto& cfg = ws.config();
  for (int k : cfg.ks) {
    if (k < 0 || k > 2) throw DomainError("moment-growth: k must be 0, 1 or 2");
  }
  if (cfg.ks.empty()) throw DomainError("moment-growth: k list is empty");
  std::vector<double> Xs{cfg.X / 2, cfg.X, 2 * cfg.X};
  if (cfg.large) Xs.push_back(4 * cfg.X);
  auto r = start(ws, "moment-growth");
  const double top = max_of(Xs);
  std::vector<std::uint64_t> ds;
  for (std::uint64_t d = 1; static_cast<double>(d) < top; d += 2) {
    if (arith::is_squarefree(d)) ds.push_back(d);
  }
  const auto vals = ws.central_values(ds);
  json growth = json::array();
  for (int k : cfg.ks) {
    std::vector<double> norm;
    for (double X : Xs) {
      CompensatedSum s;
      std::size_t count = 0;
      for (const auto& v : vals) {
        if (static_cast<double>(v.d) >= X) break;
        s.add(std::pow(std::fabs(v.value), 2 * k));
        ++count;
      }
      const double n = s.value() / (X * std::pow(std::log(X), 2 * k * k - k));
      norm.push_back(n);
      r.rows.push_back(json{{"k", k}, {"X", X}, {"count", count}, {"moment_sum", s.value()}, {"normalized", n}});
    }
    json ratios = json::array();
    for (std::size_t i = 1; i < norm.size(); ++i) ratios.push_back(norm[i] / norm[i - 1]);
    json g{{"k", k}, {"doubling_ratio", ratios}};
    if (k == 0) g["density_oracle"] = 4.0 / (std::numbers::pi * std::numbers::pi);
    growth.push_back(g);
  }
  r.summary["growth"] = growth;
  r.plot_x = "X";
  r.plot_y = "normalized";
  finish(ws, r);
  return r;
}

report::Report run_prime_sum_checks(Workspace& ws) {
  const auto& cfg = ws.config();
  std::vector<double> xs{1e4, 1e5, 1e6};
  if (cfg.large) xs.push_back(1e7);
  ws.ensure_primes(max_of(xs));
  ws.ensure_lambda(static_cast<std::uint64_t>(1e6));
  auto r = start(ws, "prime-sums");
  const auto& primes = ws.primes();
  const auto& lam = ws.lambda();
  const auto row = [&](const std::string& check, double param, double x, double value, double main, double drift,
                       double bound, bool within) {
    r.rows.push_back(json{{"check", check},
                          {"param", param},
                          {"x", x},
                          {"value", value},
                          {"main", main},
                          {"residual", value - main},
                          {"drift", drift},
                          {"bound", bound},
                          {"within", within}});
  };
  bool all = true;
  double prev = kNaN;
  for (double x : xs) {
    const double v = arith::prime_reciprocal_sum(x, primes);
    const double res = v - std::log(std::log(x));
    const double drift = std::isnan(prev) ? 0.0 : res - prev;
    const bool ok = std::fabs(drift) <= 5e-3 && std::fabs(res - 0.2615) <= 5e-3;
    all = all && ok;
    row("mertens", 0, x, v, std::log(std::log(x)), drift, 5e-3, ok);
    prev = res;
  }
  prev = kNaN;
  for (double x : xs) {
    if (!lam.covers(x)) continue;
    const double v = mf::rankin_selberg_sum(x, lam, primes);
    const double res = v - std::log(std::log(x));
    const double drift = std::isnan(prev) ? 0.0 : res - prev;
    const bool ok = std::fabs(drift) <= 2e-2;
    all = all && ok;
    row("rankin_selberg", 0, x, v, std::log(std::log(x)), drift, 2e-2, ok);
    prev = res;
  }
  for (int j : {1, 2}) {
    for (double x : xs) {
      const double v = arith::log_power_sum(x, j, primes);
      const double main = std::pow(std::log(x), j) / j;
      const double bound = 3.0 * std::pow(std::log(x), j - 1);
      const bool ok = std::fabs(v - main) <= bound;
      all = all && ok;
      row("log_power", j, x, v, main, kNaN, bound, ok);
    }
  }
  for (auto c : cfg.cs) {
    if (c == 0 || (c & 1) == 0) throw DomainError("prime-sums: c values must be odd and positive");
    for (double x : xs) {
      const double v = arith::twisted_prime_log_sum(x, c, primes);
      const double main = arith::is_perfect_square(c) ? x : 0.0;
      const double bound = 10.0 * std::sqrt(x) * std::pow(std::log(10.0 * x), 2);
      const bool ok = std::fabs(v - main) <= bound;
      all = all && ok;
      row("twisted", static_cast<double>(c), x, v, main, kNaN, bound, ok);
    }
  }
  r.summary["all_within"] = all;
  r.plot_x = "x";
  r.plot_y = "residual";
  finish(ws, r);
  return r;
}

report::Report run_ladder_report(Workspace& ws) {
  const auto& cfg = ws.config();
  const auto L = mollifier::build_ladder(cfg.X, cfg.M);
  ws.ensure_primes(std::min(cfg.X, 1e7));
  const auto& primes = ws.primes();
  auto r = start(ws, "ladder");
  double kirila = 0.0, block_max = 0.0;
  bool any_extrapolated = false;
  for (int j = 1; j <= L.J; ++j) {
    const auto s = prime_reciprocal_range(L.block_lo(j), L.block_hi(j), primes);
    const double kr = mollifier::kirila_ratio(L.alpha(j));
    kirila = std::max(kirila, kr);
    if (j >= 2) block_max = std::max(block_max, s.value);
    any_extrapolated = any_extrapolated || s.extrapolated;
    r.rows.push_back(json{{"j", j},
                          {"alpha", L.alpha(j)},
                          {"y", L.y[static_cast<std::size_t>(j - 1)]},
                          {"lo", L.block_lo(j)},
                          {"hi", L.block_hi(j)},
                          {"reciprocal_sum", s.value},
                          {"extrapolated", s.extrapolated},
                          {"kirila_ratio", kr}});
  }
  const auto inv = mollifier::check_ladder(L);
  const double llx = std::log(std::log(cfg.X));
  const auto first = prime_reciprocal_range(0.0, std::pow(cfg.X, 1.0 / (llx * llx)), primes);
  r.summary = {{"X", cfg.X},
               {"M", cfg.M},
               {"J", L.J},
               {"degenerate", L.degenerate},
               {"alpha0", L.alpha0},
               {"length_sum", inv.length_sum},
               {"length_bound", inv.length_bound},
               {"length_ok", inv.length_ok},
               {"increasing_by_20", inv.increasing_by_20},
               {"J_bound_applies", inv.J_bound_applies},
               {"J_bound_ok", inv.J_bound_ok},
               {"first_range_reciprocal_sum", first.value},
               {"log_log_X", llx},
               {"first_range_ok", first.value <= llx},
               {"first_range_extrapolated", first.extrapolated},
               {"block_sum_max", block_max},
               {"block_sum_ok", block_max <= 10.0},
               {"blocks_extrapolated", any_extrapolated},
               {"kirila_max_ratio", kirila},
               {"kirila_ok", kirila <= 1.001}};
  r.plot_x = "alpha";
  r.plot_y = "reciprocal_sum";
  finish(ws, r);
  return r;
}

report::Report run_build_cache(Workspace& ws) {
  const auto& cfg = ws.config();
  if (cfg.cache_dir.empty()) throw DomainError("build-cache needs --cache-dir");
  const auto N = static_cast<std::uint64_t>(std::ceil(cfg.A * 2.5 * cfg.X));
  ws.ensure_lambda(N);
  auto r = start(ws, "build-cache");
  r.summary = {{"N", ws.lambda().N},
               {"file", (std::filesystem::path(cfg.cache_dir) / ("lambda_" + std::to_string(N) + ".lamf")).string()},
               {"table_hash", ws.table_hash()}};
  finish(ws, r);
  return r;
}

}  // namespace twistlab::experiments
