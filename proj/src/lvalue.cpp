#include "twistlab/lvalue.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "twistlab/errors.hpp"
#include "twistlab/report.hpp"
#include "twistlab/summation.hpp"

namespace twistlab::lvalue {

QuadraticCharacter::QuadraticCharacter(std::uint64_t d) : d_(d) {
  if (d == 0 || (d & 1) == 0 || !arith::is_squarefree(d)) {
    throw DomainError("QuadraticCharacter: d must be odd, positive and squarefree, got " + std::to_string(d));
  }
  // (r/d) = prod over p | d of the Legendre symbol (r/p); each Legendre table
  // marks the squares mod p.
  jacobi_.assign(d, 1);
  for (const std::uint64_t p : arith::prime_factors(d)) {
    std::vector<signed char> leg(p, -1);
    leg[0] = 0;
    for (std::uint64_t x = 1; x <= p / 2; ++x) leg[x * x % p] = 1;
    std::uint64_t rp = 0;
    for (std::uint64_t r = 0; r < d; ++r) {
      jacobi_[r] = static_cast<signed char>(jacobi_[r] * leg[rp]);
      if (++rp == p) rp = 0;
    }
  }
  const bool d_is_3_mod_4 = (d & 3) == 3;
  for (int r = 0; r < 8; ++r) {
    if ((r & 1) == 0) {
      sign8_[r] = 0;
      continue;
    }
    const int two = (r == 1 || r == 7) ? 1 : -1;
    const int recip = (d_is_3_mod_4 && (r & 3) == 3) ? -1 : 1;
    sign8_[r] = two * recip;
  }
}

UniformKernelTable::UniformKernelTable(const kernels::VKernel& V, double t_max, int per_unit)
    : per_unit_(per_unit), t_max_(t_max) {
  const auto pieces = static_cast<std::size_t>(std::ceil(t_max * per_unit)) + 1;
  const double h = 1.0 / per_unit;
  // Node k sits at t = (k - 1) h; V(0+) = 1 up to O(t^kappa/2).
  std::vector<double> y(pieces + 3);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = k <= 1 ? 1.0 : V(static_cast<double>(k - 1) * h);
  pieces_.resize(pieces);
  for (std::size_t i = 0; i < pieces; ++i) {
    const double ym = y[i], y0 = y[i + 1], y1 = y[i + 2], y2 = y[i + 3];
    pieces_[i] = {y0, -ym / 3.0 - y0 / 2.0 + y1 - y2 / 6.0, ym / 2.0 - y0 + y1 / 2.0,
                  -ym / 6.0 + y0 / 2.0 - y1 / 2.0 + y2 / 6.0};
  }
  for (std::size_t i = 0; i < pieces; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * h;
    error_ = std::max(error_, std::fabs(at_scaled(t * per_unit_) - V(t)));
  }
  error_ += V.pointwise_error();
}

AfeEngine::AfeEngine(const mf::LambdaTable& lambda, const kernels::VKernel& V, double A, std::uint64_t max_d)
    : V_(V), A_(A), max_d_(max_d), limit_(0), table_(V, A + 1.0) {
  if (!(A >= 10.0)) throw DomainError("AfeEngine: cutoff multiplier A must be >= 10");
  const double need = std::floor(A * static_cast<double>(max_d));
  if (!lambda.covers(need)) {
    throw CoverageError("AfeEngine: lambda table N = " + std::to_string(lambda.N) + " does not cover A*d = " +
                        std::to_string(need));
  }
  limit_ = static_cast<std::uint64_t>(need);
  a_.assign(limit_ + 1, 0.0);
  abs_odd_.assign(limit_ + 1, 0.0);
  double acc = 0.0;
  for (std::uint64_t n = 1; n <= limit_; ++n) {
    a_[n] = lambda[n] / std::sqrt(static_cast<double>(n));
    if (n & 1) acc += std::fabs(a_[n]);
    abs_odd_[n] = acc;
  }
}

CentralValue AfeEngine::operator()(std::uint64_t d) const {
  const QuadraticCharacter chi(d);
  const auto cutoff = static_cast<std::uint64_t>(std::floor(A_ * static_cast<double>(d)));
  if (cutoff > limit_) {
    throw CoverageError("central_value: A*d = " + std::to_string(cutoff) + " exceeds engine range " +
                        std::to_string(limit_));
  }
  const double scale = table_.per_unit() / static_cast<double>(d);
  CompensatedSum sum;
  std::uint64_t r = 1 % d;
  for (std::uint64_t n = 1; n <= cutoff; n += 2) {
    const int c = chi.sign8(n) * chi.jacobi(r);
    sum.add(static_cast<double>(c) * a_[n] * table_.at_scaled(static_cast<double>(n) * scale));
    r += 2;
    if (r >= d) r -= d;
    if (r >= d) r -= d;  // d = 1
  }
  CentralValue cv;
  cv.d = d;
  cv.value = 2.0 * sum.value();
  cv.cutoff = cutoff;
  cv.tail_bound = V_.afe_tail_bound(static_cast<double>(cutoff), static_cast<double>(d));
  cv.kernel_error = 2.0 * abs_odd_[cutoff] * table_.error();
  return cv;
}

CentralValue central_value(std::uint64_t d, const mf::LambdaTable& lambda, const kernels::VKernel& V, double A) {
  const AfeEngine engine(lambda, V, A, d);
  return engine(d);
}

void parallel_for_chunks(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& work) {
  if (workers == 0) workers = 1;
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  const auto run = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks || stop.load()) return;
      try {
        const std::size_t hi = std::min(n, (c + 1) * kChunkSize);
        for (std::size_t i = c * kChunkSize; i < hi; ++i) work(i);
      } catch (...) {
        errors[c] = std::current_exception();
        stop.store(true);
      }
    }
  };
  const unsigned extra = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(chunks, 1))) - 1;
  std::vector<std::thread> pool;
  pool.reserve(extra);
  for (unsigned w = 0; w < extra; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

BatchResult batch_central_values(std::span<const std::uint64_t> moduli, const AfeEngine& engine, unsigned workers,
                                 const std::string& table_hash) {
  BatchResult out;
  out.records.resize(moduli.size());
  parallel_for_chunks(moduli.size(), workers, [&](std::size_t i) { out.records[i] = engine(moduli[i]); });
  auto& m = out.metadata;
  m.A = engine.A();
  m.cutoff_policy = "n <= floor(A*d)";
  m.kernel = engine.kernel().config();
  m.quadrature = engine.kernel().quadrature();
  m.kernel_pointwise_error = engine.kernel_table().error();
  m.table_hash = table_hash;
  m.chunk_size = kChunkSize;
  m.workers = workers == 0 ? 1 : workers;
  return out;
}

EulerCheck dirichlet_vs_euler_check(std::uint64_t d, double s, std::uint64_t N, std::uint64_t P,
                                    const mf::LambdaTable& lambda, const arith::PrimeTable& primes) {
  if (!(s >= 2.0)) throw DomainError("dirichlet_vs_euler_check: requires s >= 2");
  const QuadraticCharacter chi(d);
  const std::uint64_t top = std::max<std::uint64_t>(N, 1);
  if (!lambda.covers(static_cast<double>(std::max(top, P)))) {
    throw CoverageError("dirichlet_vs_euler_check: lambda table too short");
  }
  if (P >= 2 && !primes.covers(static_cast<double>(P))) {
    throw CoverageError("dirichlet_vs_euler_check: prime table too short");
  }
  EulerCheck e;
  CompensatedSum series;
  for (std::uint64_t n = 1; n <= top; ++n) {
    const int c = chi(n);
    if (c != 0) series.add(c * lambda[n] * std::pow(static_cast<double>(n), -s));
  }
  e.series = series.value();

  CompensatedSum log_prod;
  if (P >= 2) {
    for (std::uint32_t p : primes.range(0.0, static_cast<double>(P))) {
      const int c = chi(p);
      if (c == 0) continue;
      const double x = std::pow(static_cast<double>(p), -s);
      log_prod.add(-std::log1p(-c * lambda[p] * x + x * x));
    }
  }
  e.product = std::exp(log_prod.value());
  e.gap = std::fabs(e.series - e.product);
  // sum_{n > M} d(n) n^{-s} <= s int_M^inf u^{-s}(1 + log u) du.
  const auto divisor_tail = [s](double M) { return s * mf::log_power_tail_integral(std::max(M, 1.0), s, 1); };
  e.series_tail = divisor_tail(static_cast<double>(top));
  e.product_tail = std::fabs(e.product) * divisor_tail(static_cast<double>(std::max<std::uint64_t>(P, 1)));
  e.within_bounds = e.gap <= e.series_tail + e.product_tail;
  return e;
}

std::string to_csv(const BatchResult& r) {
  std::ostringstream os;
  os << "d,value,cutoff,tail_bound,kernel_error\n";
  for (const auto& c : r.records) {
    os << c.d << ',' << report::fmt(c.value) << ',' << c.cutoff << ',' << report::fmt(c.tail_bound) << ','
       << report::fmt(c.kernel_error) << '\n';
  }
  return os.str();
}

std::string to_json(const BatchResult& r) {
  nlohmann::ordered_json j;
  const auto& m = r.metadata;
  j["metadata"] = {{"A", m.A},
                   {"cutoff_policy", m.cutoff_policy},
                   {"kernel",
                    {{"kappa", m.kernel.kappa},
                     {"scale", m.kernel.scale},
                     {"abscissa", m.quadrature.abscissa},
                     {"step", m.quadrature.step},
                     {"height", m.quadrature.height},
                     {"quadrature_error", m.quadrature.error_estimate},
                     {"grid_points", m.kernel.grid_points},
                     {"pointwise_error", m.kernel_pointwise_error}}},
                   {"table_hash", m.table_hash},
                   {"chunk_size", m.chunk_size},
                   {"workers", m.workers}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& c : r.records) {
    rows.push_back({{"d", c.d},
                    {"value", c.value},
                    {"cutoff", c.cutoff},
                    {"tail_bound", c.tail_bound},
                    {"kernel_error", c.kernel_error}});
  }
  j["records"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace twistlab::lvalue
