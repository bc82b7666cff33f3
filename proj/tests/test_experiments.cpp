#include <doctest.h>

#include <cmath>
#include <numbers>

#include "twistlab/arith.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/experiments.hpp"
#include "twistlab/kernels.hpp"

using namespace twistlab;
using namespace twistlab::experiments;

namespace {

ExperimentConfig small(double X) {
  ExperimentConfig c;
  c.X = X;
  return c;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("lambda0") {
    const double l = lambda0();
    CHECK(std::fabs(std::exp(-l) - l - l * l / 2.0) <= 1e-15);
    CHECK(std::fabs(l - 0.4912) <= 1e-4);
    const double q = 0.4912;
    CHECK(std::fabs(std::exp(-q) - (q + q * q / 2.0)) <= 1e-4);
  }

  TEST_CASE("power-law fit") {
    const std::vector<double> x{1e4, 2e4, 4e4, 8e4};
    std::vector<double> y;
    for (double v : x) y.push_back(-3.0 * std::pow(v, 0.5));
    const auto f = fit_power_law(x, y);
    CHECK(f.exponent == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(f.standard_error <= 1e-10);
    CHECK(f.points == 4);
    y[1] *= 1.5;
    CHECK(fit_power_law(x, y).standard_error > 0.01);
    const auto two = fit_power_law(std::vector<double>{1, 2}, std::vector<double>{1, 4});
    CHECK(two.exponent == doctest::Approx(2.0));
    CHECK(std::isnan(two.standard_error));
    y[0] = 0.0;
    CHECK(fit_power_law(x, y).points == 3);
  }

  TEST_CASE("prime reciprocal ranges") {
    const auto primes = arith::sieve_primes(1000);
    const auto a = prime_reciprocal_range(2.0, 10.0, primes);
    CHECK(a.value == doctest::Approx(1.0 / 3 + 1.0 / 5 + 1.0 / 7));
    CHECK_FALSE(a.extrapolated);
    CHECK(prime_reciprocal_range(0.0, 2.0, primes).value == 0.5);
    CHECK(prime_reciprocal_range(10.0, 10.0, primes).value == 0.0);
    const auto b = prime_reciprocal_range(500.0, 1e6, primes);
    CHECK(b.extrapolated);
    CHECK(b.value == doctest::Approx(prime_reciprocal_range(500.0, 1000.0, primes).value +
                                     std::log(std::log(1e6)) - std::log(std::log(1000.0))));
  }

  TEST_CASE("configuration checks") {
    CHECK_THROWS_AS(Workspace(small(-1.0)), DomainError);
    auto c = small(100);
    c.A = 5;
    CHECK_THROWS_AS(Workspace{c}, DomainError);
    c = small(100);
    c.format = "xml";
    CHECK_THROWS_AS(Workspace{c}, DomainError);
    c = small(100);
    c.x_exponent = 1.5;
    CHECK_THROWS_AS(Workspace{c}, DomainError);
    c = small(100);
    c.ells = {1, 4};
    Workspace ws(c);
    CHECK_THROWS_AS(run_first_moment(ws), DomainError);
    Workspace tiny(small(2));
    CHECK_THROWS_AS(run_census(tiny), DomainError);
  }

  TEST_CASE("census at X = 10 by hand") {
    Workspace ws(small(10));
    const auto r = run_census(ws);
    REQUIRE(r.rows.size() == 3);
    const double expect[] = {3.41067791300581, 0.676608138965202, 1.46684301572193};
    for (int i = 0; i < 3; ++i) {
      CHECK(std::fabs(r.rows[i]["value"].get<double>() - expect[i]) <= 1e-9);
      CHECK(r.rows[i]["status"] == "nonvanishing");
    }
    CHECK(r.summary["theta"].get<double>() == doctest::Approx(std::log(105.0)));
    CHECK(r.summary["ratio"].get<double>() == doctest::Approx(1.0));
    CHECK(r.summary["undecided"] == 0);
    CHECK(r.provenance["table_hash"].get<std::string>().size() == 64);
    CHECK(r.config["X"] == 10.0);
  }

  TEST_CASE("census at X = 1000") {
    Workspace ws(small(1000));
    const auto r = run_census(ws);
    CHECK(r.summary["ratio"].get<double>() >= 0.9);
    CHECK(r.summary["undecided_fraction"].get<double>() <= 0.01);
    CHECK(r.summary["ratio"].get<double>() <= 1.0);
  }

  TEST_CASE("census ratio is antitone in the threshold") {
    double previous = 2.0;
    for (double floor : {1e-8, 1e-2, 0.1, 0.3, 1.0}) {
      auto c = small(300);
      c.threshold_floor = floor;
      Workspace ws(c);
      const double ratio = run_census(ws).summary["ratio"].get<double>();
      CHECK(ratio <= previous);
      previous = ratio;
    }
    CHECK(previous < 1.0);
  }

  TEST_CASE("reports are reproducible and thread independent") {
    auto c1 = small(400);
    auto c4 = c1;
    c4.threads = 4;
    Workspace a(c1), b(c1), d(c4);
    const auto ra = run_census(a), rb = run_census(b), rd = run_census(d);
    CHECK(report::render_csv(ra) == report::render_csv(rb));
    CHECK(report::render_json(ra) == report::render_json(rb));
    CHECK(ra.rows.dump() == rd.rows.dump());
    CHECK(ra.summary.dump() == rd.summary.dump());
  }

  TEST_CASE("character sums") {
    auto c = small(2000);
    c.cs = {1, 3, 9};
    Workspace ws(c);
    const auto r = run_char_sum(ws);
    const auto primes = arith::sieve_primes(60'000);
    // c = 1: Phi-weighted prime count minus its main term, recomputed directly.
    double direct = 0.0;
    for (std::uint32_t p : primes) {
      if (p > 2) direct += std::log(double(p)) * kernels::phi(p / 2000.0);
    }
    CHECK(r.rows[0]["c"] == 1);
    CHECK(r.rows[0]["sum"].get<double>() == doctest::Approx(direct).epsilon(1e-12));
    CHECK(r.rows[0]["residual"].get<double>() == doctest::Approx(direct - 1.5 * 2000.0).epsilon(1e-10));
    for (const auto& row : r.rows) {
      CHECK(row["within"].get<bool>());
      CHECK(row["residual"].get<double>() == row["sum"].get<double>() - row["main"].get<double>());
    }
    // c = 9 sees the same primes as c = 1 once 3 is outside the support.
    CHECK(r.rows[8]["sum"].get<double>() == r.rows[0]["sum"].get<double>());
  }

  TEST_CASE("first moment plumbing") {
    auto c = small(500);
    c.ells = {1, 3, 9};
    Workspace ws(c);
    const auto r = run_first_moment(ws);
    CHECK(r.rows.size() == 9);
    for (const auto& row : r.rows) {
      CHECK(row["residual"].get<double>() == row["S"].get<double>() - row["predicted"].get<double>());
    }
    CHECK(r.rows[0]["X"] == 500.0);
    CHECK(r.rows[2]["X"] == 2000.0);
    CHECK(r.summary["fits"].size() == 3);
    CHECK(r.summary["ratio_9_1"]["predicted"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.summary["fits"][1]["sign_matches_lambda"].get<bool>());
  }

  TEST_CASE("upper bound slack") {
    Workspace ws(small(1000));
    const auto r = run_upper_bound(ws);
    CHECK(r.rows.size() == 2);
    CHECK(r.rows[0]["fraction_ge_minus5"].get<double>() >= 0.95);
    CHECK(r.summary["lambda0"].get<double>() == doctest::Approx(lambda0()));
    CHECK(std::fabs(r.summary["lambda0_quoted_residual"].get<double>()) <= 1e-4);
  }

  TEST_CASE("moment growth density") {
    auto c = small(400);
    c.ks = {0, 1};
    Workspace ws(c);
    const auto r = run_moment_growth(ws);
    REQUIRE(r.rows.size() == 6);
    for (int i = 0; i < 3; ++i) {
      const double X = r.rows[i]["X"].get<double>();
      std::size_t count = 0;
      for (std::uint64_t d = 1; double(d) < X; d += 2) count += arith::is_squarefree(d);
      CHECK(r.rows[i]["count"].get<std::size_t>() == count);
      CHECK(r.rows[i]["normalized"].get<double>() == doctest::Approx(count / X));
    }
    CHECK(r.rows[5]["normalized"].get<double>() > 0.0);
    c.ks = {3};
    Workspace bad(c);
    CHECK_THROWS_AS(run_moment_growth(bad), DomainError);
  }

  TEST_CASE("mollified moments") {
    Workspace ws(small(1000));
    const auto r = run_mollified_moments(ws);
    CHECK(r.rows.size() == 2);
    for (const auto& row : r.rows) {
      CHECK(row["S1"].get<double>() > 0.0);
      CHECK(row["S2"].get<double>() > 0.0);
      CHECK(row["lower_bound"].get<double>() > 0.0);
      CHECK(row["unclassified"] == 0);
    }
  }

  TEST_CASE("prime sums") {
    Workspace ws(small(1e4));
    const auto r = run_prime_sum_checks(ws);
    CHECK(r.summary["all_within"].get<bool>());
    CHECK(r.rows.size() == 3 + 3 + 6 + 12);
  }

  TEST_CASE("ladder report") {
    auto c = small(1e10);
    Workspace ws(c);
    const auto r = run_ladder_report(ws);
    CHECK(r.summary["J"] == 2);
    CHECK(r.rows[0]["alpha"].get<double>() == doctest::Approx(0.10164).epsilon(1e-4));
    CHECK(r.rows[1]["extrapolated"].get<bool>());
    CHECK(r.summary["kirila_ok"].get<bool>());
    c.M = 2;
    Workspace wd(c);
    CHECK(run_ladder_report(wd).summary["degenerate"].get<bool>());
    Workspace w8(small(1e8));
    const auto r8 = run_ladder_report(w8);
    CHECK(r8.summary["first_range_ok"].get<bool>());
    CHECK(r8.summary["first_range_reciprocal_sum"].get<double>() <= std::log(std::log(1e8)));
  }

  TEST_CASE("rendering") {
    Workspace ws(small(30));
    const auto r = run_census(ws);
    const auto csv = report::render(r, report::Format::Csv);
    CHECK(csv.find("p,value,tail_bound,kernel_error,threshold,status\n") != std::string::npos);
    CHECK(csv.find("# summary.ratio=") != std::string::npos);
    const auto j = report::json::parse(report::render(r, report::Format::Json));
    CHECK(j["report"] == "census");
    CHECK(j["rows"].size() == 9);
    const auto svg = report::render(r, report::Format::Svg);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.rfind("<svg", 0) == 0);
  }
}
