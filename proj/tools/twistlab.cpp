#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "twistlab/errors.hpp"
#include "twistlab/experiments.hpp"

namespace {

using twistlab::experiments::Workspace;
using Runner = std::function<twistlab::report::Report(Workspace&)>;

struct Command {
  const char* name;
  const char* description;
  Runner run;
};

const Command kCommands[] = {
    {"census", "Non-vanishing census over odd primes p <= X.\nCSV columns: p,value,tail_bound,kernel_error,threshold,status",
     twistlab::experiments::run_census},
    {"first-moment",
     "Twisted first moment S(l, X) against the contour prediction over X, 2X, 4X.\n"
     "CSV columns: ell,X,S,predicted,residual,quadrature_error,truncation_error,truncation_bound,S_over_X,fitted_C",
     twistlab::experiments::run_first_moment},
    {"char-sum", "Smoothed character sums over primes.\nCSV columns: c,X,sum,main,residual,bound,within",
     twistlab::experiments::run_char_sum},
    {"upper-bound", "Slack of the log|L| upper bound with x = X^e.\n"
                    "CSV columns: X,x,primes,excluded,min_slack,median_slack,fraction_ge_minus5",
     twistlab::experiments::run_upper_bound},
    {"mollified", "Mollified first and second moments.\n"
                  "CSV columns: X,M,J,degenerate,truncated,S1,S1_over_X,S1_prime,S2,S2_over_X,theta,lower_bound,"
                  "classes,multiply_classified,unclassified",
     twistlab::experiments::run_mollified_moments},
    {"moment-growth", "Normalized 2k-th moments over odd squarefree d < X.\n"
                      "CSV columns: k,X,count,moment_sum,normalized",
     twistlab::experiments::run_moment_growth},
    {"prime-sums", "Mertens, Rankin-Selberg, log-power and twisted prime sums.\n"
                   "CSV columns: check,param,x,value,main,residual,drift,bound,within",
     twistlab::experiments::run_prime_sum_checks},
    {"ladder", "Prime-block ladder for (X, M) and its invariants.\n"
               "CSV columns: j,alpha,y,lo,hi,reciprocal_sum,extrapolated,kirila_ratio",
     twistlab::experiments::run_ladder_report},
    {"build-cache", "Build or load the coefficient table for A * 2.5 * X in --cache-dir.\nNo rows; summary: N,file,table_hash",
     twistlab::experiments::run_build_cache},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"twistlab: central values of quadratic twists of the weight-12 cusp form"};
  app.require_subcommand(1);
  app.fallthrough();

  twistlab::experiments::ExperimentConfig cfg;
  int A = 50;
  app.add_option("--x", cfg.X, "Base size X")->capture_default_str();
  app.add_option("--m", cfg.M, "Ladder parameter M")->capture_default_str();
  app.add_option("--a", A, "AFE cutoff multiplier A (cutoff = A d)")->capture_default_str();
  app.add_option("--ell", cfg.ells, "Comma-separated odd l values")->delimiter(',');
  app.add_option("--c", cfg.cs, "Comma-separated odd c values")->delimiter(',');
  app.add_option("--k", cfg.ks, "Comma-separated moment orders from {0, 1, 2}")->delimiter(',');
  app.add_option("--x-exponent", cfg.x_exponent, "x = X^e for the upper bound")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
  app.add_option("--format", cfg.format, "csv, json or svg")->capture_default_str();
  app.add_option("--cache-dir", cfg.cache_dir, "Directory for coefficient tables");
  app.add_flag("--large", cfg.large, "Extend the X sweeps");

  std::map<const CLI::App*, const Command*> by_sub;
  for (const auto& c : kCommands) by_sub[app.add_subcommand(c.name, c.description)] = &c;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.A = A;
    const auto format = twistlab::report::parse_format(cfg.format);
    Workspace ws(cfg);
    const Command* cmd = nullptr;
    for (const auto& [sub, c] : by_sub) {
      if (sub->parsed()) cmd = c;
    }
    const auto report = cmd->run(ws);
    std::cout << twistlab::report::render(report, format);
    std::cout.flush();
    return std::cout ? 0 : 1;
  } catch (const twistlab::UsageError& e) {
    std::cerr << "twistlab: " << e.what() << '\n';
    return 2;
  } catch (const twistlab::IntegrityError& e) {
    std::cerr << "twistlab: integrity failure: " << e.what() << '\n';
    return 3;
  }
}
