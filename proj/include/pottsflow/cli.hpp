// Command implementations behind the potts-flow CLI: single segmentation
// runs, the five-algorithm benchmark table, and the verification suite.
#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "pottsflow/costs.hpp"
#include "pottsflow/csv.hpp"
#include "pottsflow/pgm.hpp"
#include "pottsflow/potts.hpp"
#include "pottsflow/synthetic.hpp"
#include "pottsflow/two_label.hpp"
#include "pottsflow/verification.hpp"

namespace pottsflow {

enum class RefPolicy { Value, Run, Self };

struct RunConfig {
  std::string model{"two-label"};  // "two-label" | "potts"
  std::string algo{"rpadmm-ii"};
  double alpha{0.5};
  double eps{1e-4};
  int max_iters{30000};
  SolverParams<double> params{};
  double a1{2.0}, a2{0.0};  // potts block weights; a2 = 0 means 2n
  int labels{2};
  std::vector<double> means{};
  double mu_fg{1.0}, mu_bg{0.0};
  std::string input_pgm{};
  std::vector<std::string> cost_csvs{};  // alternative to input_pgm
  std::string out_pgm{};
  std::string trace_csv{};
  RefPolicy ref_policy{RefPolicy::Run};
  double ref_energy{0.0};
  int ref_iters{30000};
  double beta{0.5};
};

namespace detail {

inline ScalarFieldXd load_image_or_throw(const RunConfig& cfg) {
  if (cfg.input_pgm.empty()) throw std::runtime_error("no input image given");
  return load_pgm(cfg.input_pgm);
}

inline void print_summary(const std::string& algo, int iters, double seconds, double energy,
                          double rel_err) {
  std::printf("%s, %d, %.3f, %.10g, %.3g\n", algo.c_str(), iters, seconds, energy, rel_err);
}

inline int run_command_impl(const RunConfig& cfg) {
  const auto algo = parse_algorithm(cfg.algo);
  if (!algo) throw std::runtime_error("unknown algorithm: " + cfg.algo);

  SolverParams<double> params = cfg.params;
  params.eps = cfg.eps;
  params.max_iters = cfg.max_iters;

  if (cfg.model == "two-label") {
    TwoLabelProblem<double> prob;
    prob.alpha = cfg.alpha;
    if (!cfg.cost_csvs.empty()) {
      if (cfg.cost_csvs.size() != 2)
        throw std::runtime_error("two-label mode needs exactly two cost CSV files");
      prob.cs = load_cost_csv(cfg.cost_csvs[0]);
      prob.ct = load_cost_csv(cfg.cost_csvs[1]);
    } else {
      auto img = detail::load_image_or_throw(cfg);
      std::tie(prob.cs, prob.ct) = build_two_label_costs(img, cfg.mu_fg, cfg.mu_bg);
    }
    prob.validate();

    StopRule rule;
    switch (cfg.ref_policy) {
      case RefPolicy::Value: rule = StopRule::with_reference(cfg.ref_energy); break;
      case RefPolicy::Run:
        rule = StopRule::with_reference(compute_reference_energy(prob, cfg.ref_iters));
        break;
      case RefPolicy::Self: rule = StopRule::self_relative(); break;
    }
    auto res = run(*algo, prob, params, rule);

    if (!cfg.out_pgm.empty()) {
      Eigen::ArrayXXi labels = threshold(res.state.u, cfg.beta).cast<int>();
      save_label_pgm(labels, 2, cfg.out_pgm);
    }
    if (!cfg.trace_csv.empty()) save_trace_csv(res.trace, cfg.trace_csv);
    const double secs = res.trace.empty() ? 0 : res.trace.back().elapsed_ms / 1000.0;
    const double rel = res.trace.empty() ? 0 : res.trace.back().rel_err;
    detail::print_summary(cfg.algo, res.iterations, secs, res.final_energy, rel);
    return res.converged ? 0 : 2;
  }

  if (cfg.model == "potts") {
    PottsProblem<double> prob;
    prob.alpha = cfg.alpha;
    if (!cfg.cost_csvs.empty()) {
      for (const auto& path : cfg.cost_csvs) prob.costs.push_back(load_cost_csv(path));
    } else {
      auto img = detail::load_image_or_throw(cfg);
      std::vector<double> means = cfg.means;
      if (means.empty()) {
        if (cfg.labels < 2) throw std::runtime_error("potts mode needs --labels >= 2");
        for (int i = 0; i < cfg.labels; ++i)
          means.push_back(0.1 + 0.8 * double(i) / double(cfg.labels - 1));
      }
      prob.costs = build_potts_costs(img, means);
    }
    prob.validate();
    const int n = prob.n();

    BlockPreconditioner<double> pc{cfg.params.a, cfg.a1,
                                   cfg.a2 > 0 ? cfg.a2 : 2.0 * n};
    StopRule rule;
    switch (cfg.ref_policy) {
      case RefPolicy::Value: rule = StopRule::with_reference(cfg.ref_energy); break;
      case RefPolicy::Run:
        rule = StopRule::with_reference(compute_reference_energy_potts(prob, cfg.ref_iters));
        break;
      case RefPolicy::Self: rule = StopRule::self_relative(); break;
    }
    auto res = run_potts(*algo, prob, params, pc, rule);

    if (!cfg.out_pgm.empty()) save_label_pgm(argmax_label(res.state.u), n, cfg.out_pgm);
    if (!cfg.trace_csv.empty()) save_trace_csv(res.trace, cfg.trace_csv);
    const double secs = res.trace.empty() ? 0 : res.trace.back().elapsed_ms / 1000.0;
    const double rel = res.trace.empty() ? 0 : res.trace.back().rel_err;
    detail::print_summary(cfg.algo, res.iterations, secs, res.final_energy, rel);
    return res.converged ? 0 : 2;
  }

  throw std::runtime_error("unknown model: " + cfg.model);
}

}  // namespace detail

/// Executes one segmentation run. Exit status 0 on convergence, 2 when the
/// iteration cap was reached first, 1 on configuration or I/O errors (with
/// a diagnostic on stderr).
inline int run_command(const RunConfig& cfg) {
  try {
    return detail::run_command_impl(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

struct BenchConfig {
  std::string model{"two-label"};
  std::string input_pgm{};
  std::string synthetic{"disk"};  // used when no input image: "disk" | "quads"
  int size{64};
  int labels{4};
  std::vector<double> means{};
  double mu_fg{1.0}, mu_bg{0.0};
  double alpha{0.5};
  SolverParams<double> params{};
  double a1{2.0}, a2{0.0};
  std::vector<double> eps_list{1e-4, 1e-6};
  int ref_iters{30000};
  int max_iters{200000};
  std::string table_md{};
  std::string table_csv{};
};

struct BenchRow {
  std::string algo;
  std::vector<int> iters;        // first iteration reaching each eps, -1 if never
  std::vector<double> seconds;   // elapsed at that iteration
};

namespace detail {

inline BenchRow crossings(const std::string& algo, const Trace& trace,
                          const std::vector<double>& eps_list) {
  BenchRow row{algo, {}, {}};
  for (double eps : eps_list) {
    int it = -1;
    double sec = std::numeric_limits<double>::quiet_NaN();
    for (const TraceRow& r : trace)
      if (r.rel_err <= eps) {
        it = r.iter;
        sec = r.elapsed_ms / 1000.0;
        break;
      }
    row.iters.push_back(it);
    row.seconds.push_back(sec);
  }
  return row;
}

inline std::string bench_table_markdown(const std::vector<BenchRow>& rows,
                                        const std::vector<double>& eps_list) {
  std::ostringstream out;
  out << "| algorithm |";
  for (double eps : eps_list) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " iters@%g | seconds@%g |", eps, eps);
    out << buf;
  }
  out << "\n|---|";
  for (std::size_t k = 0; k < eps_list.size(); ++k) out << "---|---|";
  out << "\n";
  for (const BenchRow& r : rows) {
    out << "| " << r.algo << " |";
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      if (r.iters[k] < 0)
        out << " - | - |";
      else {
        char buf[64];
        std::snprintf(buf, sizeof buf, " %d | %.2f |", r.iters[k], r.seconds[k]);
        out << buf;
      }
    }
    out << "\n";
  }
  return out.str();
}

inline std::string bench_table_csv(const std::vector<BenchRow>& rows,
                                   const std::vector<double>& eps_list) {
  std::ostringstream out;
  out << "algorithm";
  for (double eps : eps_list) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ",iters@%g,seconds@%g", eps, eps);
    out << buf;
  }
  out << "\n";
  for (const BenchRow& r : rows) {
    out << r.algo;
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      if (r.iters[k] < 0)
        out << ",,";
      else {
        char buf[64];
        std::snprintf(buf, sizeof buf, ",%d,%.4f", r.iters[k], r.seconds[k]);
        out << buf;
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace detail

namespace detail {

inline int bench_command_impl(const BenchConfig& cfg) {
  std::vector<double> eps_sorted = cfg.eps_list;
  if (eps_sorted.empty()) throw std::runtime_error("bench: empty eps list");
  const double tightest = *std::min_element(eps_sorted.begin(), eps_sorted.end());

  const Algorithm algos[] = {Algorithm::PAdmmTy, Algorithm::Alg1, Algorithm::RpAdmmI,
                             Algorithm::RpAdmmII, Algorithm::RPdrq};
  std::vector<BenchRow> rows;
  bool all_converged = true;

  if (cfg.model == "two-label") {
    TwoLabelProblem<double> prob;
    if (!cfg.input_pgm.empty()) {
      auto img = load_pgm(cfg.input_pgm);
      std::tie(prob.cs, prob.ct) = build_two_label_costs(img, cfg.mu_fg, cfg.mu_bg);
      prob.alpha = cfg.alpha;
    } else {
      if (cfg.synthetic != "disk")
        throw std::runtime_error("two-label bench supports --synthetic disk");
      prob = two_label_disk_instance(cfg.size);
      prob.alpha = cfg.alpha;
    }
    prob.validate();
    const double eref = compute_reference_energy(prob, cfg.ref_iters);
    std::printf("reference energy: %.10g\n", eref);
    for (Algorithm algo : algos) {
      SolverParams<double> p = cfg.params;
      p.eps = tightest;
      p.max_iters = cfg.max_iters;
      auto res = run(algo, prob, p, StopRule::with_reference(eref));
      all_converged = all_converged && res.converged;
      rows.push_back(detail::crossings(algorithm_name(algo), res.trace, eps_sorted));
    }
  } else if (cfg.model == "potts") {
    PottsProblem<double> prob;
    if (!cfg.input_pgm.empty()) {
      auto img = load_pgm(cfg.input_pgm);
      std::vector<double> means = cfg.means;
      if (means.empty())
        for (int i = 0; i < cfg.labels; ++i)
          means.push_back(0.1 + 0.8 * double(i) / double(cfg.labels - 1));
      prob.costs = build_potts_costs(img, means);
      prob.alpha = cfg.alpha;
    } else {
      if (cfg.synthetic != "quads")
        throw std::runtime_error("potts bench supports --synthetic quads");
      prob = potts_quadrant_instance(cfg.size, cfg.labels);
      prob.alpha = cfg.alpha;
    }
    prob.validate();
    const double eref = compute_reference_energy_potts(prob, cfg.ref_iters);
    std::printf("reference energy: %.10g\n", eref);
    for (Algorithm algo : algos) {
      SolverParams<double> p = cfg.params;
      p.eps = tightest;
      p.max_iters = cfg.max_iters;
      BlockPreconditioner<double> pc{p.a, cfg.a1, cfg.a2 > 0 ? cfg.a2 : 2.0 * prob.n()};
      auto res = run_potts(algo, prob, p, pc, StopRule::with_reference(eref));
      all_converged = all_converged && res.converged;
      rows.push_back(detail::crossings(algorithm_name(algo), res.trace, eps_sorted));
    }
  } else {
    throw std::runtime_error("unknown model: " + cfg.model);
  }

  const std::string md = detail::bench_table_markdown(rows, eps_sorted);
  std::fputs(md.c_str(), stdout);
  if (!cfg.table_md.empty()) {
    std::ofstream out(cfg.table_md);
    if (!out) throw std::runtime_error("cannot write table: " + cfg.table_md);
    out << md;
  }
  if (!cfg.table_csv.empty()) {
    std::ofstream out(cfg.table_csv);
    if (!out) throw std::runtime_error("cannot write table: " + cfg.table_csv);
    out << detail::bench_table_csv(rows, eps_sorted);
  }
  return all_converged ? 0 : 2;
}

}  // namespace detail

/// Runs all five algorithms on one instance against a shared reference
/// energy and reports iterations/seconds to each requested tolerance.
/// Exit status 0 when every algorithm reached the tightest tolerance,
/// 2 otherwise, 1 on configuration or I/O errors.
inline int bench_command(const BenchConfig& cfg) {
  try {
    return detail::bench_command_impl(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

/// Prints one pass/fail line per verification invariant.
inline int verify_command() {
  int failed = 0;
  for (const CheckResult& c : verification_suite()) {
    std::printf("%s %s — %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    if (!c.pass) ++failed;
  }
  std::printf("%d check(s) failed\n", failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace pottsflow
