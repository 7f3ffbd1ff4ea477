// potts-flow: continuous max-flow / min-cut segmentation benchmark CLI.
#include <CLI11.hpp>

#include <Eigen/Core>

#include <cstdlib>
#include <string>

#include "pottsflow/cli.hpp"

namespace {

// POTTS_FLOW_THREADS caps internal parallelism; the solvers themselves run
// deterministically regardless of the setting.
bool apply_thread_cap() {
  const char* env = std::getenv("POTTS_FLOW_THREADS");
  if (!env) return true;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) {
    std::fprintf(stderr, "invalid POTTS_FLOW_THREADS value: %s\n", env);
    return false;
  }
  Eigen::setNbThreads(static_cast<int>(v));
  return true;
}

void add_solver_flags(CLI::App* cmd, pottsflow::SolverParams<double>& p) {
  cmd->add_option("--c", p.c, "multiplier step size");
  cmd->add_option("--a", p.a, "flow-block proximal weight (>= 8)");
  cmd->add_option("--a-tilde", p.a_tilde, "p-block proximal weight (>= 2)");
  cmd->add_option("--rho", p.rho, "Eckstein-Bertsekas / Douglas-Rachford relaxation in (0,2)");
  cmd->add_option("--r", p.r, "Fortin-Glowinski relaxation in (0,(sqrt5+1)/2)");
  cmd->add_option("--sigma", p.sigma, "primal-dual / DR step size sigma");
  cmd->add_option("--tau", p.tau, "primal-dual / DR step size tau");
}

void add_ref_flags(CLI::App* cmd, pottsflow::RunConfig& cfg, bool& self_flag,
                   bool& have_ref_energy) {
  cmd->add_option_function<double>(
         "--ref-energy",
         [&cfg, &have_ref_energy](double v) {
           cfg.ref_policy = pottsflow::RefPolicy::Value;
           cfg.ref_energy = v;
           have_ref_energy = true;
         },
         "stop against this reference energy");
  cmd->add_option("--ref-run", cfg.ref_iters,
                  "iterations of the Douglas-Rachford reference run (default policy)");
  cmd->add_flag("--ref-self", self_flag,
                "stop on the relative change of the energy between iterations");
}

}  // namespace

int main(int argc, char** argv) {
  if (!apply_thread_cap()) return 1;

  CLI::App app{"continuous max-flow / min-cut segmentation solvers"};
  app.require_subcommand(1);

  pottsflow::RunConfig run_cfg;
  bool run_self = false, run_have_ref = false;

  std::string cs_csv, ct_csv;
  auto* seg2 = app.add_subcommand("segment2", "two-label segmentation");
  seg2->add_option("--input", run_cfg.input_pgm, "input PGM image (P2 or P5)");
  seg2->add_option("--cs-csv", cs_csv, "source-capacity CSV instead of an image");
  seg2->add_option("--ct-csv", ct_csv, "sink-capacity CSV instead of an image");
  seg2->add_option("--mu-fg", run_cfg.mu_fg, "foreground mean");
  seg2->add_option("--mu-bg", run_cfg.mu_bg, "background mean");
  seg2->add_option("--alpha", run_cfg.alpha, "total-variation weight");
  seg2->add_option("--algo", run_cfg.algo,
                   "padmm-ty | rpadmm-i | rpadmm-ii | rpdrq | alg1");
  seg2->add_option("--eps", run_cfg.eps, "stopping tolerance");
  seg2->add_option("--max-iters", run_cfg.max_iters, "iteration cap");
  seg2->add_option("--beta", run_cfg.beta, "threshold for the binary labelling");
  seg2->add_option("--out", run_cfg.out_pgm, "output label PGM");
  seg2->add_option("--trace", run_cfg.trace_csv, "output trace CSV");
  add_solver_flags(seg2, run_cfg.params);
  add_ref_flags(seg2, run_cfg, run_self, run_have_ref);

  auto* segn = app.add_subcommand("segmentn", "n-label segmentation");
  segn->add_option("--input", run_cfg.input_pgm, "input PGM image (P2 or P5)");
  segn->add_option("--cost-csv", run_cfg.cost_csvs, "one cost CSV per label");
  segn->add_option("--labels", run_cfg.labels, "number of labels");
  segn->add_option("--means", run_cfg.means, "label means, comma separated")
      ->delimiter(',');
  segn->add_option("--alpha", run_cfg.alpha, "total-variation weight");
  segn->add_option("--algo", run_cfg.algo,
                   "padmm-ty | rpadmm-i | rpadmm-ii | rpdrq | alg1");
  segn->add_option("--eps", run_cfg.eps, "stopping tolerance");
  segn->add_option("--max-iters", run_cfg.max_iters, "iteration cap");
  segn->add_option("--a1", run_cfg.a1, "p-block weight (>= 2)");
  segn->add_option("--a2", run_cfg.a2, "source-block weight (>= 2n; default 2n)");
  segn->add_option("--out", run_cfg.out_pgm, "output label PGM");
  segn->add_option("--trace", run_cfg.trace_csv, "output trace CSV");
  add_solver_flags(segn, run_cfg.params);
  add_ref_flags(segn, run_cfg, run_self, run_have_ref);

  pottsflow::BenchConfig bench_cfg;
  bool bench_all = false;
  auto* bench = app.add_subcommand("bench", "run all five algorithms and tabulate");
  bench->add_flag("--all", bench_all, "run all algorithms (always on)");
  bench->add_option("--model", bench_cfg.model, "two-label | potts");
  bench->add_option("--input", bench_cfg.input_pgm, "input PGM image");
  bench->add_option("--synthetic", bench_cfg.synthetic, "disk | quads (no input image)");
  bench->add_option("--size", bench_cfg.size, "synthetic instance size");
  bench->add_option("--labels", bench_cfg.labels, "number of labels (potts)");
  bench->add_option("--means", bench_cfg.means, "label means")->delimiter(',');
  bench->add_option("--mu-fg", bench_cfg.mu_fg, "foreground mean");
  bench->add_option("--mu-bg", bench_cfg.mu_bg, "background mean");
  bench->add_option("--alpha", bench_cfg.alpha, "total-variation weight");
  bench->add_option("--eps", bench_cfg.eps_list, "tolerances, comma separated")
      ->delimiter(',');
  bench->add_option("--max-iters", bench_cfg.max_iters, "iteration cap per algorithm");
  bench->add_option("--ref-run", bench_cfg.ref_iters, "reference run iterations");
  bench->add_option("--table", bench_cfg.table_md, "markdown table output path");
  bench->add_option("--table-csv", bench_cfg.table_csv, "CSV table output path");
  add_solver_flags(bench, bench_cfg.params);
  bench->add_option("--a1", bench_cfg.a1, "p-block weight (potts)");
  bench->add_option("--a2", bench_cfg.a2, "source-block weight (potts)");

  auto* verify = app.add_subcommand("verify", "run the oracle and feasibility suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (seg2->parsed() || segn->parsed()) {
      run_cfg.model = seg2->parsed() ? "two-label" : "potts";
      if (seg2->parsed() && !cs_csv.empty() && !ct_csv.empty())
        run_cfg.cost_csvs = {cs_csv, ct_csv};
      else if (seg2->parsed() && (cs_csv.empty() != ct_csv.empty())) {
        std::fprintf(stderr, "error: --cs-csv and --ct-csv must be given together\n");
        return 1;
      }
      if (run_self) run_cfg.ref_policy = pottsflow::RefPolicy::Self;
      return pottsflow::run_command(run_cfg);
    }
    if (bench->parsed()) {
      if (bench_cfg.model == "potts" && bench_cfg.synthetic == "disk" &&
          bench_cfg.input_pgm.empty())
        bench_cfg.synthetic = "quads";
      return pottsflow::bench_command(bench_cfg);
    }
    if (verify->parsed()) return pottsflow::verify_command();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
