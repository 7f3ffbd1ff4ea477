#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "pottsflow/cli.hpp"

using namespace pottsflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pottsflow-cli-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_test_image(const std::string& path) {
  std::ofstream out(path);
  out << "P2\n4 4\n255\n";
  // bright 2x2 block in the corner of a dark image
  out << "255 255 0 0\n255 255 0 0\n0 0 0 0\n0 0 0 0\n";
}

}  // namespace

TEST_CASE("run_command exits 1 on a missing input") {
  RunConfig cfg;
  cfg.input_pgm = "/nonexistent/input.pgm";
  CHECK(run_command(cfg) == 1);
  cfg = RunConfig{};
  cfg.algo = "made-up";
  CHECK(run_command(cfg) == 1);
}

TEST_CASE("identical configs produce identical traces apart from timing") {
  TempDir d;
  write_test_image(d.file("in.pgm"));
  auto run_once = [&](const std::string& trace) {
    RunConfig cfg;
    cfg.input_pgm = d.file("in.pgm");
    cfg.trace_csv = d.file(trace);
    cfg.eps = 1e-6;
    cfg.max_iters = 500;
    cfg.ref_policy = RefPolicy::Value;
    cfg.ref_energy = 1.0;
    return run_command(cfg);
  };
  CHECK(run_once("t1.csv") == run_once("t2.csv"));
  auto strip_elapsed = [](const std::string& path) {
    std::ifstream in(path);
    std::string out, line;
    while (std::getline(in, line)) {
      const auto cut = line.rfind(',');
      out += line.substr(0, cut);
      out += '\n';
    }
    return out;
  };
  CHECK(strip_elapsed(d.file("t1.csv")) == strip_elapsed(d.file("t2.csv")));
}

TEST_CASE("a huge tolerance converges in one iteration with outputs written") {
  TempDir d;
  write_test_image(d.file("in.pgm"));
  RunConfig cfg;
  cfg.input_pgm = d.file("in.pgm");
  cfg.out_pgm = d.file("out.pgm");
  cfg.trace_csv = d.file("trace.csv");
  cfg.eps = 0.9;
  cfg.ref_policy = RefPolicy::Value;
  cfg.ref_energy = 4.0;  // any energy within 90% of the first iterate
  const int rc = run_command(cfg);
  CHECK(rc == 0);
  CHECK(fs::exists(cfg.out_pgm));
  CHECK(fs::exists(cfg.trace_csv));
  std::ifstream trace(cfg.trace_csv);
  std::string header, row1, row2;
  std::getline(trace, header);
  CHECK(header == "iter,energy,rel_err,residual,elapsed_ms");
  CHECK(std::getline(trace, row1));
  CHECK_FALSE(std::getline(trace, row2));  // exactly one iteration
}

TEST_CASE("run_command converges on the small two-label image") {
  TempDir d;
  write_test_image(d.file("in.pgm"));
  RunConfig cfg;
  cfg.input_pgm = d.file("in.pgm");
  cfg.out_pgm = d.file("label.pgm");
  cfg.algo = "rpadmm-ii";
  cfg.eps = 1e-5;
  cfg.max_iters = 20000;
  cfg.ref_iters = 5000;
  CHECK(run_command(cfg) == 0);
  auto lab = load_pgm(cfg.out_pgm);
  // the bright block is foreground, the rest background
  CHECK(lab(0, 0) == 1.0);
  CHECK(lab(3, 3) == 0.0);
}

TEST_CASE("run_command reports non-convergence with exit code 2") {
  TempDir d;
  write_test_image(d.file("in.pgm"));
  RunConfig cfg;
  cfg.input_pgm = d.file("in.pgm");
  cfg.eps = 1e-12;
  cfg.max_iters = 3;
  cfg.ref_policy = RefPolicy::Value;
  cfg.ref_energy = 123.0;  // unreachable
  CHECK(run_command(cfg) == 2);
}

TEST_CASE("run_command drives the potts model from cost CSVs") {
  TempDir d;
  ScalarFieldXd c0(1, 2), c1(1, 2);
  c0 << 0.1, 0.8;
  c1 << 0.9, 0.2;
  save_cost_csv(c0, d.file("c0.csv"));
  save_cost_csv(c1, d.file("c1.csv"));
  RunConfig cfg;
  cfg.model = "potts";
  cfg.cost_csvs = {d.file("c0.csv"), d.file("c1.csv")};
  cfg.alpha = 0.05;
  cfg.eps = 1e-6;
  cfg.max_iters = 50000;
  cfg.ref_policy = RefPolicy::Self;
  cfg.out_pgm = d.file("labels.pgm");
  CHECK(run_command(cfg) == 0);
  auto lab = load_pgm(cfg.out_pgm);
  CHECK(lab(0, 0) == 0.0);  // label 0 where c0 is cheap
  CHECK(lab(0, 1) == 1.0);
}

TEST_CASE("bench_command writes markdown and csv tables with five rows") {
  TempDir d;
  BenchConfig cfg;
  cfg.size = 8;
  cfg.eps_list = {1e-1, 1e-3};
  cfg.ref_iters = 2000;
  cfg.max_iters = 20000;
  cfg.table_md = d.file("table.md");
  cfg.table_csv = d.file("table.csv");
  CHECK(bench_command(cfg) == 0);

  std::ifstream md(cfg.table_md);
  std::string line;
  int rows = 0;
  bool header_ok = false;
  while (std::getline(md, line)) {
    if (line.rfind("| algorithm |", 0) == 0) header_ok = true;
    for (const char* name : {"padmm-ty", "alg1", "rpadmm-i ", "rpadmm-ii", "rpdrq"})
      if (line.rfind("| " + std::string(name), 0) == 0) ++rows;
  }
  CHECK(header_ok);
  CHECK(rows >= 5);
}
