// Cost-field and convergence-trace CSV formats.
//
// Cost CSV: a "# rows,cols" header line followed by rows lines of
// comma-separated values, row-major.
// Trace CSV: fixed header iter,energy,rel_err,residual,elapsed_ms.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pottsflow/grid.hpp"
#include "pottsflow/solver.hpp"

namespace pottsflow {

template <typename Scalar>
void save_cost_csv(const ScalarField<Scalar>& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write cost CSV: " + path);
  out << "# " << f.rows() << "," << f.cols() << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(f(i, j)));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
}

template <typename Scalar = double>
ScalarField<Scalar> load_cost_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cost CSV: " + path);
  std::string header;
  if (!std::getline(in, header) || header.empty() || header[0] != '#')
    throw std::runtime_error("cost CSV missing '# rows,cols' header: " + path);
  Eigen::Index rows = 0, cols = 0;
  {
    std::istringstream hs(header.substr(1));
    char comma = 0;
    if (!(hs >> rows >> comma >> cols) || comma != ',' || rows < 1 || cols < 1)
      throw std::runtime_error("cost CSV malformed header: " + path);
  }
  ScalarField<Scalar> f(rows, cols);
  std::string line;
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("cost CSV truncated: " + path);
    std::istringstream ls(line);
    std::string cell;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!std::getline(ls, cell, ','))
        throw std::runtime_error("cost CSV truncated row: " + path);
      f(i, j) = Scalar(std::stod(cell));
    }
  }
  return f;
}

inline std::string trace_to_csv(const Trace& trace) {
  std::ostringstream out;
  out << "iter,energy,rel_err,residual,elapsed_ms\n";
  char buf[160];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.6f\n", r.iter, r.energy,
                  r.rel_err, r.residual, r.elapsed_ms);
    out << buf;
  }
  return out.str();
}

inline void save_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace CSV: " + path);
  out << trace_to_csv(trace);
}

}  // namespace pottsflow
