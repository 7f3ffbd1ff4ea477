// Machine-checkable feasibility and consistency suite: operator-norm
// bounds, preconditioner gaps, adjointness, and oracle self-consistency.
// Used by the `verify` CLI subcommand and by the acceptance tests.
#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "pottsflow/oracle.hpp"
#include "pottsflow/srbgs.hpp"
#include "pottsflow/synthetic.hpp"

namespace pottsflow {

struct CheckResult {
  std::string name;
  bool pass{false};
  std::string detail;
};

namespace detail {

inline std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

}  // namespace detail

/// ||div*div|| <= 8 on a range of grids, approaching 8 from below.
inline std::vector<CheckResult> check_operator_norm_bound() {
  std::vector<CheckResult> out;
  const GridShape shapes[] = {{2, 2}, {3, 3}, {16, 16}, {64, 64}, {128, 128}};
  double big = 0;
  for (const GridShape& s : shapes) {
    auto est = estimate_operator_norm(div_adj_div_op<double>(s), 20000, 1e-9);
    const bool ok = est.value <= 8.0 + 1e-9;
    char name[64];
    std::snprintf(name, sizeof name, "operator-norm div*div %lldx%lld",
                  static_cast<long long>(s.height), static_cast<long long>(s.width));
    out.push_back({name, ok, detail::fmt("estimate %.9f <= 8", est.value)});
    if (s.height == 128) big = est.value;
  }
  out.push_back({"operator-norm approaches 8 at 128x128", big > 7.5,
                 detail::fmt("estimate %.9f > 7.5", big)});
  return out;
}

/// The four preconditioner feasibility families, as minimum eigenvalues of
/// the materialized gaps.
inline std::vector<CheckResult> check_preconditioner_feasibility() {
  std::vector<CheckResult> out;

  {
    DenseMatrix<double> gap =
        2.0 * DenseMatrix<double>::Identity(2, 2) - two_label_coupling<double>();
    auto r = psd_check(gap, 1e-10);
    out.push_back({"two-label p-block gap 2I - A*A", r.psd,
                   detail::fmt("min eigenvalue %.3e", r.min_eigenvalue)});
  }

  for (int n : {2, 3, 4, 6}) {
    auto r = psd_check(potts_block_gap<double>(n, 2.0, 2.0 * n), 1e-10);
    out.push_back({"potts block gap diag(2,..,2,2n) - A*A, n=" + std::to_string(n), r.psd,
                   detail::fmt("min eigenvalue %.3e", r.min_eigenvalue)});
  }

  {
    bool all_indefinite = true;
    double worst = 0;
    for (int n : {2, 3, 4, 6}) {
      auto r = psd_check(potts_block_gap<double>(n, 2.0, 2.0 * n - 0.5), 1e-10);
      all_indefinite = all_indefinite && !r.psd;
      worst = std::min(worst, r.min_eigenvalue);
    }
    out.push_back({"potts block gap sharpness at a2 = 2n - 0.5", all_indefinite,
                   detail::fmt("min eigenvalue %.3e < 0", worst)});
  }

  for (int n : {2, 3, 4}) {
    double worst = 1;
    bool ok = true;
    for (GridShape s : {GridShape{1, 1}, GridShape{2, 3}, GridShape{3, 3}, GridShape{4, 4}}) {
      DenseMatrix<double> gap =
          materialize_potts_t0<double>(s, n) - materialize_potts_ktk<double>(s, n);
      auto r = psd_check(gap, 1e-10);
      ok = ok && r.psd;
      worst = std::min(worst, r.min_eigenvalue);
    }
    out.push_back({"T0 - K*K gap on grids <= 4x4, n=" + std::to_string(n), ok,
                   detail::fmt("min eigenvalue %.3e", worst)});
  }

  {
    const std::pair<double, double> coeffs[] = {{0.4, 0.2}, {2.0, 1.0}, {10.0, 2.0}};
    bool ok = true;
    double worst = 1;
    for (auto [gamma, nu] : coeffs)
      for (GridShape s : {GridShape{1, 1}, GridShape{2, 3}, GridShape{4, 4}, GridShape{5, 6},
                          GridShape{6, 6}}) {
        auto r = psd_check(srbgs_splitting_gap(HelmholtzOp<double>{gamma, nu, s}), 1e-10);
        ok = ok && r.psd;
        worst = std::min(worst, r.min_eigenvalue);
      }
    out.push_back({"sRBGS splitting gap M - T on grids <= 6x6", ok,
                   detail::fmt("min eigenvalue %.3e", worst)});
  }

  return out;
}

inline CheckResult check_adjointness() {
  const GridShape shapes[] = {{1, 1}, {1, 5}, {4, 1}, {3, 3}, {16, 16}, {64, 64}};
  double worst = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const GridShape s = shapes[rep % 6];
    ScalarFieldXd u = random_field(s, -2, 2, 400 + rep);
    VectorField2Xd q{random_field(s, -2, 2, 900 + rep), random_field(s, -2, 2, 1400 + rep)};
    const double err =
        std::abs(dot(gradient(u), q) + dot(u, divergence(q))) / (norm(u) * norm(q) + 1.0);
    worst = std::max(worst, err);
  }
  return {"gradient/divergence adjointness", worst <= 1e-10,
          detail::fmt("worst scaled defect %.3e", worst)};
}

inline CheckResult check_oracle_self_consistency() {
  bool ok = true;
  for (std::uint64_t seed : {3, 13}) {
    TwoLabelProblem<double> p{random_field({3, 3}, 0, 1, seed),
                              random_field({3, 3}, 0, 1, seed + 1), 0.3};
    auto r = brute_force_mincut(p);
    ok = ok && std::abs(r.energy - energy_primal(r.labeling, p)) <= 1e-12;
  }
  for (std::uint64_t seed : {23, 29}) {
    PottsProblem<double> p{{random_field({2, 2}, 0, 1, seed), random_field({2, 2}, 0, 1, seed + 1),
                            random_field({2, 2}, 0, 1, seed + 2)},
                           0.3};
    auto r = brute_force_potts(p);
    ok = ok && std::abs(r.energy - binary_potts_energy(r.labels, p)) <= 1e-12;
  }
  return {"oracle energy self-consistency", ok, "re-evaluated energies match"};
}

inline std::vector<CheckResult> verification_suite() {
  std::vector<CheckResult> out = check_operator_norm_bound();
  for (auto& c : check_preconditioner_feasibility()) out.push_back(std::move(c));
  out.push_back(check_adjointness());
  out.push_back(check_oracle_self_consistency());
  return out;
}

}  // namespace pottsflow
