// Desk-scale ground truth: exhaustive minimizers of the binary models and
// dense eigenvalue checks for the preconditioner feasibility conditions.
// These share the grid calculus with the solvers but none of the solver
// logic, so they certify the optimization path independently.
#pragma once

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pottsflow/grid.hpp"
#include "pottsflow/potts.hpp"
#include "pottsflow/two_label.hpp"

namespace pottsflow {

template <typename Scalar>
struct MincutOracleResult {
  ScalarField<Scalar> labeling;  // binary field
  Scalar energy{0};
};

/// Exhaustive minimum of the binary two-label energy over all 2^|pixels|
/// labelings. Ties keep the lexicographically smallest labeling in
/// row-major pixel order.
template <typename Scalar>
MincutOracleResult<Scalar> brute_force_mincut(const TwoLabelProblem<Scalar>& prob) {
  prob.validate();
  const GridShape s = prob.shape();
  const Eigen::Index npix = s.pixel_count();
  if (npix > 12) throw std::invalid_argument("brute_force_mincut: more than 12 pixels");

  ScalarField<Scalar> u(s.height, s.width);
  MincutOracleResult<Scalar> best;
  bool have = false;
  const std::uint64_t total = std::uint64_t(1) << npix;
  for (std::uint64_t m = 0; m < total; ++m) {
    for (Eigen::Index k = 0; k < npix; ++k) {
      const Eigen::Index i = k / s.width, j = k % s.width;
      u(i, j) = Scalar((m >> (npix - 1 - k)) & 1u);
    }
    const Scalar e = energy_primal(u, prob);
    if (!have || e < best.energy) {
      best = {u, e};
      have = true;
    }
  }
  return best;
}

template <typename Scalar>
struct PottsOracleResult {
  Eigen::ArrayXXi labels;
  Scalar energy{0};
};

/// Binary Potts energy of a label map: per-pixel costs plus alpha times the
/// total variation of each indicator field.
template <typename Scalar>
Scalar binary_potts_energy(const Eigen::ArrayXXi& labels, const PottsProblem<Scalar>& prob) {
  Scalar e = Scalar(0);
  for (int i = 0; i < prob.n(); ++i) {
    ScalarField<Scalar> ind = (labels == i).template cast<Scalar>();
    e += (ind * prob.costs[i]).sum();
    e += prob.alpha * magnitude(gradient(ind)).sum();
  }
  return e;
}

/// Exhaustive minimum of the binary Potts energy; mixed-radix enumeration
/// with the same lexicographic tie rule as the two-label oracle.
template <typename Scalar>
PottsOracleResult<Scalar> brute_force_potts(const PottsProblem<Scalar>& prob) {
  prob.validate();
  const GridShape s = prob.shape();
  const Eigen::Index npix = s.pixel_count();
  const int n = prob.n();
  double combos = 1;
  for (Eigen::Index k = 0; k < npix; ++k) {
    combos *= n;
    if (combos > 1e6) throw std::invalid_argument("brute_force_potts: instance too large");
  }

  Eigen::ArrayXXi labels = Eigen::ArrayXXi::Zero(s.height, s.width);
  std::vector<int> digits(npix, 0);
  PottsOracleResult<Scalar> best;
  bool have = false;
  const std::uint64_t total = static_cast<std::uint64_t>(combos);
  for (std::uint64_t m = 0; m < total; ++m) {
    for (Eigen::Index k = 0; k < npix; ++k) {
      const Eigen::Index i = k / s.width, j = k % s.width;
      labels(i, j) = digits[k];
    }
    const Scalar e = binary_potts_energy(labels, prob);
    if (!have || e < best.energy) {
      best = {labels, e};
      have = true;
    }
    // increment least-significant digit last so ascending m is ascending
    // lexicographic order on (pixel 0, pixel 1, ...)
    for (Eigen::Index k = npix - 1; k >= 0; --k) {
      if (++digits[k] < n) break;
      digits[k] = 0;
    }
  }
  return best;
}

struct PsdResult {
  bool psd{false};
  double min_eigenvalue{0};
};

/// Smallest eigenvalue of a symmetric matrix via a dense self-adjoint
/// eigensolver; refuses matrices that are not symmetric within 1e-12.
template <typename Scalar>
PsdResult psd_check(const DenseMatrix<Scalar>& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("psd_check: matrix not square");
  const double asym = (m - m.transpose()).template lpNorm<Eigen::Infinity>();
  if (asym > 1e-12) throw std::invalid_argument("psd_check: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(m, Eigen::EigenvaluesOnly);
  const double mn = static_cast<double>(es.eigenvalues().minCoeff());
  return {mn >= -tol, mn};
}

// --- dense builders for the feasibility conditions -------------------------

/// Per-pixel coupling matrix A*A of the two-label p-block: [[1,-1],[-1,1]].
template <typename Scalar>
DenseMatrix<Scalar> two_label_coupling() {
  DenseMatrix<Scalar> m(2, 2);
  m << Scalar(1), Scalar(-1), Scalar(-1), Scalar(1);
  return m;
}

/// Per-pixel coupling matrix A*A of the (p_1..p_n, p_s) block:
/// [[I_n, -1],[-1^T, n]].
template <typename Scalar>
DenseMatrix<Scalar> potts_coupling(int n) {
  DenseMatrix<Scalar> m = DenseMatrix<Scalar>::Zero(n + 1, n + 1);
  for (int i = 0; i < n; ++i) {
    m(i, i) = Scalar(1);
    m(i, n) = Scalar(-1);
    m(n, i) = Scalar(-1);
  }
  m(n, n) = Scalar(n);
  return m;
}

/// Diag(a1,...,a1,a2) - A*A, the block-preconditioner feasibility gap.
template <typename Scalar>
DenseMatrix<Scalar> potts_block_gap(int n, Scalar a1, Scalar a2) {
  DenseMatrix<Scalar> m = -potts_coupling<Scalar>(n);
  for (int i = 0; i < n; ++i) m(i, i) += a1;
  m(n, n) += a2;
  return m;
}

/// Dense K*K of the n-label saddle operator on stacked scalar fields:
/// Diag(-Laplacian + I) + Ones(n,n) blocks.
template <typename Scalar>
DenseMatrix<Scalar> materialize_potts_ktk(GridShape s, int n) {
  const Eigen::Index npix = s.pixel_count();
  LinearOp<Scalar> op{n * npix, [s, n, npix](const DenseVector<Scalar>& v) {
                        DenseVector<Scalar> out(n * npix);
                        DenseVector<Scalar> sum = DenseVector<Scalar>::Zero(npix);
                        for (int i = 0; i < n; ++i) sum += v.segment(i * npix, npix);
                        for (int i = 0; i < n; ++i) {
                          ScalarField<Scalar> ui =
                              v.segment(i * npix, npix).reshaped(s.height, s.width).array();
                          ScalarField<Scalar> ri = -laplacian(ui) + ui;
                          out.segment(i * npix, npix) = ri.matrix().reshaped() + sum;
                        }
                        return out;
                      }};
  return materialize_dense(op);
}

/// Dense T0 = Diag(-Laplacian + (n+1) I) on the same space.
template <typename Scalar>
DenseMatrix<Scalar> materialize_potts_t0(GridShape s, int n) {
  const Eigen::Index npix = s.pixel_count();
  LinearOp<Scalar> op{n * npix, [s, n, npix](const DenseVector<Scalar>& v) {
                        DenseVector<Scalar> out(n * npix);
                        for (int i = 0; i < n; ++i) {
                          ScalarField<Scalar> ui =
                              v.segment(i * npix, npix).reshaped(s.height, s.width).array();
                          ScalarField<Scalar> ri = -laplacian(ui) + Scalar(n + 1) * ui;
                          out.segment(i * npix, npix) = ri.matrix().reshaped();
                        }
                        return out;
                      }};
  return materialize_dense(op);
}

}  // namespace pottsflow
