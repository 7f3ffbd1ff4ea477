// Symmetric red-black Gauss-Seidel preconditioning for grid operators of
// the form T = gamma*I - nu*Laplacian (five-point stencil, Neumann).
#pragma once

#include <stdexcept>

#include "pottsflow/grid.hpp"

namespace pottsflow {

template <typename Scalar>
struct HelmholtzOp {
  Scalar gamma{1};  // zeroth-order coefficient, > 0
  Scalar nu{1};     // Laplacian coefficient, > 0
  GridShape shape;

  void validate() const {
    if (!(gamma > Scalar(0)) || !(nu > Scalar(0)))
      throw std::invalid_argument("HelmholtzOp: gamma and nu must be positive");
    if (!shape.valid()) throw std::invalid_argument("HelmholtzOp: invalid grid shape");
  }
};

namespace detail {

// Number of grid neighbours (the diagonal of -Laplacian at this pixel).
inline int neighbour_count(Eigen::Index i, Eigen::Index j, const GridShape& s) {
  return int(i > 0) + int(i + 1 < s.height) + int(j > 0) + int(j + 1 < s.width);
}

template <typename Scalar>
Scalar neighbour_sum(const ScalarField<Scalar>& x, Eigen::Index i, Eigen::Index j) {
  Scalar acc = Scalar(0);
  if (i > 0) acc += x(i - 1, j);
  if (i + 1 < x.rows()) acc += x(i + 1, j);
  if (j > 0) acc += x(i, j - 1);
  if (j + 1 < x.cols()) acc += x(i, j + 1);
  return acc;
}

// In-place Gauss-Seidel relaxation of T x = b over one colour class.
// Red pixels have (i + j) even.
template <typename Scalar>
void relax_colour(const HelmholtzOp<Scalar>& op, const ScalarField<Scalar>& b,
                  ScalarField<Scalar>& x, int colour) {
  for (Eigen::Index j = 0; j < op.shape.width; ++j) {
    for (Eigen::Index i = 0; i < op.shape.height; ++i) {
      if (((i + j) & 1) != colour) continue;
      const Scalar diag = op.gamma + op.nu * Scalar(neighbour_count(i, j, op.shape));
      x(i, j) = (b(i, j) + op.nu * neighbour_sum(x, i, j)) / diag;
    }
  }
}

}  // namespace detail

/// Applies T = gamma*I - nu*Laplacian directly (five-point stencil).
template <typename Scalar>
ScalarField<Scalar> helmholtz_apply(const HelmholtzOp<Scalar>& op,
                                    const ScalarField<Scalar>& x) {
  ScalarField<Scalar> r(op.shape.height, op.shape.width);
  for (Eigen::Index j = 0; j < op.shape.width; ++j) {
    for (Eigen::Index i = 0; i < op.shape.height; ++i) {
      const Scalar diag = op.gamma + op.nu * Scalar(detail::neighbour_count(i, j, op.shape));
      r(i, j) = diag * x(i, j) - op.nu * detail::neighbour_sum(x, i, j);
    }
  }
  return r;
}

/// One symmetric red-black sweep: x + M^{-1}(b - T x), where M is the
/// symmetric Gauss-Seidel splitting of T in red-black ordering. Forward
/// half-sweeps update red (i+j even) then black; the backward pass goes
/// black then red.
template <typename Scalar>
ScalarField<Scalar> srbgs_apply(const HelmholtzOp<Scalar>& op,
                                const ScalarField<Scalar>& b,
                                const ScalarField<Scalar>& x) {
  op.validate();
  if (shape_of(b) != op.shape || shape_of(x) != op.shape)
    throw std::invalid_argument("srbgs_apply: shape mismatch");
  ScalarField<Scalar> out = x;
  detail::relax_colour(op, b, out, 0);
  detail::relax_colour(op, b, out, 1);
  detail::relax_colour(op, b, out, 1);
  detail::relax_colour(op, b, out, 0);
  return out;
}

/// Dense T in red-black ordering (all red pixels first).
template <typename Scalar>
DenseMatrix<Scalar> materialize_helmholtz_rb(const HelmholtzOp<Scalar>& op) {
  const Eigen::Index n = op.shape.pixel_count();
  std::vector<Eigen::Index> order;
  order.reserve(n);
  for (int colour = 0; colour <= 1; ++colour)
    for (Eigen::Index j = 0; j < op.shape.width; ++j)
      for (Eigen::Index i = 0; i < op.shape.height; ++i)
        if (((i + j) & 1) == colour) order.push_back(i + j * op.shape.height);

  LinearOp<Scalar> lop{n, [&op](const DenseVector<Scalar>& v) {
                         ScalarField<Scalar> u =
                             v.reshaped(op.shape.height, op.shape.width).array();
                         return DenseVector<Scalar>(
                             helmholtz_apply(op, u).matrix().reshaped());
                       }};
  DenseMatrix<Scalar> t_natural = materialize_dense(lop);
  DenseMatrix<Scalar> t(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) t(a, b) = t_natural(order[a], order[b]);
  return t;
}

/// Materializes M - T = E D^{-1} E^T where M = (D - E) D^{-1} (D - E^T)
/// is the symmetric Gauss-Seidel splitting of T = D - E - E^T in red-black
/// ordering. Positive semi-definiteness of the gap is the preconditioner
/// feasibility condition.
template <typename Scalar>
DenseMatrix<Scalar> srbgs_splitting_gap(const HelmholtzOp<Scalar>& op) {
  op.validate();
  if (op.shape.height > 6 || op.shape.width > 6)
    throw std::invalid_argument("srbgs_splitting_gap: grid larger than 6x6");
  DenseMatrix<Scalar> t = materialize_helmholtz_rb(op);
  DenseMatrix<Scalar> d = t.diagonal().asDiagonal();
  DenseMatrix<Scalar> e = -DenseMatrix<Scalar>(t.template triangularView<Eigen::StrictlyLower>());
  DenseMatrix<Scalar> dinv = t.diagonal().cwiseInverse().asDiagonal();
  DenseMatrix<Scalar> m = (d - e) * dinv * (d - e.transpose());
  return m - t;
}

}  // namespace pottsflow
