// Discrete calculus on regular pixel grids: forward-difference gradient,
// its exact negative adjoint (divergence), the five-point Laplacian, and
// dense/spectral tooling for verifying operator bounds at small scale.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>

namespace pottsflow {

template <typename Scalar>
using ScalarField = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct GridShape {
  Eigen::Index height{1};
  Eigen::Index width{1};

  Eigen::Index pixel_count() const { return height * width; }
  bool valid() const { return height >= 1 && width >= 1; }
  bool operator==(const GridShape&) const = default;
};

template <typename Scalar>
GridShape shape_of(const ScalarField<Scalar>& f) {
  return GridShape{f.rows(), f.cols()};
}

/// A pair of per-pixel components (x along columns, y along rows).
template <typename Scalar>
struct VectorField2 {
  ScalarField<Scalar> x;
  ScalarField<Scalar> y;

  static VectorField2 Zero(GridShape s) {
    return {ScalarField<Scalar>::Zero(s.height, s.width),
            ScalarField<Scalar>::Zero(s.height, s.width)};
  }
  GridShape shape() const { return {x.rows(), x.cols()}; }
};

using ScalarFieldXd = ScalarField<double>;
using VectorField2Xd = VectorField2<double>;

template <typename Scalar>
Scalar dot(const ScalarField<Scalar>& a, const ScalarField<Scalar>& b) {
  return (a * b).sum();
}

template <typename Scalar>
Scalar dot(const VectorField2<Scalar>& a, const VectorField2<Scalar>& b) {
  return (a.x * b.x).sum() + (a.y * b.y).sum();
}

template <typename Scalar>
Scalar norm(const ScalarField<Scalar>& a) {
  return std::sqrt(dot(a, a));
}

template <typename Scalar>
Scalar norm(const VectorField2<Scalar>& a) {
  return std::sqrt(dot(a, a));
}

/// Pointwise Euclidean magnitude of a vector field.
template <typename Scalar>
ScalarField<Scalar> magnitude(const VectorField2<Scalar>& q) {
  return (q.x.square() + q.y.square()).sqrt();
}

/// Forward differences with Neumann boundary: the last column of the
/// x-component and the last row of the y-component are zero.
template <typename Scalar>
VectorField2<Scalar> gradient(const ScalarField<Scalar>& u) {
  const Eigen::Index h = u.rows(), w = u.cols();
  VectorField2<Scalar> g = VectorField2<Scalar>::Zero({h, w});
  g.x.leftCols(w - 1) = u.rightCols(w - 1) - u.leftCols(w - 1);
  g.y.topRows(h - 1) = u.bottomRows(h - 1) - u.topRows(h - 1);
  return g;
}

/// Negative adjoint of gradient, so that <grad u, q> = -<u, div q> holds
/// to machine precision for all fields.
template <typename Scalar>
ScalarField<Scalar> divergence(const VectorField2<Scalar>& q) {
  const Eigen::Index h = q.x.rows(), w = q.x.cols();
  ScalarField<Scalar> d = ScalarField<Scalar>::Zero(h, w);
  d.leftCols(w - 1) += q.x.leftCols(w - 1);
  d.rightCols(w - 1) -= q.x.leftCols(w - 1);
  d.topRows(h - 1) += q.y.topRows(h - 1);
  d.bottomRows(h - 1) -= q.y.topRows(h - 1);
  return d;
}

/// Five-point Laplacian, defined as the exact composition div(grad u).
template <typename Scalar>
ScalarField<Scalar> laplacian(const ScalarField<Scalar>& u) {
  return divergence(gradient(u));
}

/// div*div acting on vector fields; equals -grad(div q).
template <typename Scalar>
VectorField2<Scalar> div_adj_div(const VectorField2<Scalar>& q) {
  VectorField2<Scalar> g = gradient(divergence(q));
  return {-g.x, -g.y};
}

/// A symmetric linear map on flattened field vectors, for norm estimation
/// and dense materialization.
template <typename Scalar>
struct LinearOp {
  Eigen::Index dim{0};
  std::function<DenseVector<Scalar>(const DenseVector<Scalar>&)> apply;
};

template <typename Scalar>
LinearOp<Scalar> identity_op(Eigen::Index dim) {
  return {dim, [](const DenseVector<Scalar>& v) { return v; }};
}

template <typename Scalar>
LinearOp<Scalar> neg_laplacian_op(GridShape s) {
  return {s.pixel_count(), [s](const DenseVector<Scalar>& v) {
            ScalarField<Scalar> u = v.reshaped(s.height, s.width).array();
            ScalarField<Scalar> r = -laplacian(u);
            return DenseVector<Scalar>(r.matrix().reshaped());
          }};
}

/// div*div on the 2*H*W-dimensional space of vector fields (x block first).
/// Applies the stencils through zero-copy maps; kept consistent with the
/// canonical -grad(div q) composition by a unit test.
template <typename Scalar>
LinearOp<Scalar> div_adj_div_op(GridShape s) {
  const Eigen::Index n = s.pixel_count();
  return {2 * n, [s, n](const DenseVector<Scalar>& v) {
            const Eigen::Index h = s.height, w = s.width;
            Eigen::Map<const ScalarField<Scalar>> qx(v.data(), h, w);
            Eigen::Map<const ScalarField<Scalar>> qy(v.data() + n, h, w);
            ScalarField<Scalar> d = ScalarField<Scalar>::Zero(h, w);
            d.leftCols(w - 1) += qx.leftCols(w - 1);
            d.rightCols(w - 1) -= qx.leftCols(w - 1);
            d.topRows(h - 1) += qy.topRows(h - 1);
            d.bottomRows(h - 1) -= qy.topRows(h - 1);
            DenseVector<Scalar> out = DenseVector<Scalar>::Zero(2 * n);
            Eigen::Map<ScalarField<Scalar>> ox(out.data(), h, w);
            Eigen::Map<ScalarField<Scalar>> oy(out.data() + n, h, w);
            ox.leftCols(w - 1) = d.leftCols(w - 1) - d.rightCols(w - 1);
            oy.topRows(h - 1) = d.topRows(h - 1) - d.bottomRows(h - 1);
            return out;
          }};
}

struct NormEstimate {
  double value{0.0};
  bool converged{false};
  int iterations{0};
};

/// Power iteration on a symmetric positive semi-definite operator. The
/// returned Rayleigh quotient never exceeds the true largest eigenvalue.
/// Starts from a fixed seeded vector for reproducibility.
template <typename Scalar>
NormEstimate estimate_operator_norm(const LinearOp<Scalar>& op, int max_iters,
                                    double tol, std::uint64_t seed = 20240901ull) {
  if (max_iters < 1) throw std::invalid_argument("estimate_operator_norm: max_iters must be >= 1");
  std::mt19937_64 rng(seed);
  DenseVector<Scalar> v(op.dim);
  for (Eigen::Index i = 0; i < op.dim; ++i) {
    // top 53 bits -> uniform in [0,1), mapped to [-1,1); avoids the
    // implementation-defined std distributions.
    const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v[i] = Scalar(2.0 * u01 - 1.0);
  }
  v.normalize();

  double lambda = 0.0;
  double lambda_prev = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    DenseVector<Scalar> w = op.apply(v);
    lambda = static_cast<double>(v.dot(w));
    const double wn = static_cast<double>(w.norm());
    if (wn == 0.0) return {0.0, true, it};
    v = w / Scalar(wn);
    if (std::abs(lambda - lambda_prev) < tol) return {lambda, true, it};
    lambda_prev = lambda;
  }
  return {lambda, false, max_iters};
}

/// Applies the operator to every canonical basis vector. Guarded to small
/// dimensions (64 pixels of a scalar field, or both components of a vector
/// field on up to 64 pixels).
template <typename Scalar>
DenseMatrix<Scalar> materialize_dense(const LinearOp<Scalar>& op) {
  if (op.dim > 128)
    throw std::invalid_argument("materialize_dense: operator dimension exceeds 128");
  DenseMatrix<Scalar> m(op.dim, op.dim);
  DenseVector<Scalar> e = DenseVector<Scalar>::Zero(op.dim);
  for (Eigen::Index j = 0; j < op.dim; ++j) {
    e[j] = Scalar(1);
    m.col(j) = op.apply(e);
    e[j] = Scalar(0);
  }
  return m;
}

}  // namespace pottsflow
