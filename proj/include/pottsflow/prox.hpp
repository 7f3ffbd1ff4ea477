// Pointwise projections and resolvents shared by all solver steps.
#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "pottsflow/grid.hpp"

namespace pottsflow {

/// Radial projection of each 2-vector onto the closed ball of radius alpha.
template <typename Scalar>
VectorField2<Scalar> project_ball(const VectorField2<Scalar>& q, Scalar alpha) {
  if (alpha < Scalar(0)) throw std::invalid_argument("project_ball: alpha must be >= 0");
  if (alpha == Scalar(0)) return VectorField2<Scalar>::Zero(q.shape());
  ScalarField<Scalar> denom = (magnitude(q) / alpha).max(Scalar(1));
  return {q.x / denom, q.y / denom};
}

/// Pointwise min(p, cap).
template <typename Scalar>
ScalarField<Scalar> project_cap(const ScalarField<Scalar>& p,
                                const ScalarField<Scalar>& cap) {
  if (p.rows() != cap.rows() || p.cols() != cap.cols())
    throw std::invalid_argument("project_cap: shape mismatch");
  return p.min(cap);
}

/// Resolvent of the linear source term under a diagonal weight a2*c:
/// pointwise (p + 1) / (a2*c).
template <typename Scalar>
ScalarField<Scalar> resolvent_source(const ScalarField<Scalar>& p_tilde, Scalar a2, Scalar c) {
  if (!(a2 > Scalar(0)) || !(c > Scalar(0)))
    throw std::invalid_argument("resolvent_source: a2 and c must be positive");
  return (p_tilde + Scalar(1)) / (a2 * c);
}

/// Euclidean projection of one point onto the standard simplex
/// {w : w_i >= 0, sum w_i = 1} by the exact sort-and-threshold rule.
template <typename Scalar>
void project_simplex_point(std::vector<Scalar>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<Scalar> s(v);
  std::sort(s.begin(), s.end(), std::greater<Scalar>());
  // rho = largest k with s[k-1] > (s[0]+...+s[k-1] - 1)/k; always >= 1
  int rho = 1;
  Scalar cum = s[0];
  Scalar cum_rho = s[0];
  for (int k = 2; k <= n; ++k) {
    cum += s[k - 1];
    if (s[k - 1] > (cum - Scalar(1)) / Scalar(k)) {
      rho = k;
      cum_rho = cum;
    }
  }
  const Scalar theta = (cum_rho - Scalar(1)) / Scalar(rho);
  for (auto& vi : v) vi = std::max(vi - theta, Scalar(0));
}

/// Per-pixel simplex projection of an n-channel field stack.
template <typename Scalar>
std::vector<ScalarField<Scalar>> project_simplex(const std::vector<ScalarField<Scalar>>& u) {
  const int n = static_cast<int>(u.size());
  if (n < 2) throw std::invalid_argument("project_simplex: needs at least two channels");
  std::vector<ScalarField<Scalar>> out(u);
  const Eigen::Index h = u[0].rows(), w = u[0].cols();
  std::vector<Scalar> v(n);
  for (Eigen::Index j = 0; j < w; ++j) {
    for (Eigen::Index i = 0; i < h; ++i) {
      for (int k = 0; k < n; ++k) v[k] = u[k](i, j);
      project_simplex_point(v);
      for (int k = 0; k < n; ++k) out[k](i, j) = v[k];
    }
  }
  return out;
}

}  // namespace pottsflow
