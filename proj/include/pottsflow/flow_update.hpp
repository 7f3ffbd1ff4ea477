#pragma once

#include "pottsflow/grid.hpp"
#include "pottsflow/prox.hpp"

namespace pottsflow::detail {

// One-step projected flow update shared by the ADMM family:
// P_alpha((I - div*div/a) q + grad(g)/a).
template <typename Scalar>
VectorField2<Scalar> admm_flow_update(const VectorField2<Scalar>& q,
                                      const ScalarField<Scalar>& g, Scalar a,
                                      Scalar alpha) {
  VectorField2<Scalar> dd = div_adj_div(q);
  VectorField2<Scalar> gg = gradient(g);
  VectorField2<Scalar> arg{q.x - dd.x / a + gg.x / a, q.y - dd.y / a + gg.y / a};
  return project_ball(arg, alpha);
}

}  // namespace pottsflow::detail
