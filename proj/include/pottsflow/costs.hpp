// Data-term construction from a grayscale image: L1 distance to fixed
// label means. Cutting the source edge (labelling foreground) is cheap
// where the image matches the foreground mean.
#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "pottsflow/grid.hpp"

namespace pottsflow {

template <typename Scalar>
std::pair<ScalarField<Scalar>, ScalarField<Scalar>> build_two_label_costs(
    const ScalarField<Scalar>& f, Scalar mu_fg, Scalar mu_bg) {
  ScalarField<Scalar> cs = (f - mu_bg).abs();
  ScalarField<Scalar> ct = (f - mu_fg).abs();
  return {std::move(cs), std::move(ct)};
}

template <typename Scalar>
std::vector<ScalarField<Scalar>> build_potts_costs(const ScalarField<Scalar>& f,
                                                   const std::vector<Scalar>& means) {
  if (means.size() < 2) throw std::invalid_argument("build_potts_costs: need n >= 2 means");
  std::vector<ScalarField<Scalar>> costs;
  costs.reserve(means.size());
  for (Scalar m : means) costs.push_back((f - m).abs());
  return costs;
}

}  // namespace pottsflow
