// Deterministic synthetic inputs for tests and benchmarks.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pottsflow/costs.hpp"
#include "pottsflow/grid.hpp"
#include "pottsflow/potts.hpp"
#include "pottsflow/two_label.hpp"

namespace pottsflow {

/// Seeded uniform doubles in [lo, hi); uses the raw mt19937_64 stream so the
/// values are identical on every platform.
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : rng_(seed) {}
  double next(double lo = 0.0, double hi = 1.0) {
    const double u01 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u01;
  }

 private:
  std::mt19937_64 rng_;
};

template <typename Scalar = double>
ScalarField<Scalar> random_field(GridShape s, double lo, double hi, std::uint64_t seed) {
  UniformRng rng(seed);
  ScalarField<Scalar> f(s.height, s.width);
  for (Eigen::Index j = 0; j < s.width; ++j)
    for (Eigen::Index i = 0; i < s.height; ++i) f(i, j) = Scalar(rng.next(lo, hi));
  return f;
}

/// Disk of one intensity on a background of another, with additive uniform
/// noise, clamped to [0,1].
template <typename Scalar = double>
ScalarField<Scalar> disk_image(Eigen::Index size, double fg = 1.0, double bg = 0.0,
                               double radius_frac = 0.3, double noise_amp = 0.1,
                               std::uint64_t seed = 7) {
  UniformRng rng(seed);
  ScalarField<Scalar> f(size, size);
  const double cy = 0.5 * (size - 1), cx = 0.5 * (size - 1);
  const double r = radius_frac * size;
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j) {
      const double d2 = (i - cy) * (i - cy) + (j - cx) * (j - cx);
      double v = d2 <= r * r ? fg : bg;
      v += rng.next(-noise_amp, noise_amp);
      f(i, j) = Scalar(v < 0 ? 0 : (v > 1 ? 1 : v));
    }
  return f;
}

/// Four-quadrant image taking the given mean intensities plus noise.
template <typename Scalar = double>
ScalarField<Scalar> quadrant_image(Eigen::Index size, const std::vector<Scalar>& means,
                                   double noise_amp = 0.1, std::uint64_t seed = 11) {
  UniformRng rng(seed);
  ScalarField<Scalar> f(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j) {
      const int quad = (i < size / 2 ? 0 : 2) + (j < size / 2 ? 0 : 1);
      double v = static_cast<double>(means[quad % means.size()]);
      v += rng.next(-noise_amp, noise_amp);
      f(i, j) = Scalar(v < 0 ? 0 : (v > 1 ? 1 : v));
    }
  return f;
}

/// The fixed two-label benchmark instance: low-contrast disk with 10%
/// noise, alpha = 0.5. The noise exceeds half the contrast, so the
/// regularizer has to do real work and solver behaviour matches larger
/// natural images, while the disk stays above the TV break-even radius
/// (the optimal labelling recovers it rather than collapsing to empty).
template <typename Scalar = double>
TwoLabelProblem<Scalar> two_label_disk_instance(Eigen::Index size) {
  auto f = disk_image<Scalar>(size, 0.575, 0.425);
  auto [cs, ct] = build_two_label_costs(f, Scalar(0.575), Scalar(0.425));
  return {cs, ct, Scalar(0.5)};
}

/// The fixed n-label benchmark instance: noisy quadrants, alpha = 0.5.
template <typename Scalar = double>
PottsProblem<Scalar> potts_quadrant_instance(Eigen::Index size, int n = 4) {
  std::vector<Scalar> means;
  for (int i = 0; i < n; ++i)
    means.push_back(n == 1 ? Scalar(0.5) : Scalar(0.1 + 0.8 * double(i) / double(n - 1)));
  auto f = quadrant_image<Scalar>(size, means);
  return {build_potts_costs(f, means), Scalar(0.5)};
}

}  // namespace pottsflow
