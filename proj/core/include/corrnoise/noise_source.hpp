#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace corrnoise {

// Deterministic Gaussian noise source. Row t is a pure function of
// (base_seed, t, m, nu); distinct rows are independent standard Gaussians
// scaled by nu.
//
// The generator is counter-based so rows can be (re)generated in any order:
// the j-th 64-bit word of row t is
//     word(j) = mix64(mix64(base_seed ^ kRowSalt * (t+1)) ^ kColSalt * (j+1))
// where mix64 is the splitmix64 finalizer. Words are mapped to uniforms in
// (0, 1] as ((word >> 11) + 1) * 2^-53 and paired through the Box-Muller
// transform. This mapping is fixed; outputs are reproducible across platforms.
struct NoiseSource {
  std::uint64_t base_seed = 0;
  double nu = 1.0;  // per-coordinate standard deviation
  int m = 1;        // row dimension
};

// Deterministic row t of the scaled Gaussian noise matrix Z.
Eigen::VectorXd regenerate_row(const NoiseSource& source, std::int64_t t);

// splitmix64 finalizer, exposed for derived seeding.
std::uint64_t mix64(std::uint64_t z);

}  // namespace corrnoise
