#include "corrnoise/noise_source.hpp"

#include <cmath>
#include <numbers>

namespace corrnoise {

namespace {

constexpr std::uint64_t kRowSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kColSalt = 0xd1b54a32d192ed03ULL;

// ((word >> 11) + 1) * 2^-53: uniform on (0, 1], never zero, so the
// Box-Muller logarithm is always finite.
double to_unit(std::uint64_t word) {
  return static_cast<double>((word >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::VectorXd regenerate_row(const NoiseSource& source, std::int64_t t) {
  if (t < 0) {
    return Eigen::VectorXd::Zero(source.m);
  }
  Eigen::VectorXd row(source.m);
  if (source.nu == 0.0) {
    row.setZero();
    return row;
  }
  const std::uint64_t row_key =
      mix64(source.base_seed ^ (kRowSalt * (static_cast<std::uint64_t>(t) + 1)));
  for (int j = 0; j < source.m; j += 2) {
    const std::uint64_t w1 =
        mix64(row_key ^ (kColSalt * (static_cast<std::uint64_t>(j) + 1)));
    const std::uint64_t w2 =
        mix64(row_key ^ (kColSalt * (static_cast<std::uint64_t>(j) + 2)));
    const double r = std::sqrt(-2.0 * std::log(to_unit(w1)));
    const double theta = 2.0 * std::numbers::pi * to_unit(w2);
    row[j] = source.nu * r * std::cos(theta);
    if (j + 1 < source.m) row[j + 1] = source.nu * r * std::sin(theta);
  }
  return row;
}

}  // namespace corrnoise
