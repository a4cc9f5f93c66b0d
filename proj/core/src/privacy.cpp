#include "corrnoise/privacy.hpp"

#include <cmath>

#include "corrnoise/errors.hpp"

namespace corrnoise {

double calibrate_nu(double sensitivity, const PrivacyTarget& target) {
  if (!(target.mu > 0.0) || !std::isfinite(target.mu)) {
    throw_error(ErrorCode::kParameterDomain, "mu must be finite and positive");
  }
  if (sensitivity < 0.0) {
    throw_error(ErrorCode::kParameterDomain, "sensitivity must be >= 0");
  }
  const double factor = target.adjacency == Adjacency::kReplaceOne ? 2.0 : 1.0;
  return factor * sensitivity / target.mu;
}

double gdp_to_zcdp(double mu) {
  if (mu < 0.0) throw_error(ErrorCode::kParameterDomain, "mu must be >= 0");
  return 0.5 * mu * mu;
}

AmplifiedEquivalent amplification_reduction(int n, int bands, int batch,
                                            int dataset, double nu,
                                            double colnorm) {
  if (bands < 1 || n < 1 || n % bands != 0) {
    throw_error(ErrorCode::kParameterDomain,
                "amplification reduction requires bands dividing n");
  }
  if (batch < 1 || dataset < 1) {
    throw_error(ErrorCode::kParameterDomain, "batch and dataset must be >= 1");
  }
  if (!(colnorm > 0.0)) {
    throw_error(ErrorCode::kParameterDomain, "column norm must be positive");
  }
  AmplifiedEquivalent out;
  out.n_prime = n / bands;
  out.p_prime = static_cast<double>(batch) * bands / dataset;
  if (out.p_prime > 1.0) {
    throw_error(ErrorCode::kParameterDomain,
                "sampling probability B*b/N exceeds 1");
  }
  out.nu_prime = nu / colnorm;
  return out;
}

}  // namespace corrnoise
