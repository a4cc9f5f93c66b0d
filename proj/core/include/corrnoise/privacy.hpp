#pragma once

namespace corrnoise {

enum class Adjacency { kZeroOut, kReplaceOne };

struct PrivacyTarget {
  double mu = 1.0;  // GDP parameter, finite positive
  Adjacency adjacency = Adjacency::kZeroOut;
};

// Parameters of the standard subsampled-Gaussian run that a b-banded
// mechanism under block-cyclic Poisson sampling reduces to.
struct AmplifiedEquivalent {
  int n_prime = 0;
  double p_prime = 0.0;  // sampling probability, in (0, 1]
  double nu_prime = 0.0;
};

// Noise standard deviation for a mu-GDP target: nu = sens/mu under zero-out
// adjacency, doubled under replace-one.
double calibrate_nu(double sensitivity, const PrivacyTarget& target);

// rho = mu^2 / 2.
double gdp_to_zcdp(double mu);

// (n' = n/b, p' = B*b/N, nu' = nu/colnorm). A parameter mapping only; the
// resulting (eps, delta) curve is left to external accountants.
AmplifiedEquivalent amplification_reduction(int n, int bands, int batch,
                                            int dataset, double nu,
                                            double colnorm);

}  // namespace corrnoise
