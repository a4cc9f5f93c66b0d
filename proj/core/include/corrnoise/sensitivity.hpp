#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "corrnoise/strategy.hpp"

namespace corrnoise {

enum class SchemaKind { kSingle, kCyclic, kMinSep, kFull };

struct ParticipationSchema {
  SchemaKind kind = SchemaKind::kSingle;
  int b = 0;  // cyclic: steps per epoch; minsep: minimum separation
  int k = 0;  // cyclic: epochs; minsep: max participations

  static ParticipationSchema single();
  static ParticipationSchema cyclic(int b, int k);
  static ParticipationSchema minsep(int b, int k);
  static ParticipationSchema full();
};

// Throws kSchema unless the schema is compatible with an n-step strategy:
// cyclic requires b*k == n, minsep requires (k-1)*b < n.
void validate_schema(const ParticipationSchema& schema, int n);

// Entries of C^T C at or above -1e-12 are treated as non-negative.
inline constexpr double kGramNonnegTolerance = 1e-12;

// Patterns enumerated by brute force are capped at this count.
inline constexpr std::int64_t kPatternEnumerationLimit = 1000000;

struct GramMatrix {
  Eigen::MatrixXd m;   // C^T C
  bool nonneg = false; // all entries >= -kGramNonnegTolerance
};

GramMatrix gram_matrix(const Eigen::MatrixXd& c);

struct SensitivityBound {
  double value = 0.0;
  // True when every Gram entry indexed by a common pattern is non-negative,
  // in which case the bound equals the true sensitivity.
  bool exact = false;
};

// Max column norm of C (zero-out streaming sensitivity).
double streaming_sensitivity(const Strategy& strategy,
                             int limit = kDefaultMaterializeLimit);

// sqrt(max over patterns of sum_{t,tau in pi} |M[t,tau]|) by enumerating the
// schema's patterns. Cyclic enumerates its b patterns; minsep enumerates all
// patterns of size <= k, erroring out past kPatternEnumerationLimit.
SensitivityBound sensitivity_upper_bound(const GramMatrix& gram,
                                         const ParticipationSchema& schema);

std::int64_t count_minsep_patterns(int n, int b, int k);

// Exact min-sep sensitivity of a banded strategy from its squared column
// norms: sqrt of the best total reward placing <= k indices >= b apart.
// O(n k) time and space.
double minsep_sensitivity_dp(const std::vector<double>& col_sq_norms, int b,
                             int k);

// Monotone non-negative Toeplitz closed form: the l2 norm of the sum of the
// k columns at offsets 0, b, ..., (k-1)b. Throws kMonotonicity when the
// coefficients are not non-negative and non-increasing.
double toeplitz_minsep_closed_form(const std::vector<double>& coeffs, int n,
                                   int b, int k);

// max over u in {+-1}^n of ||C u||_2, by Gray-code enumeration. n <= 22.
double inf_to_2_norm_bruteforce(const Eigen::MatrixXd& c);

// Participation-calibrated sensitivity of a strategy, dispatching to the
// cheapest exact route available for the (strategy, schema) pair.
double sensitivity(const Strategy& strategy, const ParticipationSchema& schema,
                   int limit = kDefaultMaterializeLimit);

}  // namespace corrnoise
