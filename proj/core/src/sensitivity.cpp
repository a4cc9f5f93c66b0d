#include "corrnoise/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace corrnoise {

namespace {

bool is_nonneg_nonincreasing(const std::vector<double>& coeffs) {
  for (std::size_t t = 0; t < coeffs.size(); ++t) {
    if (coeffs[t] < 0.0) return false;
    if (t > 0 && coeffs[t] > coeffs[t - 1]) return false;
  }
  return true;
}

// Squared column norms of a Toeplitz strategy with the given first-column
// coefficients: column tau sees coefficients 0 .. min(b, n-tau)-1.
std::vector<double> toeplitz_col_sq_norms(const std::vector<double>& coeffs,
                                          int n) {
  const int b = std::min<int>(static_cast<int>(coeffs.size()), n);
  std::vector<double> suffix(b + 1, 0.0);
  for (int j = b - 1; j >= 0; --j) {
    suffix[j] = suffix[j + 1] + coeffs[j] * coeffs[j];
  }
  std::vector<double> out(n);
  for (int tau = 0; tau < n; ++tau) {
    out[tau] = (n - tau >= b) ? suffix[0] : suffix[0] - suffix[n - tau];
  }
  return out;
}

std::vector<double> dense_col_sq_norms(const Eigen::MatrixXd& c) {
  std::vector<double> out(c.cols());
  for (Eigen::Index t = 0; t < c.cols(); ++t) out[t] = c.col(t).squaredNorm();
  return out;
}

// Visits every min-sep pattern of size <= k as an index vector.
template <typename Fn>
void for_each_minsep_pattern(int n, int b, int k, Fn&& fn) {
  std::vector<int> pattern;
  auto rec = [&](auto&& self, int next_min) -> void {
    if (!pattern.empty()) fn(pattern);
    if (static_cast<int>(pattern.size()) == k) return;
    for (int t = next_min; t < n; ++t) {
      pattern.push_back(t);
      self(self, t + b);
      pattern.pop_back();
    }
  };
  rec(rec, 0);
}

double pattern_abs_sum(const Eigen::MatrixXd& m, const std::vector<int>& pi) {
  double acc = 0.0;
  for (int t : pi) {
    for (int tau : pi) acc += std::abs(m(t, tau));
  }
  return acc;
}

bool pattern_nonneg(const Eigen::MatrixXd& m, const std::vector<int>& pi) {
  for (int t : pi) {
    for (int tau : pi) {
      if (m(t, tau) < -kGramNonnegTolerance) return false;
    }
  }
  return true;
}

}  // namespace

ParticipationSchema ParticipationSchema::single() { return {SchemaKind::kSingle, 0, 0}; }

ParticipationSchema ParticipationSchema::cyclic(int b, int k) {
  if (b < 1 || k < 1) throw_error(ErrorCode::kSchema, "cyclic: b, k must be >= 1");
  return {SchemaKind::kCyclic, b, k};
}

ParticipationSchema ParticipationSchema::minsep(int b, int k) {
  if (b < 1 || k < 1) throw_error(ErrorCode::kSchema, "minsep: b, k must be >= 1");
  return {SchemaKind::kMinSep, b, k};
}

ParticipationSchema ParticipationSchema::full() { return {SchemaKind::kFull, 0, 0}; }

void validate_schema(const ParticipationSchema& schema, int n) {
  switch (schema.kind) {
    case SchemaKind::kSingle:
    case SchemaKind::kFull:
      return;
    case SchemaKind::kCyclic:
      // Epochs must tile [n]; b*k != n is rejected rather than padded.
      if (static_cast<std::int64_t>(schema.b) * schema.k != n) {
        throw_error(ErrorCode::kSchema, "cyclic schema requires b*k == n");
      }
      return;
    case SchemaKind::kMinSep:
      if (static_cast<std::int64_t>(schema.k - 1) * schema.b >= n) {
        throw_error(ErrorCode::kSchema,
                    "minsep schema requires (k-1)*b < n");
      }
      return;
  }
}

GramMatrix gram_matrix(const Eigen::MatrixXd& c) {
  GramMatrix gram;
  gram.m = c.transpose() * c;
  gram.nonneg = (gram.m.array() >= -kGramNonnegTolerance).all();
  return gram;
}

double streaming_sensitivity(const Strategy& strategy, int limit) {
  switch (strategy.kind) {
    case StrategyKind::kToeplitz:
    case StrategyKind::kBandedToeplitz: {
      const auto norms = toeplitz_col_sq_norms(strategy.coeffs, strategy.n);
      return std::sqrt(*std::max_element(norms.begin(), norms.end()));
    }
    case StrategyKind::kBlt: {
      const auto norms = toeplitz_col_sq_norms(
          blt_coeffs(strategy.alpha, strategy.lambda, strategy.n), strategy.n);
      return std::sqrt(*std::max_element(norms.begin(), norms.end()));
    }
    case StrategyKind::kDense: {
      const auto norms = dense_col_sq_norms(strategy.dense);
      return std::sqrt(*std::max_element(norms.begin(), norms.end()));
    }
    case StrategyKind::kTree: {
      const TreeFactorization tree =
          tree_factorization(strategy.n, strategy.tree_variant, limit);
      const auto norms = dense_col_sq_norms(tree.encoder);
      return std::sqrt(*std::max_element(norms.begin(), norms.end()));
    }
  }
  throw_error(ErrorCode::kParameterDomain, "unknown strategy kind");
}

std::int64_t count_minsep_patterns(int n, int b, int k) {
  // count[j][t] = patterns of size j whose first index is >= t.
  std::vector<std::int64_t> prev(n + 1, 0), cur(n + 1, 0);
  std::int64_t total = 0;
  std::vector<std::int64_t> size_j(n + 1, 1);  // size 0: empty pattern
  for (int j = 1; j <= k; ++j) {
    std::fill(cur.begin(), cur.end(), 0);
    for (int t = n - 1; t >= 0; --t) {
      const std::int64_t extend =
          (j == 1) ? 1 : (t + b <= n ? prev[t + b] : 0);
      cur[t] = cur[t + 1] + extend;
      if (cur[t] > kPatternEnumerationLimit) return cur[t] + total;
    }
    total += cur[0];
    if (total > kPatternEnumerationLimit) return total;
    std::swap(prev, cur);
  }
  return total;
}

SensitivityBound sensitivity_upper_bound(const GramMatrix& gram,
                                         const ParticipationSchema& schema) {
  const int n = static_cast<int>(gram.m.rows());
  validate_schema(schema, n);
  if (schema.kind != SchemaKind::kCyclic && schema.kind != SchemaKind::kMinSep) {
    throw_error(ErrorCode::kSchema,
                "sensitivity_upper_bound: schema must be cyclic or minsep");
  }

  double best = 0.0;
  bool exact = true;
  if (schema.kind == SchemaKind::kCyclic) {
    std::vector<int> pattern(schema.k);
    for (int l = 0; l < schema.b; ++l) {
      for (int j = 0; j < schema.k; ++j) pattern[j] = l + j * schema.b;
      best = std::max(best, pattern_abs_sum(gram.m, pattern));
      exact = exact && pattern_nonneg(gram.m, pattern);
    }
  } else {
    if (count_minsep_patterns(n, schema.b, schema.k) >
        kPatternEnumerationLimit) {
      throw_error(ErrorCode::kEnumerationLimit,
                  "too many min-sep patterns to enumerate; use the banded "
                  "dynamic program or the monotone Toeplitz closed form");
    }
    for_each_minsep_pattern(n, schema.b, schema.k,
                            [&](const std::vector<int>& pi) {
                              best = std::max(best, pattern_abs_sum(gram.m, pi));
                              exact = exact && pattern_nonneg(gram.m, pi);
                            });
  }
  return {std::sqrt(best), exact};
}

double minsep_sensitivity_dp(const std::vector<double>& col_sq_norms, int b,
                             int k) {
  const int n = static_cast<int>(col_sq_norms.size());
  if (b < 1 || k < 1) throw_error(ErrorCode::kSchema, "dp: b, k must be >= 1");
  if (static_cast<std::int64_t>(k - 1) * b >= n) {
    throw_error(ErrorCode::kSchema, "dp: infeasible k for separation b");
  }
  for (double r : col_sq_norms) {
    if (r < 0.0) throw_error(ErrorCode::kParameterDomain, "dp: negative reward");
  }
  // table[l][t] = best reward selecting l indices from steps t..n-1, indices
  // >= b apart; out-of-range entries are zero.
  std::vector<std::vector<double>> table(
      k + 1, std::vector<double>(n + 1, 0.0));
  for (int l = 1; l <= k; ++l) {
    for (int t = n - 1; t >= 0; --t) {
      const double take =
          col_sq_norms[t] + (t + b <= n ? table[l - 1][t + b] : 0.0);
      table[l][t] = std::max(take, table[l][t + 1]);
    }
  }
  return std::sqrt(table[k][0]);
}

double toeplitz_minsep_closed_form(const std::vector<double>& coeffs, int n,
                                   int b, int k) {
  if (b < 1 || k < 1) {
    throw_error(ErrorCode::kSchema, "closed form: b, k must be >= 1");
  }
  if (static_cast<std::int64_t>(k - 1) * b >= n) {
    throw_error(ErrorCode::kSchema, "closed form: infeasible k");
  }
  if (!is_nonneg_nonincreasing(coeffs)) {
    throw_error(ErrorCode::kMonotonicity,
                "closed form requires non-negative, non-increasing "
                "coefficients");
  }
  // || sum_{j<k} backshift^{jb}(c) ||_2 over the first n entries.
  double acc = 0.0;
  for (int t = 0; t < n; ++t) {
    double entry = 0.0;
    for (int j = 0; j < k; ++j) {
      const int idx = t - j * b;
      if (idx < 0) break;
      if (idx < static_cast<int>(coeffs.size())) entry += coeffs[idx];
    }
    acc += entry * entry;
  }
  return std::sqrt(acc);
}

double inf_to_2_norm_bruteforce(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.cols());
  if (n > 22) {
    throw_error(ErrorCode::kSize, "inf_to_2 brute force limited to n <= 22");
  }
  // Walk sign vectors in Gray-code order so each step flips one coordinate;
  // u and -u are equivalent, so coordinate 0 stays fixed at +1.
  Eigen::VectorXd v = c.rowwise().sum();
  double best = v.squaredNorm();
  const std::uint64_t count = (n >= 1) ? (1ULL << (n - 1)) : 1;
  std::uint64_t gray = 0;
  for (std::uint64_t i = 1; i < count; ++i) {
    const std::uint64_t next = i ^ (i >> 1);
    const std::uint64_t changed = gray ^ next;
    int bit = 0;
    while (!((changed >> bit) & 1ULL)) ++bit;
    const int coord = bit + 1;  // coordinate 0 pinned
    const double sign = ((next >> bit) & 1ULL) ? -1.0 : 1.0;
    v += 2.0 * sign * c.col(coord);
    gray = next;
    best = std::max(best, v.squaredNorm());
  }
  return std::sqrt(best);
}

double sensitivity(const Strategy& strategy, const ParticipationSchema& schema,
                   int limit) {
  validate_schema(schema, strategy.n);
  switch (schema.kind) {
    case SchemaKind::kSingle:
      return streaming_sensitivity(strategy, limit);
    case SchemaKind::kFull:
      return inf_to_2_norm_bruteforce(materialize_strategy(strategy, limit));
    case SchemaKind::kCyclic:
    case SchemaKind::kMinSep:
      break;
  }
  if (strategy.kind == StrategyKind::kTree) {
    throw_error(ErrorCode::kUnsupported,
                "multi-participation sensitivity of tree strategies is not "
                "defined");
  }

  const bool minsep = schema.kind == SchemaKind::kMinSep;

  // Banded with bands <= separation: only same-index Gram terms survive.
  // Dense strategies qualify too when their numerical bandwidth fits (the
  // min-sep dense optimizer produces exactly such matrices).
  std::vector<double> banded_norms;
  if (strategy.kind == StrategyKind::kBandedToeplitz &&
      strategy.bands() <= schema.b) {
    banded_norms = toeplitz_col_sq_norms(strategy.coeffs, strategy.n);
  } else if (strategy.kind == StrategyKind::kDense) {
    int bandwidth = 1;
    for (Eigen::Index i = 0; i < strategy.dense.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        if (strategy.dense(i, j) != 0.0) {
          bandwidth = std::max<int>(bandwidth, static_cast<int>(i - j) + 1);
        }
      }
    }
    if (bandwidth <= schema.b) banded_norms = dense_col_sq_norms(strategy.dense);
  }
  if (!banded_norms.empty()) {
    if (minsep) return minsep_sensitivity_dp(banded_norms, schema.b, schema.k);
    double best = 0.0;
    for (int l = 0; l < schema.b; ++l) {
      double acc = 0.0;
      for (int j = 0; j < schema.k; ++j) acc += banded_norms[l + j * schema.b];
      best = std::max(best, acc);
    }
    return std::sqrt(best);
  }

  // Monotone non-negative Toeplitz: early-and-often closed form.
  if (strategy.kind == StrategyKind::kToeplitz ||
      strategy.kind == StrategyKind::kBandedToeplitz ||
      strategy.kind == StrategyKind::kBlt) {
    std::vector<double> coeffs =
        strategy.kind == StrategyKind::kBlt
            ? blt_coeffs(strategy.alpha, strategy.lambda, strategy.n)
            : strategy.coeffs;
    if (is_nonneg_nonincreasing(coeffs)) {
      return toeplitz_minsep_closed_form(coeffs, strategy.n, schema.b,
                                         schema.k);
    }
  }

  // General route: Gram enumeration (errors out when minsep blows up).
  const GramMatrix gram = gram_matrix(materialize_strategy(strategy, limit));
  return sensitivity_upper_bound(gram, schema).value;
}

}  // namespace corrnoise
