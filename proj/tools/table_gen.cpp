#include "table_gen.hpp"
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "corrnoise/loss.hpp"
#include "corrnoise/optimizer.hpp"

namespace corrnoise::tables {

namespace {

struct Losses {
  double max_loss;
  double rms_loss;
};

// Losses of the square-root factorization C = B = A_pre^{1/2}: both norms
// come straight from the coefficients.
Losses sqrt_factorization_losses(int n) {
  const std::vector<double> c = optimal_toeplitz_coeffs(n);
  double sq = 0.0, weighted = 0.0;
  for (int t = 0; t < n; ++t) {
    sq += c[t] * c[t];
    weighted += (n - t) * c[t] * c[t];
  }
  return {sq, std::sqrt(weighted / n) * std::sqrt(sq)};
}

// Losses of the column-normalized version of the Toeplitz strategy with the
// given coefficients: B_norm[t, tau] = sum_{j=tau}^{t} s_j c'_{j-tau} where
// s_j is the j-th column norm. Row-incremental, O(n^2) time, O(n) space;
// the column norms of C_norm are exactly one.
Losses column_normalized_losses(const std::vector<double>& coeffs, int n) {
  const std::vector<double> inv = inverse_toeplitz_coeffs(coeffs, n);
  // Column tau sees coefficients 0 .. n-1-tau.
  std::vector<double> col_norm(n);
  double acc = 0.0;
  for (int tau = n - 1; tau >= 0; --tau) {
    acc += coeffs[n - 1 - tau] * coeffs[n - 1 - tau];
    col_norm[tau] = std::sqrt(acc);
  }
  std::vector<double> row(n, 0.0);
  double max_sq = 0.0, fro_sq = 0.0;
  for (int t = 0; t < n; ++t) {
    double row_sq = 0.0;
    for (int tau = 0; tau <= t; ++tau) {
      row[tau] += col_norm[t] * inv[t - tau];
      row_sq += row[tau] * row[tau];
    }
    max_sq = std::max(max_sq, row_sq);
    fro_sq += row_sq;
  }
  return {std::sqrt(max_sq), std::sqrt(fro_sq / n)};
}

// Full-pseudoinverse tree losses without materializing the decoder: with
// M = C^T C, the squared row norms of B* = A_pre C^+ are a_t^T M^{-1} a_t
// for the prefix indicators a_t. M[i, j] counts the dyadic blocks of the
// padded tree containing both leaves.
Losses full_h2_losses(int n) {
  int padded = 1, levels = 0;
  while (padded < n) {
    padded *= 2;
    ++levels;
  }
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      int common = 0;
      for (int l = 0; l <= levels; ++l) {
        if ((i >> l) == (j >> l)) ++common;
      }
      gram(i, j) = common;
      gram(j, i) = common;
    }
  }
  const double colnorm = std::sqrt(gram(0, 0));  // leaf 0 sits in every level
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, n);  // columns are a_t
  for (int t = 0; t < n; ++t) rhs.col(t).head(t + 1).setOnes();
  const Eigen::MatrixXd solved = ldlt.solve(rhs);
  double max_q = 0.0, sum_q = 0.0;
  for (int t = 0; t < n; ++t) {
    const double q = solved.col(t).head(t + 1).sum();
    max_q = std::max(max_q, q);
    sum_q += q;
  }
  return {std::sqrt(max_q) * colnorm, std::sqrt(sum_q / n) * colnorm};
}

OptimizerConfig table_config(std::uint64_t seed) {
  OptimizerConfig config;
  config.max_iterations = 3000;
  config.gradient_tolerance = 1e-10;
  config.seed = seed;
  return config;
}

// The BLT path differentiates by central differences; a few hundred
// iterations per barrier stage are plenty and keep full tables fast.
OptimizerConfig blt_config(std::uint64_t seed) {
  OptimizerConfig config = table_config(seed);
  config.max_iterations = 600;
  return config;
}

// The RMS-optimal Toeplitz strategy feeds two columns; memoize per (n, seed).
double toeplitz_rms_optimal(int n, std::uint64_t seed,
                            std::vector<double>* coeffs_out) {
  static std::map<std::pair<int, std::uint64_t>,
                  std::pair<double, std::vector<double>>>
      memo;
  auto it = memo.find({n, seed});
  if (it == memo.end()) {
    const OptimizationResult res = optimize_banded_toeplitz(
        WorkloadSpec::prefix(n), n, n, ParticipationSchema::single(),
        LossObjective::kRmsLoss, table_config(seed));
    it = memo.emplace(std::make_pair(n, seed),
                      std::make_pair(res.objective, res.strategy.coeffs))
             .first;
  }
  if (coeffs_out != nullptr) *coeffs_out = it->second.second;
  return it->second.first;
}

}  // namespace

const char* column_label(Column column) {
  switch (column) {
    case Column::kIdentity:
      return "Identity";
    case Column::kWorkload:
      return "Workload";
    case Column::kStreamingH2:
      return "Streaming H2";
    case Column::kFullH2:
      return "Full H2";
    case Column::kBlt:
      return "BLT";
    case Column::kToeplitz:
      return "Toeplitz";
    case Column::kColNormToeplitz:
      return "Col-Norm. Toep.";
    case Column::kDense:
      return "Dense";
  }
  return "?";
}

std::optional<Column> column_from_label(const std::string& label) {
  const std::vector<std::pair<std::string, Column>> names = {
      {"identity", Column::kIdentity},
      {"workload", Column::kWorkload},
      {"streaming-h2", Column::kStreamingH2},
      {"full-h2", Column::kFullH2},
      {"blt", Column::kBlt},
      {"toeplitz", Column::kToeplitz},
      {"colnorm-toeplitz", Column::kColNormToeplitz},
      {"dense", Column::kDense},
  };
  for (const auto& [name, column] : names) {
    if (name == label) return column;
  }
  return std::nullopt;
}

std::vector<Column> default_columns() {
  return {Column::kIdentity, Column::kWorkload, Column::kStreamingH2,
          Column::kFullH2,   Column::kBlt,      Column::kToeplitz,
          Column::kColNormToeplitz, Column::kDense};
}

std::optional<double> table_cell(TableName name, Column column, int n,
                                 int dense_limit, std::uint64_t seed) {
  const bool max_table = name == TableName::kMaxError;
  switch (column) {
    case Column::kIdentity:
      return max_table ? std::sqrt(static_cast<double>(n))
                       : std::sqrt((n + 1.0) / 2.0);
    case Column::kWorkload:
      return std::sqrt(static_cast<double>(n));
    case Column::kStreamingH2:
      return std::nullopt;  // streaming tree decoder is not provided
    case Column::kFullH2: {
      const Losses losses = full_h2_losses(n);
      return max_table ? losses.max_loss : losses.rms_loss;
    }
    case Column::kBlt: {
      const OptimizationResult res = optimize_blt(
          WorkloadSpec::prefix(n), n, 4, ParticipationSchema::single(),
          max_table ? LossObjective::kMaxLoss : LossObjective::kRmsLoss,
          blt_config(seed));
      return res.objective;
    }
    case Column::kToeplitz: {
      if (max_table) return sqrt_factorization_losses(n).max_loss;
      return toeplitz_rms_optimal(n, seed, nullptr);
    }
    case Column::kColNormToeplitz: {
      // Max table: column-normalized square-root factorization. RMSE table:
      // column-normalized RMS-optimal Toeplitz strategy.
      if (max_table) {
        return column_normalized_losses(optimal_toeplitz_coeffs(n), n).max_loss;
      }
      std::vector<double> coeffs;
      toeplitz_rms_optimal(n, seed, &coeffs);
      coeffs.resize(n, 0.0);
      return column_normalized_losses(coeffs, n).rms_loss;
    }
    case Column::kDense: {
      if (max_table) return std::nullopt;  // RMS-targeted optimizer only
      if (n > dense_limit) return std::nullopt;
      // Three-decimal accuracy arrives long before tight stationarity; keep
      // the table budget modest.
      OptimizerConfig config = table_config(seed);
      config.max_iterations = 600;
      config.gradient_tolerance = 1e-6;
      const OptimizationResult res =
          optimize_dense_streaming(WorkloadSpec::prefix(n), n, config);
      return res.objective;
    }
  }
  return std::nullopt;
}

TableResult generate_table(const TableOptions& options) {
  TableResult result;
  std::vector<Column> active;
  for (Column column : options.columns) {
    bool supported = true;
    if (column == Column::kStreamingH2) {
      result.notes.push_back(
          "column 'Streaming H2' is not supported and was omitted");
      supported = false;
    } else if (column == Column::kDense &&
               options.name == TableName::kMaxError) {
      result.notes.push_back(
          "column 'Dense' is only produced for the rmse table (the dense "
          "optimizer targets RMS loss) and was omitted");
      supported = false;
    }
    if (supported) active.push_back(column);
  }

  std::ostringstream out;
  out << "n";
  for (Column column : active) out << "," << column_label(column);
  out << "\n";
  for (int n : options.steps) {
    out << n;
    for (Column column : active) {
      const std::optional<double> value =
          table_cell(options.name, column, n, options.dense_limit, options.seed);
      if (value.has_value()) {
        char buffer[32];
        std::snprintf(buffer, sizeof(buffer), "%.3f", *value);
        out << "," << buffer;
      } else {
        out << ",-";
      }
    }
    out << "\n";
  }
  result.csv = out.str();
  return result;
}

}  // namespace corrnoise::tables
