#pragma once

#include <optional>
#include <string>
#include <vector>

namespace corrnoise::tables {

enum class TableName { kMaxError, kRmse };

// Column order follows the reference tables. StreamingH2 is recognized but
// unsupported; Dense is produced for the RMSE table only.
enum class Column {
  kIdentity,
  kWorkload,
  kStreamingH2,
  kFullH2,
  kBlt,
  kToeplitz,
  kColNormToeplitz,
  kDense,
};

const char* column_label(Column column);
std::optional<Column> column_from_label(const std::string& label);
std::vector<Column> default_columns();

struct TableOptions {
  TableName name = TableName::kMaxError;
  std::vector<int> steps;
  std::vector<Column> columns = default_columns();
  int dense_limit = 128;  // largest n for the Dense column (runtime guard)
  std::uint64_t seed = 0;
};

// One table cell; nullopt when the column is unsupported for this table or
// exceeds its runtime guard.
std::optional<double> table_cell(TableName name, Column column, int n,
                                 int dense_limit, std::uint64_t seed);

struct TableResult {
  std::string csv;                 // machine-parseable payload (3 decimals)
  std::vector<std::string> notes;  // human notes (omitted columns)
};

TableResult generate_table(const TableOptions& options);

}  // namespace corrnoise::tables
