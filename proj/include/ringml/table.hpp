#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ringml/attr_space.hpp"
#include "ringml/triple.hpp"

namespace ringml {

enum class ColumnKind : std::uint8_t { kContinuous, kCategorical };
enum class ColumnRole : std::uint8_t { kFeature, kJoinKey, kId };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  ColumnRole role = ColumnRole::kFeature;
};

struct Schema {
  std::vector<ColumnSpec> columns;

  int size() const { return static_cast<int>(columns.size()); }
  int index_of(std::string_view name) const;
  std::vector<int> feature_columns() const;
};

/// Columnar table. Feature columns carry a missingness mask recording which
/// cells were ORIGINALLY missing; the mask is immutable for the run even
/// after cells are imputed. Categorical features are dictionary-encoded to
/// dense integer codes; join keys are raw 64-bit integers; id columns pass
/// through as strings.
class Table {
 public:
  Schema schema;
  std::int64_t rows = 0;

  std::vector<Eigen::VectorXd> cont;                // per column, continuous features
  std::vector<std::vector<std::int32_t>> codes;     // per column, categorical features
  std::vector<std::vector<std::int64_t>> keys;      // per column, join keys
  std::vector<std::vector<std::string>> ids;        // per column, id passthrough
  std::vector<std::vector<std::uint8_t>> miss;      // per column, 1 = originally missing
  std::vector<std::vector<std::string>> dict;       // per categorical column, code -> label

  void init_storage();

  bool is_missing(int col, std::int64_t row) const { return miss[col][row] != 0; }
  /// Model-facing value of a feature cell: the float value, or the category
  /// code as an integral double.
  double feature_value(int col, std::int64_t row) const {
    return schema.columns[col].kind == ColumnKind::kContinuous
               ? cont[col][row]
               : static_cast<double>(codes[col][row]);
  }
  void set_feature_value(int col, std::int64_t row, double v) {
    if (schema.columns[col].kind == ColumnKind::kContinuous) {
      cont[col][row] = v;
    } else {
      codes[col][row] = static_cast<std::int32_t>(v);
    }
  }

  /// Feature columns with at least one originally-missing cell.
  std::vector<int> incomplete_columns() const;
  /// Missing cells / (rows * feature columns).
  double missing_rate() const;
};

/// Attribute space over the table's feature columns, plus the attr -> column
/// mapping (attr order follows schema order).
struct TableSpace {
  std::shared_ptr<const AttrSpace> space;
  std::vector<int> attr_col;  // per attr: table column index
};
TableSpace make_table_space(const Table& t, const std::string& prefix = "");

/// Column bindings for aggregation over all feature attributes of `ts`.
std::vector<AttrColumn> bind_columns(const Table& t, const TableSpace& ts);

/// Column mean over observed cells, exact pairwise summation.
double column_mean(const Table& t, int col);
/// Column mode over observed cells; ties break to the smallest code.
std::int32_t column_mode(const Table& t, int col);

/// Fills every originally-missing cell with the column mean (continuous) or
/// mode (categorical). Observed cells are never touched. A column with zero
/// observed cells is an unrecoverable input error.
Table initial_impute(Table t);
void initial_impute_in_place(Table& t);

// --------------------------------------------------------------------------
// Partitioning

enum class PartitionMode : std::uint8_t { kLow, kHigh };

/// Disjoint, exhaustive routing of rows by the count of missing (low mode)
/// or observed (high mode) values among the incomplete attributes.
struct PartitionSet {
  explicit PartitionSet(Triple cached) : cached_triple(std::move(cached)) {}

  PartitionMode mode = PartitionMode::kLow;
  std::vector<int> mattr_cols;                           // incomplete columns
  std::vector<std::int64_t> complete;                    // zero missing / all observed
  std::vector<std::int64_t> all_missing;                 // all missing / zero observed
  std::vector<std::vector<std::int64_t>> exactly_one;    // per mattr position
  std::vector<std::int64_t> multi;                       // >= 2 but not all
  Triple cached_triple;                                  // aggregate over `complete`

  int mattr_pos(int col) const;
};

PartitionSet partition(const Table& t, const TableSpace& ts, PartitionMode mode,
                       int threads = 1);

/// Low mode: rows whose `col` cell is originally missing (subpartition of the
/// attribute, the overflow partition, and the all-missing partition, each
/// restricted by the mask). High mode: incomplete rows where `col` is
/// observed (the attribute's observed-side subpartition plus the overflow
/// partition).
std::vector<std::int64_t> rows_missing_in(const Table& t, const PartitionSet& p, int col);

}  // namespace ringml
