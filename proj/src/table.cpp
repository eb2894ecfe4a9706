#include "ringml/table.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "ringml/errors.hpp"

namespace ringml {

int Schema::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return -1;
}

std::vector<int> Schema::feature_columns() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (columns[i].role == ColumnRole::kFeature) out.push_back(i);
  }
  return out;
}

void Table::init_storage() {
  const int n = schema.size();
  cont.assign(n, Eigen::VectorXd());
  codes.assign(n, {});
  keys.assign(n, {});
  ids.assign(n, {});
  miss.assign(n, {});
  dict.assign(n, {});
  for (int c = 0; c < n; ++c) {
    const ColumnSpec& spec = schema.columns[c];
    switch (spec.role) {
      case ColumnRole::kFeature:
        miss[c].assign(rows, 0);
        if (spec.kind == ColumnKind::kContinuous) {
          cont[c] = Eigen::VectorXd::Zero(rows);
        } else {
          codes[c].assign(rows, 0);
        }
        break;
      case ColumnRole::kJoinKey:
        keys[c].assign(rows, 0);
        break;
      case ColumnRole::kId:
        ids[c].assign(rows, {});
        break;
    }
  }
}

std::vector<int> Table::incomplete_columns() const {
  std::vector<int> out;
  for (int c : schema.feature_columns()) {
    const auto& m = miss[c];
    if (std::find(m.begin(), m.end(), std::uint8_t{1}) != m.end()) out.push_back(c);
  }
  return out;
}

double Table::missing_rate() const {
  const auto feats = schema.feature_columns();
  if (feats.empty() || rows == 0) return 0.0;
  std::int64_t missing = 0;
  for (int c : feats) {
    for (std::int64_t r = 0; r < rows; ++r) missing += miss[c][r];
  }
  return static_cast<double>(missing) / (static_cast<double>(rows) * feats.size());
}

TableSpace make_table_space(const Table& t, const std::string& prefix) {
  TableSpace ts;
  std::vector<std::string> names;
  std::vector<AttrKind> kinds;
  for (int c : t.schema.feature_columns()) {
    names.push_back(prefix + t.schema.columns[c].name);
    kinds.push_back(t.schema.columns[c].kind == ColumnKind::kContinuous
                        ? AttrKind::kContinuous
                        : AttrKind::kCategorical);
    ts.attr_col.push_back(c);
  }
  ts.space = AttrSpace::make(std::move(names), std::move(kinds));
  return ts;
}

std::vector<AttrColumn> bind_columns(const Table& t, const TableSpace& ts) {
  std::vector<AttrColumn> cols(ts.attr_col.size());
  for (std::size_t a = 0; a < ts.attr_col.size(); ++a) {
    const int c = ts.attr_col[a];
    cols[a].attr = static_cast<int>(a);
    if (t.schema.columns[c].kind == ColumnKind::kContinuous) {
      cols[a].cont = t.cont[c].data();
    } else {
      cols[a].codes = t.codes[c].data();
    }
  }
  return cols;
}

namespace {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 128) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace

double column_mean(const Table& t, int col) {
  std::vector<double> observed;
  observed.reserve(t.rows);
  for (std::int64_t r = 0; r < t.rows; ++r) {
    if (!t.is_missing(col, r)) observed.push_back(t.cont[col][r]);
  }
  if (observed.empty()) {
    throw DataError("column '" + t.schema.columns[col].name +
                    "' has no observed values; cannot impute");
  }
  return pairwise_sum(observed) / static_cast<double>(observed.size());
}

std::int32_t column_mode(const Table& t, int col) {
  std::map<std::int32_t, std::int64_t> counts;
  for (std::int64_t r = 0; r < t.rows; ++r) {
    if (!t.is_missing(col, r)) ++counts[t.codes[col][r]];
  }
  if (counts.empty()) {
    throw DataError("column '" + t.schema.columns[col].name +
                    "' has no observed values; cannot impute");
  }
  std::int32_t best = counts.begin()->first;
  std::int64_t best_count = counts.begin()->second;
  for (const auto& [code, n] : counts) {
    if (n > best_count) {  // ties keep the smallest code (map is ordered)
      best = code;
      best_count = n;
    }
  }
  return best;
}

void initial_impute_in_place(Table& t) {
  for (int c : t.incomplete_columns()) {
    if (t.schema.columns[c].kind == ColumnKind::kContinuous) {
      const double mean = column_mean(t, c);
      for (std::int64_t r = 0; r < t.rows; ++r) {
        if (t.is_missing(c, r)) t.cont[c][r] = mean;
      }
    } else {
      const std::int32_t mode = column_mode(t, c);
      for (std::int64_t r = 0; r < t.rows; ++r) {
        if (t.is_missing(c, r)) t.codes[c][r] = mode;
      }
    }
  }
}

Table initial_impute(Table t) {
  initial_impute_in_place(t);
  return t;
}

// --------------------------------------------------------------------------
// Partitioning

int PartitionSet::mattr_pos(int col) const {
  for (std::size_t i = 0; i < mattr_cols.size(); ++i) {
    if (mattr_cols[i] == col) return static_cast<int>(i);
  }
  return -1;
}

PartitionSet partition(const Table& t, const TableSpace& ts, PartitionMode mode, int threads) {
  PartitionSet p{Triple(ts.space)};
  p.mode = mode;
  p.mattr_cols = t.incomplete_columns();
  const int k = static_cast<int>(p.mattr_cols.size());
  p.exactly_one.assign(k, {});
  if (k == 0) {
    // complete table: everything lands in the complete partition
    p.complete.resize(t.rows);
    std::iota(p.complete.begin(), p.complete.end(), std::int64_t{0});
    p.cached_triple = aggregate(ts.space, bind_columns(t, ts), p.complete, threads);
    return p;
  }
  for (std::int64_t r = 0; r < t.rows; ++r) {
    int missing = 0;
    int last_missing = -1;
    int last_observed = -1;
    for (int i = 0; i < k; ++i) {
      if (t.is_missing(p.mattr_cols[i], r)) {
        ++missing;
        last_missing = i;
      } else {
        last_observed = i;
      }
    }
    // The counting rule: low mode counts missing values, high mode counts
    // observed values among the incomplete attributes.
    const int counted = mode == PartitionMode::kLow ? missing : k - missing;
    const int single = mode == PartitionMode::kLow ? last_missing : last_observed;
    if (counted == 0) {
      (mode == PartitionMode::kLow ? p.complete : p.all_missing).push_back(r);
    } else if (counted == k) {
      (mode == PartitionMode::kLow ? p.all_missing : p.complete).push_back(r);
    } else if (counted == 1) {
      p.exactly_one[single].push_back(r);
    } else {
      p.multi.push_back(r);
    }
  }
  p.cached_triple = aggregate(ts.space, bind_columns(t, ts), p.complete, threads);
  return p;
}

std::vector<std::int64_t> rows_missing_in(const Table& t, const PartitionSet& p, int col) {
  const int pos = p.mattr_pos(col);
  if (pos < 0) {
    throw UsageError("rows_missing_in: column '" + t.schema.columns[col].name +
                     "' is not an incomplete attribute");
  }
  std::vector<std::int64_t> out;
  if (p.mode == PartitionMode::kLow) {
    out = p.exactly_one[pos];
    for (std::int64_t r : p.multi) {
      if (t.is_missing(col, r)) out.push_back(r);
    }
    out.insert(out.end(), p.all_missing.begin(), p.all_missing.end());
  } else {
    out = p.exactly_one[pos];
    for (std::int64_t r : p.multi) {
      if (!t.is_missing(col, r)) out.push_back(r);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace ringml
