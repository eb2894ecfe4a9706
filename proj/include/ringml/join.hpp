#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ringml/table.hpp"
#include "ringml/triple.hpp"

namespace ringml {

/// Declarative description of a tree (star/snowflake) join: the first table
/// is the root/fact table, edges join a table to its parent side, and the
/// per-table selections name the feature columns entering the model.
struct JoinSpec {
  struct Source {
    std::string name;
    std::string csv_path;
    std::string schema_path;
  };
  struct Edge {
    std::string left_table, left_key;
    std::string right_table, right_key;
  };
  std::vector<Source> tables;
  std::vector<Edge> edges;
  std::vector<std::pair<std::string, std::vector<std::string>>> selected;

  /// Parses the line-oriented join file: `table NAME CSV SCHEMA`,
  /// `join LEFT.KEY = RIGHT.KEY`, `select NAME COL...` ('#' comments).
  static JoinSpec parse_file(const std::string& path);

  int table_index(std::string_view name) const;
};

/// Composite join-key value (one entry per key column).
using KeyTuple = std::vector<std::int64_t>;

/// Partial aggregates grouped by join-key value.
struct KeyedTriples {
  std::vector<std::string> key_cols;
  std::map<KeyTuple, Triple> groups;
};

/// Column -> global-attribute binding for one table.
struct AttrBinding {
  int attr;    // id in the global space
  int column;  // column index in the table
};

/// Per-key fold of lifted rows: SELECT keys, SUM(lift(attrs)) GROUP BY keys.
/// Key columns must have the join-key role.
KeyedTriples partial_aggregate(const Table& t, std::shared_ptr<const AttrSpace> space,
                               std::span<const std::string> key_columns,
                               std::span<const AttrBinding> attrs);

/// Same, restricted to an explicit row subset (empty = no rows).
KeyedTriples partial_aggregate(const Table& t, std::shared_ptr<const AttrSpace> space,
                               std::span<const std::string> key_columns,
                               std::span<const AttrBinding> attrs,
                               std::span<const std::int64_t> row_ids);

/// Joins `left` (on its column `left_col`) against `right` (keyed by exactly
/// one column), multiplying matching triples; keys present on only one side
/// contribute nothing. The products are re-grouped by `output_cols` (subset
/// of left's key columns); an empty output folds everything into one group.
KeyedTriples combine(const KeyedTriples& left, const std::string& left_col,
                     const KeyedTriples& right, std::span<const std::string> output_cols);

/// The single triple held by a fully-folded KeyedTriples.
Triple as_single(const KeyedTriples& kt, std::shared_ptr<const AttrSpace> space);

/// Resolved join tree over loaded tables, with the global attribute space
/// (selected attributes in spec order).
struct JoinTree {
  struct Node {
    int table = -1;              // index into the tables span
    int parent = -1;             // node index
    int link_col = -1;           // column in THIS table joining to the parent
    int parent_link_col = -1;    // column in the parent table
    std::vector<int> children;   // node indices
    std::vector<AttrBinding> attrs;
  };
  std::shared_ptr<const AttrSpace> space;
  std::vector<Node> nodes;  // [0] is the root
  std::vector<int> attr_node;    // per global attr: owning node
  std::vector<int> attr_column;  // per global attr: column in the owning table
};

JoinTree resolve_join(std::span<const Table> tables, const JoinSpec& spec);

/// Bottom-up factorized evaluation over the join tree; equals the aggregate
/// over the materialized join without ever building it.
Triple aggregate_join(std::span<const Table> tables, const JoinSpec& spec);

/// Cached evaluation context for repeated root-subset aggregates: dimension
/// subtrees never change, so their keyed results are computed once.
struct JoinEval {
  JoinTree tree;
  std::vector<KeyedTriples> child_results;  // per root child (tree order)
  std::vector<std::string> root_keys;       // root link column names (child order)

  /// Rows of every table resolved per root row (resolved[node][root_row]),
  /// requiring unique dimension keys and no dangling references.
  std::vector<std::vector<std::int64_t>> resolved;
};

JoinEval prepare_join_eval(std::span<const Table> tables, const JoinTree& tree,
                           bool resolve_rows);

/// Factorized aggregate restricted to an explicit subset of root rows.
Triple aggregate_join_rows(const JoinEval& eval, std::span<const Table> tables,
                           std::span<const std::int64_t> root_rows);

}  // namespace ringml
