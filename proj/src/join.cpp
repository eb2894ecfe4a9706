#include "ringml/join.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "ringml/errors.hpp"

namespace ringml {

int JoinSpec::table_index(std::string_view name) const {
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

JoinSpec JoinSpec::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open join file: " + path);
  JoinSpec spec;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream words(line);
    std::string word;
    if (!(words >> word) || word[0] == '#') continue;
    if (word == "table") {
      Source src;
      if (!(words >> src.name >> src.csv_path >> src.schema_path)) {
        fail("expected: table NAME CSV SCHEMA");
      }
      if (spec.table_index(src.name) >= 0) fail("duplicate table '" + src.name + "'");
      spec.tables.push_back(std::move(src));
    } else if (word == "join") {
      // join left.key = right.key
      std::string lhs, eq, rhs;
      if (!(words >> lhs >> eq >> rhs) || eq != "=") {
        fail("expected: join LEFT.KEY = RIGHT.KEY");
      }
      const auto split = [&](const std::string& s, std::string& table, std::string& col) {
        const auto dot = s.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == s.size()) {
          fail("expected TABLE.COLUMN, got '" + s + "'");
        }
        table = s.substr(0, dot);
        col = s.substr(dot + 1);
      };
      Edge e;
      split(lhs, e.left_table, e.left_key);
      split(rhs, e.right_table, e.right_key);
      spec.edges.push_back(std::move(e));
    } else if (word == "select") {
      std::string table;
      if (!(words >> table)) fail("expected: select NAME COL...");
      std::vector<std::string> cols;
      while (words >> word) cols.push_back(word);
      if (cols.empty()) fail("select lists no columns");
      spec.selected.emplace_back(std::move(table), std::move(cols));
    } else {
      fail("unknown directive '" + word + "'");
    }
  }
  if (spec.tables.empty()) throw DataError(path + ": no tables declared");
  return spec;
}

// ---------------------------------------------------------------------------

namespace {

int join_key_column(const Table& t, const std::string& name, const std::string& context) {
  const int col = t.schema.index_of(name);
  if (col < 0) throw UsageError(context + ": no column '" + name + "'");
  if (t.schema.columns[col].role != ColumnRole::kJoinKey) {
    throw UsageError(context + ": column '" + name + "' does not have the join-key role");
  }
  return col;
}

}  // namespace

namespace {

KeyedTriples partial_aggregate_impl(const Table& t, std::shared_ptr<const AttrSpace> space,
                                    std::span<const std::string> key_columns,
                                    std::span<const AttrBinding> attrs,
                                    const std::vector<std::int64_t>* row_ids) {
  std::vector<int> key_cols;
  for (const auto& name : key_columns) {
    key_cols.push_back(join_key_column(t, name, "partial_aggregate"));
  }
  std::vector<AttrColumn> cols;
  for (const AttrBinding& b : attrs) {
    AttrColumn col;
    col.attr = b.attr;
    if (t.schema.columns[b.column].kind == ColumnKind::kContinuous) {
      col.cont = t.cont[b.column].data();
    } else {
      col.codes = t.codes[b.column].data();
    }
    cols.push_back(col);
  }

  std::map<KeyTuple, std::vector<std::int64_t>> buckets;
  KeyTuple key(key_cols.size());
  auto bucket_row = [&](std::int64_t r) {
    for (std::size_t k = 0; k < key_cols.size(); ++k) key[k] = t.keys[key_cols[k]][r];
    buckets[key].push_back(r);
  };
  if (row_ids == nullptr) {
    for (std::int64_t r = 0; r < t.rows; ++r) bucket_row(r);
  } else {
    for (std::int64_t r : *row_ids) bucket_row(r);
  }

  KeyedTriples out;
  out.key_cols.assign(key_columns.begin(), key_columns.end());
  for (const auto& [k, rows] : buckets) {
    out.groups.emplace(k, aggregate(space, cols, rows));
  }
  return out;
}

}  // namespace

KeyedTriples partial_aggregate(const Table& t, std::shared_ptr<const AttrSpace> space,
                               std::span<const std::string> key_columns,
                               std::span<const AttrBinding> attrs) {
  return partial_aggregate_impl(t, std::move(space), key_columns, attrs, nullptr);
}

KeyedTriples partial_aggregate(const Table& t, std::shared_ptr<const AttrSpace> space,
                               std::span<const std::string> key_columns,
                               std::span<const AttrBinding> attrs,
                               std::span<const std::int64_t> row_ids) {
  const std::vector<std::int64_t> rows(row_ids.begin(), row_ids.end());
  return partial_aggregate_impl(t, std::move(space), key_columns, attrs, &rows);
}

KeyedTriples combine(const KeyedTriples& left, const std::string& left_col,
                     const KeyedTriples& right, std::span<const std::string> output_cols) {
  if (right.key_cols.size() != 1) {
    throw UsageError("combine: right side must be keyed by exactly one column");
  }
  const auto pos_it = std::find(left.key_cols.begin(), left.key_cols.end(), left_col);
  if (pos_it == left.key_cols.end()) {
    throw UsageError("combine: left side has no key column '" + left_col + "'");
  }
  const std::size_t match_pos = static_cast<std::size_t>(pos_it - left.key_cols.begin());
  std::vector<std::size_t> out_pos;
  for (const auto& name : output_cols) {
    const auto it = std::find(left.key_cols.begin(), left.key_cols.end(), name);
    if (it == left.key_cols.end()) {
      throw UsageError("combine: output column '" + name + "' is not a left key column");
    }
    out_pos.push_back(static_cast<std::size_t>(it - left.key_cols.begin()));
  }

  KeyedTriples out;
  out.key_cols.assign(output_cols.begin(), output_cols.end());
  KeyTuple right_key(1);
  KeyTuple out_key(out_pos.size());
  for (const auto& [k, lt] : left.groups) {
    right_key[0] = k[match_pos];
    const auto rt = right.groups.find(right_key);
    if (rt == right.groups.end()) continue;  // inner join: no match, no output
    Triple product = lt * rt->second;
    for (std::size_t i = 0; i < out_pos.size(); ++i) out_key[i] = k[out_pos[i]];
    auto [slot, inserted] = out.groups.try_emplace(out_key, product.space_ptr());
    slot->second += product;
  }
  return out;
}

Triple as_single(const KeyedTriples& kt, std::shared_ptr<const AttrSpace> space) {
  if (!kt.key_cols.empty()) {
    throw UsageError("as_single: keyed result is still grouped");
  }
  if (kt.groups.empty()) return Triple(std::move(space));
  return kt.groups.begin()->second;
}

// ---------------------------------------------------------------------------

JoinTree resolve_join(std::span<const Table> tables, const JoinSpec& spec) {
  if (tables.size() != spec.tables.size()) {
    throw UsageError("resolve_join: table count does not match the spec");
  }
  JoinTree tree;
  tree.nodes.resize(spec.tables.size());
  for (std::size_t i = 0; i < spec.tables.size(); ++i) tree.nodes[i].table = static_cast<int>(i);

  // Edges must form a tree hanging off the root (first table).
  std::vector<bool> reached(spec.tables.size(), false);
  reached[0] = true;
  std::vector<JoinSpec::Edge> pending(spec.edges.begin(), spec.edges.end());
  while (!pending.empty()) {
    bool progressed = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const int li = spec.table_index(it->left_table);
      const int ri = spec.table_index(it->right_table);
      if (li < 0) throw DataError("join references unknown table '" + it->left_table + "'");
      if (ri < 0) throw DataError("join references unknown table '" + it->right_table + "'");
      // orient the edge: the side already reached is the parent
      int parent = -1, child = -1;
      std::string parent_key, child_key;
      if (reached[li] && !reached[ri]) {
        parent = li;
        child = ri;
        parent_key = it->left_key;
        child_key = it->right_key;
      } else if (reached[ri] && !reached[li]) {
        parent = ri;
        child = li;
        parent_key = it->right_key;
        child_key = it->left_key;
      } else if (reached[li] && reached[ri]) {
        throw UsageError("join edges form a cycle at '" + it->left_table + "' = '" +
                         it->right_table + "'");
      } else {
        ++it;
        continue;  // neither side reached yet, try again later
      }
      reached[child] = true;
      tree.nodes[child].parent = parent;
      tree.nodes[child].link_col =
          join_key_column(tables[child], child_key, "join table '" + spec.tables[child].name + "'");
      tree.nodes[child].parent_link_col = join_key_column(
          tables[parent], parent_key, "join table '" + spec.tables[parent].name + "'");
      tree.nodes[parent].children.push_back(child);
      it = pending.erase(it);
      progressed = true;
    }
    if (!progressed) {
      throw UsageError("join edges do not connect to the root table");
    }
  }
  for (std::size_t i = 1; i < spec.tables.size(); ++i) {
    if (!reached[i]) {
      throw UsageError("table '" + spec.tables[i].name + "' is not joined to the tree");
    }
  }

  // Global attribute space: selected attributes in spec order, names must be
  // unique across tables.
  std::vector<std::string> names;
  std::vector<AttrKind> kinds;
  for (const auto& [tname, cols] : spec.selected) {
    const int ti = spec.table_index(tname);
    if (ti < 0) throw DataError("select references unknown table '" + tname + "'");
    const Table& t = tables[ti];
    for (const auto& cname : cols) {
      const int col = t.schema.index_of(cname);
      if (col < 0) {
        throw DataError("select: table '" + tname + "' has no column '" + cname + "'");
      }
      if (t.schema.columns[col].role != ColumnRole::kFeature) {
        throw UsageError("select: column '" + cname + "' is not a feature column");
      }
      if (std::find(names.begin(), names.end(), cname) != names.end()) {
        throw UsageError("selected attribute '" + cname +
                         "' appears in more than one table; names must be unique");
      }
      const int attr = static_cast<int>(names.size());
      names.push_back(cname);
      kinds.push_back(t.schema.columns[col].kind == ColumnKind::kContinuous
                          ? AttrKind::kContinuous
                          : AttrKind::kCategorical);
      tree.nodes[ti].attrs.push_back({attr, col});
      tree.attr_node.push_back(ti);
      tree.attr_column.push_back(col);
    }
  }
  if (names.empty()) throw UsageError("join spec selects no attributes");
  tree.space = AttrSpace::make(std::move(names), std::move(kinds));
  return tree;
}

namespace {

// Key column names a node groups by: its link to the parent plus the links
// to each child (deduplicated, child order preserved).
std::vector<std::string> node_key_names(const JoinTree& tree, std::span<const Table> tables,
                                        int node_idx, std::vector<std::string>* child_links) {
  const JoinTree::Node& node = tree.nodes[node_idx];
  const Table& t = tables[node.table];
  std::vector<std::string> keys;
  auto push_unique = [&](const std::string& name) {
    if (std::find(keys.begin(), keys.end(), name) == keys.end()) keys.push_back(name);
  };
  if (node.parent >= 0) push_unique(t.schema.columns[node.link_col].name);
  for (int child : node.children) {
    const std::string& link = t.schema.columns[tree.nodes[child].parent_link_col].name;
    if (child_links) child_links->push_back(link);
    push_unique(link);
  }
  return keys;
}

KeyedTriples eval_subtree(const JoinTree& tree, std::span<const Table> tables, int node_idx) {
  const JoinTree::Node& node = tree.nodes[node_idx];
  std::vector<std::string> child_links;
  const std::vector<std::string> keys = node_key_names(tree, tables, node_idx, &child_links);
  KeyedTriples kt = partial_aggregate(tables[node.table], tree.space, keys, node.attrs);
  // Fold in each child's result, keeping only the keys still needed.
  std::vector<std::string> remaining = keys;
  const std::string own_link =
      node.parent >= 0 ? tables[node.table].schema.columns[node.link_col].name : std::string();
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    const KeyedTriples child = eval_subtree(tree, tables, node.children[c]);
    std::vector<std::string> output;
    for (const auto& name : remaining) {
      const bool still_linked =
          std::find(child_links.begin() + c + 1, child_links.end(), name) != child_links.end();
      if ((node.parent >= 0 && name == own_link) || still_linked) output.push_back(name);
    }
    kt = combine(kt, child_links[c], child, output);
    remaining = output;
  }
  return kt;
}

}  // namespace

Triple aggregate_join(std::span<const Table> tables, const JoinSpec& spec) {
  const JoinTree tree = resolve_join(tables, spec);
  const KeyedTriples root = eval_subtree(tree, tables, 0);
  return as_single(root, tree.space);
}

JoinEval prepare_join_eval(std::span<const Table> tables, const JoinTree& tree,
                           bool resolve_rows) {
  JoinEval eval;
  eval.tree = tree;
  const JoinTree::Node& root = tree.nodes[0];
  for (int child : root.children) {
    eval.child_results.push_back(eval_subtree(tree, tables, child));
    eval.root_keys.push_back(tables[0].schema.columns[tree.nodes[child].parent_link_col].name);
  }
  if (!resolve_rows) return eval;

  eval.resolved.assign(tree.nodes.size(), {});
  eval.resolved[0].resize(tables[0].rows);
  std::iota(eval.resolved[0].begin(), eval.resolved[0].end(), std::int64_t{0});
  // Resolve tables top-down; each dimension key must match exactly one row.
  std::vector<int> order;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (int child : tree.nodes[n].children) stack.push_back(child);
  }
  for (int n : order) {
    if (n == 0) continue;
    const JoinTree::Node& node = tree.nodes[n];
    const Table& t = tables[node.table];
    std::unordered_map<std::int64_t, std::int64_t> index;
    for (std::int64_t r = 0; r < t.rows; ++r) {
      const std::int64_t key = t.keys[node.link_col][r];
      if (!index.emplace(key, r).second) {
        throw DataError("imputation over joins needs unique dimension keys; key " +
                        std::to_string(key) + " repeats in column '" +
                        t.schema.columns[node.link_col].name + "'");
      }
    }
    const Table& parent = tables[tree.nodes[node.parent].table];
    const auto& parent_rows = eval.resolved[node.parent];
    auto& mine = eval.resolved[n];
    mine.resize(parent_rows.size());
    for (std::size_t i = 0; i < parent_rows.size(); ++i) {
      const std::int64_t key = parent.keys[node.parent_link_col][parent_rows[i]];
      const auto it = index.find(key);
      if (it == index.end()) {
        throw DataError("dangling join key " + std::to_string(key) + " in column '" +
                        parent.schema.columns[node.parent_link_col].name +
                        "'; imputation over joins needs every key to resolve");
      }
      mine[i] = it->second;
    }
  }
  return eval;
}

Triple aggregate_join_rows(const JoinEval& eval, std::span<const Table> tables,
                           std::span<const std::int64_t> root_rows) {
  const JoinTree& tree = eval.tree;
  const JoinTree::Node& root = tree.nodes[0];
  std::vector<std::string> child_links;
  const std::vector<std::string> keys = node_key_names(tree, tables, 0, &child_links);
  KeyedTriples kt = partial_aggregate(tables[0], tree.space, keys, root.attrs, root_rows);
  std::vector<std::string> remaining = keys;
  for (std::size_t c = 0; c < root.children.size(); ++c) {
    std::vector<std::string> output;
    for (const auto& name : remaining) {
      if (std::find(child_links.begin() + c + 1, child_links.end(), name) !=
          child_links.end()) {
        output.push_back(name);
      }
    }
    kt = combine(kt, child_links[c], eval.child_results[c], output);
    remaining = output;
  }
  return as_single(kt, tree.space);
}

}  // namespace ringml
