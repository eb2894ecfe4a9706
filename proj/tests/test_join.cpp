#include <functional>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ringml/cofactor.hpp"
#include "ringml/errors.hpp"
#include "ringml/join.hpp"

using namespace ringml;
using oracles::ToyTable;

namespace {

/// Builds a table whose join-key cells come in as integral doubles.
Table join_table(const std::vector<ColumnSpec>& specs,
                 const std::vector<std::vector<double>>& rows) {
  Table t;
  t.schema.columns = specs;
  t.rows = static_cast<std::int64_t>(rows.size());
  t.init_storage();
  for (std::int64_t r = 0; r < t.rows; ++r) {
    for (int c = 0; c < t.schema.size(); ++c) {
      switch (specs[c].role) {
        case ColumnRole::kFeature:
          t.set_feature_value(c, r, rows[r][c]);
          break;
        case ColumnRole::kJoinKey:
          t.keys[c][r] = static_cast<std::int64_t>(rows[r][c]);
          break;
        case ColumnRole::kId:
          t.ids[c][r] = std::to_string(rows[r][c]);
          break;
      }
    }
  }
  for (int c = 0; c < t.schema.size(); ++c) {
    if (specs[c].kind != ColumnKind::kCategorical || specs[c].role != ColumnRole::kFeature) {
      continue;
    }
    std::int32_t max_code = 0;
    for (std::int64_t r = 0; r < t.rows; ++r) max_code = std::max(max_code, t.codes[c][r]);
    for (std::int32_t k = 0; k <= max_code; ++k) t.dict[c].push_back("c" + std::to_string(k));
  }
  return t;
}

ToyTable materialize_join(const std::vector<Table>& tables, const JoinSpec& spec,
                          const JoinTree& tree) {
  (void)spec;
  return oracles::materialize_join(tables, tree);
}

}  // namespace

TEST_CASE("partial_aggregate groups per key") {
  //  R = {(b=1, a=2), (b=1, a=4), (b=2, a=1)}
  const Table r = join_table({{"b", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                              {"a", ColumnKind::kContinuous, ColumnRole::kFeature}},
                             {{1, 2}, {1, 4}, {2, 1}});
  auto space = AttrSpace::make({"a"}, {AttrKind::kContinuous});
  const std::vector<std::string> keys{"b"};
  const std::vector<AttrBinding> attrs{{0, 1}};
  const KeyedTriples kt = partial_aggregate(r, space, keys, attrs);
  REQUIRE(kt.groups.size() == 2);
  const Triple& g1 = kt.groups.at(KeyTuple{1});
  CHECK(g1.count() == 2.0);
  CHECK(g1.sum_relation(0).as_scalar() == 6.0);
  CHECK(g1.interaction_relation(0, 0).as_scalar() == 20.0);
  const Triple& g2 = kt.groups.at(KeyTuple{2});
  CHECK(g2.count() == 1.0);
  CHECK(g2.sum_relation(0).as_scalar() == 1.0);
  CHECK(g2.interaction_relation(0, 0).as_scalar() == 1.0);
}

TEST_CASE("partial_aggregate of an empty table is an empty map") {
  const Table r = join_table({{"b", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                              {"a", ColumnKind::kContinuous, ColumnRole::kFeature}},
                             {});
  auto space = AttrSpace::make({"a"}, {AttrKind::kContinuous});
  const std::vector<std::string> keys{"b"};
  const std::vector<AttrBinding> attrs{{0, 1}};
  CHECK(partial_aggregate(r, space, keys, attrs).groups.empty());
}

TEST_CASE("partial_aggregate with one row per key is a unary lift") {
  const Table r = join_table({{"b", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                              {"a", ColumnKind::kContinuous, ColumnRole::kFeature}},
                             {{1, 3}, {2, 5}});
  auto space = AttrSpace::make({"a"}, {AttrKind::kContinuous});
  const std::vector<std::string> keys{"b"};
  const std::vector<AttrBinding> attrs{{0, 1}};
  const KeyedTriples kt = partial_aggregate(r, space, keys, attrs);
  CHECK(triple_gap(kt.groups.at(KeyTuple{1}), lift_continuous(space, 0, 3.0)) == 0.0);
  CHECK(triple_gap(kt.groups.at(KeyTuple{2}), lift_continuous(space, 0, 5.0)) == 0.0);
}

namespace {

struct StarFixture {
  std::vector<Table> tables;
  JoinSpec spec;
};

StarFixture simple_star(const std::vector<std::vector<double>>& fact_rows,
                        const std::vector<std::vector<double>>& dim_rows) {
  StarFixture f;
  f.tables.push_back(join_table({{"k", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                                 {"x", ColumnKind::kContinuous, ColumnRole::kFeature}},
                                fact_rows));
  f.tables.push_back(join_table({{"k", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                                 {"y", ColumnKind::kContinuous, ColumnRole::kFeature}},
                                dim_rows));
  f.spec.tables = {{"fact", "", ""}, {"dim", "", ""}};
  f.spec.edges = {{"fact", "k", "dim", "k"}};
  f.spec.selected = {{"fact", {"x"}}, {"dim", {"y"}}};
  return f;
}

}  // namespace

TEST_CASE("combine multiplies per key and folds at the root") {
  const StarFixture f = simple_star({{1, 2}, {1, 3}, {2, 5}}, {{1, 10}, {2, 20}});
  const JoinTree tree = resolve_join(f.tables, f.spec);
  const std::vector<std::string> key{"k"};
  const std::vector<AttrBinding> fact_attrs{{0, 1}};
  const std::vector<AttrBinding> dim_attrs{{1, 1}};
  const KeyedTriples left = partial_aggregate(f.tables[0], tree.space, key, fact_attrs);
  const KeyedTriples right = partial_aggregate(f.tables[1], tree.space, key, dim_attrs);
  const KeyedTriples folded = combine(left, "k", right, {});
  const Triple got = as_single(folded, tree.space);

  const ToyTable mat = materialize_join(f.tables, f.spec, tree);
  CHECK(oracles::matrix_gap(to_dense(got).matrix, oracles::brute_force_cofactor(mat)) <= 1e-12);
}

TEST_CASE("combine skips keys present on only one side") {
  const StarFixture f = simple_star({{1, 2}, {7, 3}}, {{1, 10}});
  const JoinTree tree = resolve_join(f.tables, f.spec);
  const std::vector<std::string> key{"k"};
  const std::vector<AttrBinding> fact_attrs{{0, 1}};
  const std::vector<AttrBinding> dim_attrs{{1, 1}};
  const KeyedTriples left = partial_aggregate(f.tables[0], tree.space, key, fact_attrs);
  const KeyedTriples right = partial_aggregate(f.tables[1], tree.space, key, dim_attrs);
  const Triple got = as_single(combine(left, "k", right, {}), tree.space);
  CHECK(got.count() == 1.0);  // only the k=1 fact row survives the inner join
}

TEST_CASE("combine against all-one triples reduces to the left fold") {
  const StarFixture f = simple_star({{1, 2}, {2, 3}}, {{1, 0}, {2, 0}});
  const JoinTree tree = resolve_join(f.tables, f.spec);
  const std::vector<std::string> key{"k"};
  const std::vector<AttrBinding> fact_attrs{{0, 1}};
  const KeyedTriples left = partial_aggregate(f.tables[0], tree.space, key, fact_attrs);
  KeyedTriples ones;
  ones.key_cols = {"k"};
  ones.groups.emplace(KeyTuple{1}, Triple::one(tree.space));
  ones.groups.emplace(KeyTuple{2}, Triple::one(tree.space));
  const Triple got = as_single(combine(left, "k", ones, {}), tree.space);
  Triple expected(tree.space);
  for (const auto& [k, t] : left.groups) expected += t;
  CHECK(triple_gap(got, expected) == 0.0);
}

TEST_CASE("aggregate_join equals the materialized oracle on a snowflake") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> key_dist(0, 6);
  std::uniform_real_distribution<double> val(-2, 2);
  for (int trial = 0; trial < 15; ++trial) {
    // fact(k1, x) -> mid(k1, k2, y) -> leaf(k2, z)
    std::vector<std::vector<double>> fact, mid, leaf;
    const int nf = 1 + static_cast<int>(rng() % 50);
    for (int r = 0; r < nf; ++r) fact.push_back({double(key_dist(rng)), val(rng)});
    for (int k = 0; k <= 6; ++k) {
      if (rng() % 4 != 0) mid.push_back({double(k), double(key_dist(rng)), val(rng)});
    }
    for (int k = 0; k <= 6; ++k) {
      if (rng() % 5 != 0) leaf.push_back({double(k), double(int(rng() % 3))});
    }
    std::vector<Table> tables;
    tables.push_back(join_table({{"k1", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                                 {"x", ColumnKind::kContinuous, ColumnRole::kFeature}},
                                fact));
    tables.push_back(join_table({{"k1", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                                 {"k2", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                                 {"y", ColumnKind::kContinuous, ColumnRole::kFeature}},
                                mid));
    tables.push_back(join_table({{"k2", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                                 {"z", ColumnKind::kCategorical, ColumnRole::kFeature}},
                                leaf));
    JoinSpec spec;
    spec.tables = {{"fact", "", ""}, {"mid", "", ""}, {"leaf", "", ""}};
    spec.edges = {{"fact", "k1", "mid", "k1"}, {"mid", "k2", "leaf", "k2"}};
    spec.selected = {{"fact", {"x"}}, {"mid", {"y"}}, {"leaf", {"z"}}};

    const JoinTree tree = resolve_join(tables, spec);
    const ToyTable mat = materialize_join(tables, spec, tree);
    const Triple got = aggregate_join(tables, spec);
    if (mat.rows.empty()) {
      CHECK(got.count() == 0.0);
      continue;
    }
    CHECK(oracles::matrix_gap(to_dense(got).matrix, oracles::brute_force_cofactor(mat)) <= 1e-9);
  }
}

TEST_CASE("aggregate_join with no matching dimension rows is zero") {
  const StarFixture f = simple_star({{1, 2}, {2, 3}}, {{5, 1}});
  const Triple got = aggregate_join(f.tables, f.spec);
  CHECK(got.count() == 0.0);
}

TEST_CASE("aggregate_join rejects cyclic specs") {
  StarFixture f = simple_star({{1, 2}}, {{1, 3}});
  f.spec.edges.push_back({"dim", "k", "fact", "k"});  // second edge closes a cycle
  CHECK_THROWS_AS(aggregate_join(f.tables, f.spec), UsageError);
}

TEST_CASE("duplicating a dimension row doubles that key's contribution") {
  const StarFixture base = simple_star({{1, 2}, {2, 3}}, {{1, 10}, {2, 20}});
  const StarFixture dup = simple_star({{1, 2}, {2, 3}}, {{1, 10}, {1, 10}, {2, 20}});
  const JoinTree base_tree = resolve_join(base.tables, base.spec);
  const JoinTree dup_tree = resolve_join(dup.tables, dup.spec);
  const ToyTable base_mat = materialize_join(base.tables, base.spec, base_tree);
  const ToyTable dup_mat = materialize_join(dup.tables, dup.spec, dup_tree);
  CHECK(dup_mat.rows.size() == base_mat.rows.size() + 1);
  const Triple got = aggregate_join(dup.tables, dup.spec);
  CHECK(oracles::matrix_gap(to_dense(got).matrix, oracles::brute_force_cofactor(dup_mat)) <=
        1e-12);
}

TEST_CASE("aggregate_join is independent of edge order") {
  std::mt19937_64 rng(131);
  std::uniform_real_distribution<double> val(-2, 2);
  std::vector<std::vector<double>> fact, d1, d2;
  for (int r = 0; r < 40; ++r) {
    fact.push_back({double(rng() % 4), double(rng() % 3), val(rng)});
  }
  for (int k = 0; k < 4; ++k) d1.push_back({double(k), val(rng)});
  for (int k = 0; k < 3; ++k) d2.push_back({double(k), val(rng)});
  std::vector<Table> tables;
  tables.push_back(join_table({{"ka", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                               {"kb", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                               {"x", ColumnKind::kContinuous, ColumnRole::kFeature}},
                              fact));
  tables.push_back(join_table({{"ka", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                               {"u", ColumnKind::kContinuous, ColumnRole::kFeature}},
                              d1));
  tables.push_back(join_table({{"kb", ColumnKind::kContinuous, ColumnRole::kJoinKey},
                               {"v", ColumnKind::kContinuous, ColumnRole::kFeature}},
                              d2));
  JoinSpec spec;
  spec.tables = {{"fact", "", ""}, {"d1", "", ""}, {"d2", "", ""}};
  spec.selected = {{"fact", {"x"}}, {"d1", {"u"}}, {"d2", {"v"}}};
  spec.edges = {{"fact", "ka", "d1", "ka"}, {"fact", "kb", "d2", "kb"}};
  const Triple forward = aggregate_join(tables, spec);
  std::swap(spec.edges[0], spec.edges[1]);
  const Triple backward = aggregate_join(tables, spec);
  CHECK(triple_gap(forward, backward) <= 1e-9);
}

TEST_CASE("aggregate_join_rows restricts the fact side") {
  const StarFixture f = simple_star({{1, 2}, {1, 3}, {2, 5}}, {{1, 10}, {2, 20}});
  const JoinTree tree = resolve_join(f.tables, f.spec);
  const JoinEval eval = prepare_join_eval(f.tables, tree, false);
  const std::vector<std::int64_t> subset{0, 2};
  const Triple part = aggregate_join_rows(eval, f.tables, subset);
  CHECK(part.count() == 2.0);
  const std::vector<std::int64_t> none{};
  CHECK(aggregate_join_rows(eval, f.tables, none).count() == 0.0);
}

TEST_CASE("prepare_join_eval resolves unique dimension rows") {
  const StarFixture f = simple_star({{1, 2}, {2, 3}}, {{1, 10}, {2, 20}});
  const JoinTree tree = resolve_join(f.tables, f.spec);
  const JoinEval eval = prepare_join_eval(f.tables, tree, true);
  CHECK(eval.resolved[1] == std::vector<std::int64_t>{0, 1});

  const StarFixture dangling = simple_star({{1, 2}, {9, 3}}, {{1, 10}});
  const JoinTree t2 = resolve_join(dangling.tables, dangling.spec);
  CHECK_THROWS_AS(prepare_join_eval(dangling.tables, t2, true), DataError);

  const StarFixture dup = simple_star({{1, 2}}, {{1, 10}, {1, 11}});
  const JoinTree t3 = resolve_join(dup.tables, dup.spec);
  CHECK_THROWS_AS(prepare_join_eval(dup.tables, t3, true), DataError);
}
