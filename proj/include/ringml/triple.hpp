#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ringml/attr_space.hpp"
#include "ringml/relation.hpp"

namespace ringml {

/// The compound cofactor aggregate (N, s, Q) of the generalized cofactor
/// ring: a count relation, one sum relation per attribute, and one
/// interaction relation per unordered attribute pair (upper triangle only;
/// the symmetric lower half is implied, never stored).
///
/// Storage is split by kind: purely continuous entries are dense scalars,
/// entries touching a categorical attribute are keyed relations.
class Triple {
 public:
  /// The additive identity over `space`.
  explicit Triple(std::shared_ptr<const AttrSpace> space);
  /// The multiplicative identity over `space`.
  static Triple one(std::shared_ptr<const AttrSpace> space);

  const AttrSpace& space() const { return *space_; }
  const std::shared_ptr<const AttrSpace>& space_ptr() const { return space_; }

  double count() const { return n_; }
  bool in_support(int attr) const { return support_[attr] != 0; }
  std::vector<int> support() const;

  // General relational views (canonical: zero-weight entries omitted).
  RelationValue count_relation() const;
  RelationValue sum_relation(int attr) const;
  /// Interaction of the unordered pair {i, j}; argument order is free.
  RelationValue interaction_relation(int i, int j) const;

  Triple& operator+=(const Triple& other);
  Triple& operator-=(const Triple& other);
  friend Triple operator+(Triple a, const Triple& b) { return a += b; }
  friend Triple operator-(Triple a, const Triple& b) { return a -= b; }
  friend Triple operator*(const Triple& a, const Triple& b);

  // Raw slot access for the dense expansion and the aggregation kernels.
  const Eigen::VectorXd& cont_sums() const { return cont_s_; }
  const Eigen::VectorXd& cont_interactions() const { return cont_q_; }
  const RelMap& cat_sum(int cat_slot) const { return rel_s_[cat_slot]; }
  const RelMap& rel_interaction(int rel_offset) const { return rel_q_[rel_offset]; }

 private:
  friend class TripleBuilder;

  std::shared_ptr<const AttrSpace> space_;
  std::vector<std::uint8_t> support_;
  double n_ = 0.0;
  Eigen::VectorXd cont_s_;
  Eigen::VectorXd cont_q_;
  std::vector<RelMap> rel_s_;
  std::vector<RelMap> rel_q_;
};

/// Lifts one continuous value into a triple: s_i = x, Q(i,i) = x^2.
Triple lift_continuous(std::shared_ptr<const AttrSpace> space, int attr, double x);

/// Lifts one category code into a triple: s_i = {x -> 1}, Q(i,i) = {x -> 1}.
Triple lift_categorical(std::shared_ptr<const AttrSpace> space, int attr, std::int32_t code);

/// Bulk-lifts a full row (one value per attribute, categorical values given
/// as integral codes). Equals the triple_mul fold of the unary lifts but is
/// computed directly. NaN marks an absent value and is a usage error: rows
/// must be imputed before lifting.
Triple lift_row(std::shared_ptr<const AttrSpace> space, std::span<const double> values);

/// Bulk-lifts a subset of attributes (used by factorized partial aggregates).
Triple lift_row(std::shared_ptr<const AttrSpace> space, std::span<const int> attrs,
                std::span<const double> values);

/// Column binding of one attribute for bulk aggregation. Exactly one of the
/// two pointers is set, matching the attribute kind; both are indexed by
/// absolute row id.
struct AttrColumn {
  int attr = -1;
  const double* cont = nullptr;
  const std::int32_t* codes = nullptr;
};

/// Sum of lifted rows over [0, rows). Deterministic for any thread count:
/// rows are cut into fixed-size chunks merged in chunk order.
Triple aggregate(std::shared_ptr<const AttrSpace> space, std::span<const AttrColumn> cols,
                 std::int64_t rows, int threads = 1);

/// Sum of lifted rows over an explicit row-id list.
Triple aggregate(std::shared_ptr<const AttrSpace> space, std::span<const AttrColumn> cols,
                 std::span<const std::int64_t> row_ids, int threads = 1);

/// Sum of lifted rows r in [0, rows) with mask[r] == keep.
Triple aggregate_where(std::shared_ptr<const AttrSpace> space, std::span<const AttrColumn> cols,
                       const std::uint8_t* mask, bool keep, std::int64_t rows, int threads = 1);

/// Debug serialization of a triple (versioned binary; internal format, not
/// a compatibility contract).
std::vector<std::uint8_t> serialize_triple(const Triple& t);
Triple deserialize_triple(std::shared_ptr<const AttrSpace> space,
                          std::span<const std::uint8_t> bytes);

/// Per-entry comparison |a - b| <= tol * max(1, |a|, |b|) over every slot,
/// with absent relation entries read as zero.
bool triple_close(const Triple& a, const Triple& b, double tol);

/// Largest per-entry gap |a - b| relative to max(1, |a|, |b|).
double triple_gap(const Triple& a, const Triple& b);

}  // namespace ringml
