#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "ringml/attr_space.hpp"
#include "ringml/triple.hpp"

namespace ringml {

/// Column layout of the one-hot expansion: column 0 is the intercept, then
/// one column per continuous attribute and one per observed category of each
/// categorical attribute (categories sorted ascending by code).
struct CofactorLayout {
  std::shared_ptr<const AttrSpace> space;
  std::vector<int> col_begin;                       // per attribute
  std::vector<int> col_width;                       // per attribute
  std::vector<std::vector<std::int32_t>> categories;  // per attribute; empty if continuous
  int width = 0;

  /// Column of a continuous attribute.
  int column_of(int attr) const { return col_begin[attr]; }
  /// Column of one category of a categorical attribute; -1 if unobserved.
  int column_of(int attr, std::int32_t code) const;
  /// Expands one row (per-attribute values, codes as integral doubles) into
  /// the dense basis. Unobserved categories expand to an all-zero block.
  void expand_row(std::span<const double> values, Eigen::VectorXd& out) const;
};

/// One-hot-expanded real-valued cofactor matrix X^T X with intercept.
struct DenseCofactor {
  CofactorLayout layout;
  Eigen::MatrixXd matrix;

  int width() const { return layout.width; }
  double count() const { return matrix(0, 0); }
};

/// Expands a triple into the dense symmetric cofactor matrix. Absent
/// interactions are zero; the mirror of the stored upper triangle fills the
/// lower half, so the result is symmetric by construction.
DenseCofactor to_dense(const Triple& t);

}  // namespace ringml
