#include "ringml/cofactor.hpp"

#include <algorithm>
#include <cmath>

#include "ringml/errors.hpp"

namespace ringml {

int CofactorLayout::column_of(int attr, std::int32_t code) const {
  const auto& cats = categories[attr];
  auto it = std::lower_bound(cats.begin(), cats.end(), code);
  if (it == cats.end() || *it != code) return -1;
  return col_begin[attr] + static_cast<int>(it - cats.begin());
}

void CofactorLayout::expand_row(std::span<const double> values, Eigen::VectorXd& out) const {
  out.setZero(width);
  out[0] = 1.0;
  for (int a = 0; a < space->size(); ++a) {
    if (space->is_continuous(a)) {
      out[col_begin[a]] = values[a];
    } else {
      const int col = column_of(a, static_cast<std::int32_t>(values[a]));
      if (col >= 0) out[col] = 1.0;
    }
  }
}

DenseCofactor to_dense(const Triple& t) {
  const AttrSpace& space = t.space();
  DenseCofactor dense;
  dense.layout.space = t.space_ptr();
  dense.layout.col_begin.resize(space.size());
  dense.layout.col_width.resize(space.size());
  dense.layout.categories.resize(space.size());

  // Observed categories: union of the sum relation and the diagonal
  // group-by counts, sorted ascending by code.
  int width = 1;
  for (int a = 0; a < space.size(); ++a) {
    dense.layout.col_begin[a] = width;
    if (space.is_continuous(a)) {
      dense.layout.col_width[a] = 1;
      width += 1;
      continue;
    }
    std::vector<std::int32_t> cats;
    for (const auto& [k, w] : t.cat_sum(space.cat_slot(a))) {
      cats.push_back(static_cast<std::int32_t>(k));
    }
    const int diag = space.pair_offset(space.pair_index(a, a));
    for (const auto& [k, w] : t.rel_interaction(diag)) {
      cats.push_back(static_cast<std::int32_t>(k));
    }
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
    dense.layout.categories[a] = std::move(cats);
    dense.layout.col_width[a] = static_cast<int>(dense.layout.categories[a].size());
    width += dense.layout.col_width[a];
  }
  dense.layout.width = width;
  dense.matrix = Eigen::MatrixXd::Zero(width, width);
  Eigen::MatrixXd& m = dense.matrix;

  m(0, 0) = t.count();
  for (int a = 0; a < space.size(); ++a) {
    if (space.is_continuous(a)) {
      m(0, dense.layout.col_begin[a]) = t.cont_sums()[space.cont_slot(a)];
    } else {
      for (const auto& [k, w] : t.cat_sum(space.cat_slot(a))) {
        m(0, dense.layout.column_of(a, static_cast<std::int32_t>(k))) = w;
      }
    }
  }

  // A category with any real support always has an exact integer group-by
  // count, so it is in the dictionary. An interaction key outside the
  // dictionary is either float residue of an exact cancellation (dropped)
  // or an inconsistent hand-built triple (rejected).
  auto scatter_col = [&](int attr, std::uint64_t key, double w) {
    const int col = dense.layout.column_of(attr, static_cast<std::int32_t>(key));
    if (col < 0 && std::abs(w) > 1e-6 * (1.0 + std::abs(t.count()))) {
      throw DataError("to_dense: interaction references category absent from sums (attribute '" +
                      space.name(attr) + "')");
    }
    return col;
  };

  for (int i = 0; i < space.size(); ++i) {
    for (int j = i; j < space.size(); ++j) {
      const int p = space.pair_index(i, j);
      const int off = space.pair_offset(p);
      if (space.pair_is_scalar(p)) {
        m(dense.layout.col_begin[i], dense.layout.col_begin[j]) = t.cont_interactions()[off];
        continue;
      }
      const bool cat_i = !space.is_continuous(i);
      const bool cat_j = !space.is_continuous(j);
      for (const auto& [k, w] : t.rel_interaction(off)) {
        if (w == 0.0) continue;
        if (i == j) {
          const int c = scatter_col(i, k, w);
          if (c >= 0) m(c, c) = w;
        } else if (cat_i && cat_j) {
          const int ci = scatter_col(i, k >> 32, w);
          const int cj = scatter_col(j, k & 0xffffffffULL, w);
          if (ci >= 0 && cj >= 0) m(ci, cj) = w;
        } else if (cat_i) {
          const int ci = scatter_col(i, k, w);
          if (ci >= 0) m(ci, dense.layout.col_begin[j]) = w;
        } else {
          const int cj = scatter_col(j, k, w);
          if (cj >= 0) m(dense.layout.col_begin[i], cj) = w;
        }
      }
    }
  }

  m.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
  return dense;
}

}  // namespace ringml
