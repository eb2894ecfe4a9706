#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ringml/errors.hpp"

namespace ringml {

enum class AttrKind : std::uint8_t { kContinuous, kCategorical };

/// Fixed, ordered universe of model attributes. Every Triple is interpreted
/// against exactly one AttrSpace; indices are stable for the life of a run.
///
/// The space also owns the packed storage layout shared by all its triples:
/// sums and interactions between continuous attributes live in dense slots,
/// anything touching a categorical attribute lives in a relation slot.
class AttrSpace {
 public:
  static std::shared_ptr<const AttrSpace> make(std::vector<std::string> names,
                                               std::vector<AttrKind> kinds) {
    return std::shared_ptr<const AttrSpace>(new AttrSpace(std::move(names), std::move(kinds)));
  }

  int size() const { return static_cast<int>(kinds_.size()); }
  AttrKind kind(int attr) const { return kinds_[attr]; }
  bool is_continuous(int attr) const { return kinds_[attr] == AttrKind::kContinuous; }
  const std::string& name(int attr) const { return names_[attr]; }

  int index_of(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? -1 : it->second;
  }

  bool operator==(const AttrSpace& other) const {
    return names_ == other.names_ && kinds_ == other.kinds_;
  }

  // Packed layout -----------------------------------------------------------

  int cont_count() const { return cont_count_; }
  int cat_count() const { return cat_count_; }
  /// Dense slot of a continuous attribute (-1 for categorical).
  int cont_slot(int attr) const { return cont_slot_[attr]; }
  /// Relation slot of a categorical attribute (-1 for continuous).
  int cat_slot(int attr) const { return cat_slot_[attr]; }

  int pair_count() const { return size() * (size() + 1) / 2; }
  /// Upper-triangle pair index, requires i <= j.
  int pair_index(int i, int j) const {
    return i * size() - i * (i - 1) / 2 + (j - i);
  }
  /// True when interaction (i, j) is a plain scalar (both continuous).
  bool pair_is_scalar(int p) const { return pair_scalar_[p]; }
  /// Offset into the scalar or relation interaction storage.
  int pair_offset(int p) const { return pair_offset_[p]; }
  int scalar_pair_count() const { return scalar_pairs_; }
  int rel_pair_count() const { return rel_pairs_; }

 private:
  AttrSpace(std::vector<std::string> names, std::vector<AttrKind> kinds)
      : names_(std::move(names)), kinds_(std::move(kinds)) {
    if (names_.size() != kinds_.size()) {
      throw UsageError("AttrSpace: names and kinds must have equal length");
    }
    const int m = size();
    cont_slot_.assign(m, -1);
    cat_slot_.assign(m, -1);
    for (int a = 0; a < m; ++a) {
      if (!by_name_.emplace(names_[a], a).second) {
        throw UsageError("AttrSpace: duplicate attribute name '" + names_[a] + "'");
      }
      if (kinds_[a] == AttrKind::kContinuous) {
        cont_slot_[a] = cont_count_++;
      } else {
        cat_slot_[a] = cat_count_++;
      }
    }
    pair_scalar_.assign(pair_count(), false);
    pair_offset_.assign(pair_count(), -1);
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        const int p = pair_index(i, j);
        const bool scalar = is_continuous(i) && is_continuous(j);
        pair_scalar_[p] = scalar;
        pair_offset_[p] = scalar ? scalar_pairs_++ : rel_pairs_++;
      }
    }
  }

  std::vector<std::string> names_;
  std::vector<AttrKind> kinds_;
  std::unordered_map<std::string, int> by_name_;
  std::vector<int> cont_slot_;
  std::vector<int> cat_slot_;
  std::vector<bool> pair_scalar_;
  std::vector<int> pair_offset_;
  int cont_count_ = 0;
  int cat_count_ = 0;
  int scalar_pairs_ = 0;
  int rel_pairs_ = 0;
};

}  // namespace ringml
