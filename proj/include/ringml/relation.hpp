#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace ringml {

/// Map from packed category-key tuples to 64-bit float weights.
///
/// Key packing: arity 0 uses the single key 0 (the empty tuple), arity 1
/// stores one non-negative 32-bit category code, arity 2 stores two codes as
/// (first << 32) | second with the lower-indexed attribute's code first.
using RelMap = std::unordered_map<std::uint64_t, double>;

inline std::uint64_t pack_key() { return 0; }
inline std::uint64_t pack_key(std::int32_t code) {
  return static_cast<std::uint64_t>(static_cast<std::uint32_t>(code));
}
inline std::uint64_t pack_key(std::int32_t first, std::int32_t second) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(first)) << 32) |
         static_cast<std::uint64_t>(static_cast<std::uint32_t>(second));
}

inline std::int32_t key_part(std::uint64_t key, int part, int arity) {
  if (arity == 2 && part == 0) return static_cast<std::int32_t>(key >> 32);
  return static_cast<std::int32_t>(key & 0xffffffffULL);
}

/// A ring entry in its general relational form: a set of weighted key tuples.
/// A scalar c is the arity-0 relation { () -> c }; the empty relation is the
/// zero of every arity. Canonical form never stores weight-0 entries.
struct RelationValue {
  int arity = 0;
  RelMap entries;

  static RelationValue scalar(double c) {
    RelationValue r;
    if (c != 0.0) r.entries.emplace(pack_key(), c);
    return r;
  }

  bool empty() const { return entries.empty(); }

  double weight(std::uint64_t key) const {
    auto it = entries.find(key);
    return it == entries.end() ? 0.0 : it->second;
  }

  /// Scalar view of an arity-0 relation.
  double as_scalar() const { return weight(pack_key()); }
};

/// Union-with-summed-weights; drops entries that land exactly on zero.
inline void rel_add_into(RelMap& dst, const RelMap& src, double scale = 1.0) {
  for (const auto& [k, w] : src) {
    auto [it, inserted] = dst.try_emplace(k, 0.0);
    it->second += scale * w;
    if (it->second == 0.0) dst.erase(it);
  }
}

/// dst -= src with residue pruning: entries whose result is negligible
/// relative to the operand magnitudes are floating-point residue of an
/// exact cancellation and are removed to keep supports from growing.
inline void rel_sub_into(RelMap& dst, const RelMap& src, double prune_rel = 1e-12) {
  for (const auto& [k, w] : src) {
    auto [it, inserted] = dst.try_emplace(k, 0.0);
    const double before = inserted ? 0.0 : it->second;
    const double result = before - w;
    const double scale = std::abs(before) > std::abs(w) ? std::abs(before) : std::abs(w);
    if (result == 0.0 || std::abs(result) < prune_rel * scale) {
      dst.erase(it);
    } else {
      it->second = result;
    }
  }
}

inline void rel_scale_into(RelMap& dst, const RelMap& src, double scale) {
  if (scale == 0.0) return;
  for (const auto& [k, w] : src) {
    auto [it, inserted] = dst.try_emplace(k, 0.0);
    it->second += scale * w;
    if (it->second == 0.0) dst.erase(it);
  }
}

}  // namespace ringml
