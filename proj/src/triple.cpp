#include "ringml/triple.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "ringml/errors.hpp"
#include "ringml/parallel.hpp"

namespace ringml {

namespace {

void require_same_space(const Triple& a, const Triple& b, const char* op) {
  if (&a.space() == &b.space()) return;
  if (a.space() == b.space()) return;
  throw UsageError(std::string(op) + ": operands belong to different attribute spaces");
}

}  // namespace

// Test/build backdoor into the packed slots; every mutation of a Triple
// outside the ring operators goes through here.
class TripleBuilder {
 public:
  static void set_count(Triple& t, double n) { t.n_ = n; }
  static void add_support(Triple& t, int attr) { t.support_[attr] = 1; }
  static Eigen::VectorXd& cont_s(Triple& t) { return t.cont_s_; }
  static Eigen::VectorXd& cont_q(Triple& t) { return t.cont_q_; }
  static std::vector<RelMap>& rel_s(Triple& t) { return t.rel_s_; }
  static std::vector<RelMap>& rel_q(Triple& t) { return t.rel_q_; }
};

Triple::Triple(std::shared_ptr<const AttrSpace> space)
    : space_(std::move(space)),
      support_(space_->size(), 0),
      cont_s_(Eigen::VectorXd::Zero(space_->cont_count())),
      cont_q_(Eigen::VectorXd::Zero(space_->scalar_pair_count())),
      rel_s_(space_->cat_count()),
      rel_q_(space_->rel_pair_count()) {}

Triple Triple::one(std::shared_ptr<const AttrSpace> space) {
  Triple t(std::move(space));
  t.n_ = 1.0;
  return t;
}

std::vector<int> Triple::support() const {
  std::vector<int> out;
  for (int a = 0; a < space_->size(); ++a) {
    if (support_[a]) out.push_back(a);
  }
  return out;
}

RelationValue Triple::count_relation() const {
  RelationValue r;
  r.arity = 0;
  if (n_ != 0.0) r.entries.emplace(pack_key(), n_);
  return r;
}

RelationValue Triple::sum_relation(int attr) const {
  RelationValue r;
  if (space_->is_continuous(attr)) {
    r.arity = 0;
    const double v = cont_s_[space_->cont_slot(attr)];
    if (v != 0.0) r.entries.emplace(pack_key(), v);
  } else {
    r.arity = 1;
    for (const auto& [k, w] : rel_s_[space_->cat_slot(attr)]) {
      if (w != 0.0) r.entries.emplace(k, w);
    }
  }
  return r;
}

RelationValue Triple::interaction_relation(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int p = space_->pair_index(i, j);
  RelationValue r;
  if (space_->pair_is_scalar(p)) {
    r.arity = 0;
    const double v = cont_q_[space_->pair_offset(p)];
    if (v != 0.0) r.entries.emplace(pack_key(), v);
    return r;
  }
  // Diagonal entries of a categorical attribute collapse (x, x) to x.
  const int cat_i = space_->is_continuous(i) ? 0 : 1;
  const int cat_j = space_->is_continuous(j) ? 0 : 1;
  r.arity = (i == j) ? cat_i : cat_i + cat_j;
  for (const auto& [k, w] : rel_q_[space_->pair_offset(p)]) {
    if (w != 0.0) r.entries.emplace(k, w);
  }
  return r;
}

Triple& Triple::operator+=(const Triple& other) {
  require_same_space(*this, other, "triple_add");
  n_ += other.n_;
  cont_s_ += other.cont_s_;
  cont_q_ += other.cont_q_;
  for (std::size_t i = 0; i < rel_s_.size(); ++i) rel_add_into(rel_s_[i], other.rel_s_[i]);
  for (std::size_t i = 0; i < rel_q_.size(); ++i) rel_add_into(rel_q_[i], other.rel_q_[i]);
  for (int a = 0; a < space_->size(); ++a) support_[a] |= other.support_[a];
  return *this;
}

Triple& Triple::operator-=(const Triple& other) {
  require_same_space(*this, other, "triple_sub");
  n_ -= other.n_;
  cont_s_ -= other.cont_s_;
  cont_q_ -= other.cont_q_;
  for (std::size_t i = 0; i < rel_s_.size(); ++i) rel_sub_into(rel_s_[i], other.rel_s_[i]);
  for (std::size_t i = 0; i < rel_q_.size(); ++i) rel_sub_into(rel_q_[i], other.rel_q_[i]);
  for (int a = 0; a < space_->size(); ++a) support_[a] |= other.support_[a];
  return *this;
}

namespace {

// Cross term s_a s_b^T for one pair (lo, hi), lo < hi, each sum relation of
// arity <= 1. Keys concatenate in attribute order.
void cross_into(const AttrSpace& space, Triple& r, const Triple& lo_owner, int lo,
                const Triple& hi_owner, int hi) {
  const int p = space.pair_index(lo, hi);
  const bool lo_cat = !space.is_continuous(lo);
  const bool hi_cat = !space.is_continuous(hi);
  if (!lo_cat && !hi_cat) {
    TripleBuilder::cont_q(r)[space.pair_offset(p)] +=
        lo_owner.cont_sums()[space.cont_slot(lo)] * hi_owner.cont_sums()[space.cont_slot(hi)];
    return;
  }
  RelMap& dst = TripleBuilder::rel_q(r)[space.pair_offset(p)];
  if (lo_cat && hi_cat) {
    for (const auto& [kl, wl] : lo_owner.cat_sum(space.cat_slot(lo))) {
      for (const auto& [kh, wh] : hi_owner.cat_sum(space.cat_slot(hi))) {
        const double w = wl * wh;
        if (w == 0.0) continue;
        auto [it, ins] = dst.try_emplace((kl << 32) | kh, 0.0);
        it->second += w;
        if (it->second == 0.0) dst.erase(it);
      }
    }
  } else if (lo_cat) {
    rel_scale_into(dst, lo_owner.cat_sum(space.cat_slot(lo)),
                   hi_owner.cont_sums()[space.cont_slot(hi)]);
  } else {
    rel_scale_into(dst, hi_owner.cat_sum(space.cat_slot(hi)),
                   lo_owner.cont_sums()[space.cont_slot(lo)]);
  }
}

// Adds c * (src components owned by `attrs`) into r.
void scale_side_into(const AttrSpace& space, Triple& r, const Triple& src,
                     const std::vector<int>& attrs, double c) {
  for (int a : attrs) {
    if (space.is_continuous(a)) {
      TripleBuilder::cont_s(r)[space.cont_slot(a)] += c * src.cont_sums()[space.cont_slot(a)];
    } else {
      rel_scale_into(TripleBuilder::rel_s(r)[space.cat_slot(a)], src.cat_sum(space.cat_slot(a)),
                     c);
    }
  }
  for (std::size_t x = 0; x < attrs.size(); ++x) {
    for (std::size_t y = x; y < attrs.size(); ++y) {
      const int i = std::min(attrs[x], attrs[y]);
      const int j = std::max(attrs[x], attrs[y]);
      const int p = space.pair_index(i, j);
      if (space.pair_is_scalar(p)) {
        TripleBuilder::cont_q(r)[space.pair_offset(p)] +=
            c * src.cont_interactions()[space.pair_offset(p)];
      } else {
        rel_scale_into(TripleBuilder::rel_q(r)[space.pair_offset(p)],
                       src.rel_interaction(space.pair_offset(p)), c);
      }
    }
  }
}

}  // namespace

Triple operator*(const Triple& a, const Triple& b) {
  require_same_space(a, b, "triple_mul");
  const AttrSpace& space = a.space();
  const std::vector<int> sa = a.support();
  const std::vector<int> sb = b.support();
  for (int attr : sa) {
    if (b.in_support(attr)) {
      throw UsageError("triple_mul: attribute '" + space.name(attr) +
                       "' appears in both operands; supports must be disjoint");
    }
  }

  Triple r(a.space_ptr());
  TripleBuilder::set_count(r, a.count() * b.count());
  scale_side_into(space, r, a, sa, b.count());
  scale_side_into(space, r, b, sb, a.count());
  for (int i : sa) {
    for (int j : sb) {
      const int lo = std::min(i, j);
      const int hi = std::max(i, j);
      cross_into(space, r, lo == i ? a : b, lo, hi == j ? b : a, hi);
    }
  }
  for (int attr : sa) TripleBuilder::add_support(r, attr);
  for (int attr : sb) TripleBuilder::add_support(r, attr);
  return r;
}

// --------------------------------------------------------------------------
// Lifting and aggregation

namespace {

// Resolved once per aggregate call so the row loop touches only live slots.
// This is the bulk lifting path: a row lands in the accumulator directly,
// without materializing per-attribute triples or ring multiplications.
struct LiftPlan {
  struct Cont {
    const double* src;
    int slot;
  };
  struct Cat {
    const std::int32_t* src;
    int slot;
    int diag_off;
  };
  struct ContPair {
    int a, b;  // indices into cont, a <= b allowed to alias (diagonal)
    int off;
  };
  struct MixedPair {
    int off;
    int lo;  // index into cont or cat depending on lo_cat
    int hi;
    bool lo_cat;
    bool hi_cat;
  };
  std::vector<Cont> cont;
  std::vector<Cat> cat;
  std::vector<ContPair> cont_pairs;
  std::vector<MixedPair> mixed;  // strictly off-diagonal
  std::vector<int> attrs;
};

LiftPlan build_plan(const AttrSpace& space, std::span<const AttrColumn> cols) {
  std::vector<AttrColumn> sorted(cols.begin(), cols.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const AttrColumn& x, const AttrColumn& y) { return x.attr < y.attr; });
  LiftPlan plan;
  std::vector<int> pos(sorted.size());
  std::vector<bool> is_cat(sorted.size());
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    const AttrColumn& col = sorted[c];
    if (col.attr < 0 || col.attr >= space.size()) {
      throw UsageError("aggregate: attribute index out of range");
    }
    if (c > 0 && sorted[c - 1].attr == col.attr) {
      throw UsageError("aggregate: attribute bound twice: " + space.name(col.attr));
    }
    plan.attrs.push_back(col.attr);
    if (space.is_continuous(col.attr)) {
      if (col.cont == nullptr) {
        throw UsageError("aggregate: continuous attribute '" + space.name(col.attr) +
                         "' needs a value column");
      }
      pos[c] = static_cast<int>(plan.cont.size());
      is_cat[c] = false;
      plan.cont.push_back({col.cont, space.cont_slot(col.attr)});
    } else {
      if (col.codes == nullptr) {
        throw UsageError("aggregate: categorical attribute '" + space.name(col.attr) +
                         "' needs a code column");
      }
      pos[c] = static_cast<int>(plan.cat.size());
      is_cat[c] = true;
      plan.cat.push_back(
          {col.codes, space.cat_slot(col.attr), space.pair_offset(space.pair_index(col.attr, col.attr))});
    }
  }
  for (std::size_t x = 0; x < sorted.size(); ++x) {
    for (std::size_t y = x; y < sorted.size(); ++y) {
      const int i = sorted[x].attr;
      const int j = sorted[y].attr;
      const int p = space.pair_index(i, j);
      if (space.pair_is_scalar(p)) {
        plan.cont_pairs.push_back({pos[x], pos[y], space.pair_offset(p)});
      } else if (x != y) {
        plan.mixed.push_back(
            {space.pair_offset(p), pos[x], pos[y], bool(is_cat[x]), bool(is_cat[y])});
      }
      // categorical diagonals are handled with the per-attribute upsert
    }
  }
  return plan;
}

// Chunk-local accumulator; folded into a Triple once the chunk is done.
struct ChunkSlots {
  explicit ChunkSlots(const AttrSpace& space, const LiftPlan& plan)
      : cs(Eigen::VectorXd::Zero(space.cont_count())),
        cq(Eigen::VectorXd::Zero(space.scalar_pair_count())),
        rs(space.cat_count()),
        rq(space.rel_pair_count()),
        cv(plan.cont.size()),
        kv(plan.cat.size()) {}

  double n = 0.0;
  Eigen::VectorXd cs;
  Eigen::VectorXd cq;
  std::vector<RelMap> rs;
  std::vector<RelMap> rq;
  std::vector<double> cv;
  std::vector<std::int32_t> kv;

  inline void add_row(const LiftPlan& plan, std::int64_t row) {
    n += 1.0;
    for (std::size_t c = 0; c < plan.cont.size(); ++c) {
      const double v = plan.cont[c].src[row];
      cv[c] = v;
      cs[plan.cont[c].slot] += v;
    }
    for (const auto& p : plan.cont_pairs) {
      cq[p.off] += cv[p.a] * cv[p.b];
    }
    for (std::size_t c = 0; c < plan.cat.size(); ++c) {
      const std::int32_t code = plan.cat[c].src[row];
      kv[c] = code;
      const std::uint64_t key = pack_key(code);
      rs[plan.cat[c].slot][key] += 1.0;
      rq[plan.cat[c].diag_off][key] += 1.0;
    }
    for (const auto& mp : plan.mixed) {
      if (mp.lo_cat && mp.hi_cat) {
        rq[mp.off][pack_key(kv[mp.lo], kv[mp.hi])] += 1.0;
      } else if (mp.lo_cat) {
        rq[mp.off][pack_key(kv[mp.lo])] += cv[mp.hi];
      } else {
        rq[mp.off][pack_key(kv[mp.hi])] += cv[mp.lo];
      }
    }
  }

  Triple take(std::shared_ptr<const AttrSpace> space, const LiftPlan& plan) {
    Triple out(std::move(space));
    if (n > 0.0) {
      TripleBuilder::set_count(out, n);
      TripleBuilder::cont_s(out) = std::move(cs);
      TripleBuilder::cont_q(out) = std::move(cq);
      TripleBuilder::rel_s(out) = std::move(rs);
      TripleBuilder::rel_q(out) = std::move(rq);
      for (int a : plan.attrs) TripleBuilder::add_support(out, a);
    }
    return out;
  }
};

template <class EmitRows>
Triple aggregate_impl(std::shared_ptr<const AttrSpace> space, std::span<const AttrColumn> cols,
                      std::int64_t count, int threads, EmitRows emit) {
  if (count <= 0) return Triple(space);  // empty stream folds to zero
  const LiftPlan plan = build_plan(*space, cols);
  const std::int64_t n_chunks = (count + kReduceChunk - 1) / kReduceChunk;
  std::vector<Triple> partials(static_cast<std::size_t>(n_chunks), Triple(space));
  for_each_chunk(count, threads, [&](std::int64_t c, std::int64_t begin, std::int64_t end) {
    ChunkSlots slots(*space, plan);
    emit(begin, end, [&](std::int64_t row) { slots.add_row(plan, row); });
    partials[static_cast<std::size_t>(c)] = slots.take(space, plan);
  });
  Triple total = std::move(partials[0]);
  for (std::size_t c = 1; c < partials.size(); ++c) total += partials[c];
  return total;
}

}  // namespace

Triple lift_continuous(std::shared_ptr<const AttrSpace> space, int attr, double x) {
  if (attr < 0 || attr >= space->size() || !space->is_continuous(attr)) {
    throw UsageError("lift_continuous: not a continuous attribute index");
  }
  Triple t(space);
  TripleBuilder::set_count(t, 1.0);
  TripleBuilder::cont_s(t)[space->cont_slot(attr)] = x;
  TripleBuilder::cont_q(t)[space->pair_offset(space->pair_index(attr, attr))] = x * x;
  TripleBuilder::add_support(t, attr);
  return t;
}

Triple lift_categorical(std::shared_ptr<const AttrSpace> space, int attr, std::int32_t code) {
  if (attr < 0 || attr >= space->size() || space->is_continuous(attr)) {
    throw UsageError("lift_categorical: not a categorical attribute index");
  }
  if (code < 0) throw UsageError("lift_categorical: category codes are non-negative");
  Triple t(space);
  TripleBuilder::set_count(t, 1.0);
  const std::uint64_t key = pack_key(code);
  TripleBuilder::rel_s(t)[space->cat_slot(attr)].emplace(key, 1.0);
  TripleBuilder::rel_q(t)[space->pair_offset(space->pair_index(attr, attr))].emplace(key, 1.0);
  TripleBuilder::add_support(t, attr);
  return t;
}

Triple lift_row(std::shared_ptr<const AttrSpace> space, std::span<const int> attrs,
                std::span<const double> values) {
  if (attrs.size() != values.size()) {
    throw UsageError("lift_row: attrs and values must have equal length");
  }
  for (std::size_t k = 0; k < attrs.size(); ++k) {
    if (std::isnan(values[k])) {
      throw UsageError("lift_row: absent value for attribute '" + space->name(attrs[k]) +
                       "'; impute before lifting");
    }
  }
  std::vector<double> cont_vals(attrs.size());
  std::vector<std::int32_t> cat_vals(attrs.size());
  std::vector<AttrColumn> cols(attrs.size());
  for (std::size_t k = 0; k < attrs.size(); ++k) {
    cols[k].attr = attrs[k];
    if (space->is_continuous(attrs[k])) {
      cont_vals[k] = values[k];
      cols[k].cont = &cont_vals[k];
    } else {
      cat_vals[k] = static_cast<std::int32_t>(values[k]);
      if (cat_vals[k] < 0 || static_cast<double>(cat_vals[k]) != values[k]) {
        throw UsageError("lift_row: categorical attribute '" + space->name(attrs[k]) +
                         "' needs a non-negative integral code");
      }
      cols[k].codes = &cat_vals[k];
    }
  }
  return aggregate(space, cols, std::int64_t{1}, 1);
}

Triple lift_row(std::shared_ptr<const AttrSpace> space, std::span<const double> values) {
  if (static_cast<int>(values.size()) != space->size()) {
    throw UsageError("lift_row: need one value per attribute");
  }
  std::vector<int> attrs(space->size());
  for (int a = 0; a < space->size(); ++a) attrs[a] = a;
  return lift_row(space, attrs, values);
}

Triple aggregate(std::shared_ptr<const AttrSpace> space, std::span<const AttrColumn> cols,
                 std::int64_t rows, int threads) {
  return aggregate_impl(space, cols, rows, threads,
                        [](std::int64_t begin, std::int64_t end, auto&& per_row) {
                          for (std::int64_t r = begin; r < end; ++r) per_row(r);
                        });
}

Triple aggregate(std::shared_ptr<const AttrSpace> space, std::span<const AttrColumn> cols,
                 std::span<const std::int64_t> row_ids, int threads) {
  return aggregate_impl(space, cols, static_cast<std::int64_t>(row_ids.size()), threads,
                        [row_ids](std::int64_t begin, std::int64_t end, auto&& per_row) {
                          for (std::int64_t k = begin; k < end; ++k) per_row(row_ids[k]);
                        });
}

Triple aggregate_where(std::shared_ptr<const AttrSpace> space, std::span<const AttrColumn> cols,
                       const std::uint8_t* mask, bool keep, std::int64_t rows, int threads) {
  return aggregate_impl(space, cols, rows, threads,
                        [mask, keep](std::int64_t begin, std::int64_t end, auto&& per_row) {
                          for (std::int64_t r = begin; r < end; ++r) {
                            if ((mask[r] != 0) == keep) per_row(r);
                          }
                        });
}

// --------------------------------------------------------------------------
// Debug serialization

namespace {

constexpr std::uint32_t kTripleMagic = 0x52544c31;  // "RTL1"

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

struct ByteReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  std::uint64_t u64() {
    if (pos + 8 > bytes.size()) throw DataError("triple blob truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

void put_map(std::vector<std::uint8_t>& out, const RelMap& m) {
  std::vector<std::pair<std::uint64_t, double>> entries(m.begin(), m.end());
  std::sort(entries.begin(), entries.end());
  put_u64(out, entries.size());
  for (const auto& [k, w] : entries) {
    put_u64(out, k);
    put_f64(out, w);
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_triple(const Triple& t) {
  std::vector<std::uint8_t> out;
  put_u64(out, (std::uint64_t{1} << 32) | kTripleMagic);  // version 1
  put_u64(out, static_cast<std::uint64_t>(t.space().size()));
  std::uint64_t support_bits = 0;
  for (int a = 0; a < t.space().size() && a < 64; ++a) {
    if (t.in_support(a)) support_bits |= std::uint64_t{1} << a;
  }
  put_u64(out, support_bits);
  put_f64(out, t.count());
  put_u64(out, static_cast<std::uint64_t>(t.cont_sums().size()));
  for (int i = 0; i < t.cont_sums().size(); ++i) put_f64(out, t.cont_sums()[i]);
  put_u64(out, static_cast<std::uint64_t>(t.cont_interactions().size()));
  for (int i = 0; i < t.cont_interactions().size(); ++i) {
    put_f64(out, t.cont_interactions()[i]);
  }
  put_u64(out, static_cast<std::uint64_t>(t.space().cat_count()));
  for (int s = 0; s < t.space().cat_count(); ++s) put_map(out, t.cat_sum(s));
  put_u64(out, static_cast<std::uint64_t>(t.space().rel_pair_count()));
  for (int p = 0; p < t.space().rel_pair_count(); ++p) put_map(out, t.rel_interaction(p));
  return out;
}

Triple deserialize_triple(std::shared_ptr<const AttrSpace> space,
                          std::span<const std::uint8_t> bytes) {
  ByteReader in{bytes};
  const std::uint64_t header = in.u64();
  if ((header & 0xffffffffULL) != kTripleMagic) throw DataError("not a triple blob");
  if ((header >> 32) != 1) throw DataError("unsupported triple blob version");
  if (in.u64() != static_cast<std::uint64_t>(space->size())) {
    throw DataError("triple blob was written against a different attribute space");
  }
  const std::uint64_t support_bits = in.u64();
  Triple t(space);
  TripleBuilder::set_count(t, in.f64());
  const auto read_vec = [&](Eigen::VectorXd& v) {
    const std::uint64_t n = in.u64();
    if (n != static_cast<std::uint64_t>(v.size())) throw DataError("triple blob shape mismatch");
    for (std::uint64_t i = 0; i < n; ++i) v[static_cast<int>(i)] = in.f64();
  };
  read_vec(TripleBuilder::cont_s(t));
  read_vec(TripleBuilder::cont_q(t));
  const auto read_maps = [&](std::vector<RelMap>& maps) {
    const std::uint64_t n = in.u64();
    if (n != maps.size()) throw DataError("triple blob shape mismatch");
    for (auto& m : maps) {
      const std::uint64_t entries = in.u64();
      for (std::uint64_t i = 0; i < entries; ++i) {
        const std::uint64_t key = in.u64();
        m.emplace(key, in.f64());
      }
    }
  };
  read_maps(TripleBuilder::rel_s(t));
  read_maps(TripleBuilder::rel_q(t));
  for (int a = 0; a < space->size() && a < 64; ++a) {
    if (support_bits & (std::uint64_t{1} << a)) TripleBuilder::add_support(t, a);
  }
  return t;
}

// --------------------------------------------------------------------------
// Comparison

namespace {

double entry_gap(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

double map_gap(const RelMap& a, const RelMap& b) {
  double worst = 0.0;
  for (const auto& [k, w] : a) {
    auto it = b.find(k);
    worst = std::max(worst, entry_gap(w, it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, w] : b) {
    if (a.find(k) == a.end()) worst = std::max(worst, entry_gap(0.0, w));
  }
  return worst;
}

}  // namespace

double triple_gap(const Triple& a, const Triple& b) {
  require_same_space(a, b, "triple_gap");
  double worst = entry_gap(a.count(), b.count());
  for (int i = 0; i < a.cont_sums().size(); ++i) {
    worst = std::max(worst, entry_gap(a.cont_sums()[i], b.cont_sums()[i]));
  }
  for (int i = 0; i < a.cont_interactions().size(); ++i) {
    worst = std::max(worst, entry_gap(a.cont_interactions()[i], b.cont_interactions()[i]));
  }
  for (int s = 0; s < a.space().cat_count(); ++s) {
    worst = std::max(worst, map_gap(a.cat_sum(s), b.cat_sum(s)));
  }
  for (int p = 0; p < a.space().rel_pair_count(); ++p) {
    worst = std::max(worst, map_gap(a.rel_interaction(p), b.rel_interaction(p)));
  }
  return worst;
}

bool triple_close(const Triple& a, const Triple& b, double tol) {
  return triple_gap(a, b) <= tol;
}

}  // namespace ringml
