#include "apep/oracle.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "apep/error.hpp"
#include "apep/verify.hpp"
#include "overloaded.hpp"

namespace apep {

using detail::overloaded;

namespace {

constexpr std::uint64_t kSaturated = std::uint64_t{1} << 63;

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  return p >= kSaturated ? kSaturated : static_cast<std::uint64_t>(p);
}

// C(choices + s - 1, s): multisets of size s over `choices` items.
std::uint64_t multisets(std::uint64_t choices, std::uint64_t s) {
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= s; ++i) {
    c = c * (choices - 1 + i) / i;
    if (c >= kSaturated) return kSaturated;
  }
  return static_cast<std::uint64_t>(c);
}

// A constraint compiled against column masks (bit i = i-th active user).
struct Check {
  enum class Kind { pair, global, local, smer, team } kind;
  PairConstraint pair;
  ResourceId column = 0;  // global: the column to test
  Comparison cmp = Comparison::le;
  std::uint32_t t = 0;
  ResourceSet scope;
  ResourceSet right;
};

// The later column of a universal pair against the earlier one.
struct Link {
  enum class Kind { equal, subset, superset, disjoint } kind;
  ResourceId other;
};

std::uint64_t union_of(const std::vector<std::uint64_t>& cols, ResourceSet s) {
  std::uint64_t m = 0;
  s.for_each([&](ResourceId r) { m |= cols[r]; });
  return m;
}

bool run_check(const Check& c, const std::vector<std::uint64_t>& cols) {
  switch (c.kind) {
    case Check::Kind::pair: {
      const auto a = cols[c.pair.first];
      const auto b = cols[c.pair.second];
      const bool forall = c.pair.quant == Quantifier::forall;
      switch (c.pair.op) {
        case PairOp::iff: return forall ? a == b : (a & b) != 0;
        case PairOp::exclusive: return forall ? (a & b) == 0 : a != b;
        case PairOp::implies: return forall ? (a & ~b) == 0 : (a & b) != 0;
        case PairOp::implied_by: return forall ? (b & ~a) == 0 : (a & b) != 0;
      }
      return false;
    }
    case Check::Kind::global:
      return compare(static_cast<std::size_t>(std::popcount(cols[c.column])), c.cmp, c.t);
    case Check::Kind::local:
      return compare(static_cast<std::size_t>(std::popcount(union_of(cols, c.scope))), c.cmp, c.t);
    case Check::Kind::smer: {
      std::uint64_t m = ~std::uint64_t{0};
      c.scope.for_each([&](ResourceId r) { m &= cols[r]; });
      return m == 0;
    }
    case Check::Kind::team:
      return (union_of(cols, c.scope) & union_of(cols, c.right)) == 0;
  }
  return false;
}

// Necessary condition on a partial assignment where columns 0..r are fixed:
// cardinality bounds from the fixed columns and from the base of the rest,
// and disjointness of the fixed parts of two teams.
bool run_partial(const Check& c, const std::vector<std::uint64_t>& cols, const std::vector<std::uint64_t>& base,
                 std::size_t r) {
  const ResourceSet fixed = ResourceSet::full(r + 1);
  if (c.kind == Check::Kind::pair) {
    // Only shared-user pairs reach here, compiled at the earlier resource.
    const auto early = std::min(c.pair.first, c.pair.second);
    const auto late = std::max(c.pair.first, c.pair.second);
    return (cols[early] & base[late]) != 0;
  }
  if (c.kind == Check::Kind::team)
    return (union_of(cols, c.scope & fixed) & union_of(cols, c.right & fixed)) == 0;
  const auto low = union_of(cols, c.scope & fixed);
  const auto lower = static_cast<std::size_t>(std::popcount(low));
  const auto upper = static_cast<std::size_t>(std::popcount(low | union_of(base, c.scope - fixed)));
  switch (c.cmp) {
    case Comparison::lt: return lower < c.t;
    case Comparison::le: return lower <= c.t;
    case Comparison::eq: return lower <= c.t && upper >= c.t;
    case Comparison::ge: return upper >= c.t;
    case Comparison::gt: return upper > c.t;
  }
  return true;
}

ResourceId last_resource(ResourceSet s) { return static_cast<ResourceId>(63 - std::countl_zero(s.bits())); }

class Search {
public:
  Search(const Instance& inst, const OracleOptions& options, OracleStats* stats)
      : inst_(inst), options_(options), stats_(stats), k_(inst.resource_count()) {
    const auto space = oracle_search_space(inst, options.break_user_symmetry);
    if (stats_) *stats_ = OracleStats{space, 0, 0};
    if (space > options.budget)
      throw CapacityError("oracle too large: search space " + std::to_string(space) + " exceeds budget " +
                          std::to_string(options.budget));

    for (UserId u = 0; u < inst.user_count(); ++u)
      if (!inst.base().row(u).empty()) active_.push_back(u);
    if (active_.size() > 64)
      throw CapacityError("oracle supports at most 64 users with base authorizations, got " +
                          std::to_string(active_.size()));
    if (options.break_user_symmetry) {
      std::stable_sort(active_.begin(), active_.end(), [&](UserId a, UserId b) {
        return inst.base().row(a).bits() < inst.base().row(b).bits();
      });
      for (std::size_t i = 0; i + 1 < active_.size(); ++i)
        if (inst.base().row(active_[i]) == inst.base().row(active_[i + 1])) twins_ |= std::uint64_t{1} << i;
    }

    base_cols_.assign(k_, 0);
    for (std::size_t i = 0; i < active_.size(); ++i)
      inst.base().row(active_[i]).for_each([&](ResourceId r) { base_cols_[r] |= std::uint64_t{1} << i; });

    remaining_.assign(k_ + 1, 0);
    for (std::size_t r = k_; r-- > 0;)
      remaining_[r] = remaining_[r + 1] + static_cast<std::size_t>(std::popcount(base_cols_[r]));

    checks_.resize(k_);
    partial_.resize(k_);
    links_.resize(k_);
    for (const auto& c : inst.constraints()) compile(c);
    cols_.assign(k_, 0);

    // Cardinality bounds on one scope combine into an interval; an empty one
    // is unsatisfiable before any search. A scope's union never exceeds that of a wider scope.
    for (const auto& [scope, range] : ranges_) {
      const auto reach = static_cast<std::size_t>(std::popcount(union_of(base_cols_, scope)));
      if (range.first > std::min(range.second, reach)) infeasible_ = true;
      for (const auto& [wider, outer] : ranges_)
        if (wider.contains(scope) && range.first > outer.second) infeasible_ = true;
    }
  }

  std::optional<AuthorizationRelation> decide() {
    maximize_ = false;
    if (infeasible_) return std::nullopt;
    if (k_ == 0) return confirm();
    if (descend(0, twins_, 0)) return best_;
    return std::nullopt;
  }

  std::optional<MaximumRelation> maximize() {
    maximize_ = true;
    if (infeasible_) return std::nullopt;
    if (k_ == 0) {
      auto a = confirm();
      if (!a) return std::nullopt;
      return MaximumRelation{*a, 0};
    }
    descend(0, twins_, 0);
    if (!best_) return std::nullopt;
    return MaximumRelation{*best_, best_size_};
  }

private:
  void compile(const Constraint& c) {
    std::visit(overloaded{
                   [&](const PairConstraint& p) {
                     Check ch{Check::Kind::pair, p};
                     checks_[std::max(p.first, p.second)].push_back(ch);
                     if (p.quant == Quantifier::forall && p.first != p.second) narrow(p);
                     if (p.quant == Quantifier::exists && p.op != PairOp::exclusive && p.first != p.second)
                       partial_[std::min(p.first, p.second)].push_back(ch);
                   },
                   [&](const GlobalCardinality& g) {
                     for (ResourceId r = 0; r < k_; ++r) {
                       Check ch{Check::Kind::global};
                       ch.column = r;
                       ch.cmp = g.cmp;
                       ch.t = g.t;
                       checks_[r].push_back(ch);
                     }
                   },
                   [&](const LocalCardinality& l) {
                     Check ch{Check::Kind::local};
                     ch.scope = l.scope;
                     ch.cmp = l.cmp;
                     ch.t = l.t;
                     const auto last = last_resource(l.scope);
                     checks_[last].push_back(ch);
                     for (ResourceId r = l.scope.front(); r < last; ++r) partial_[r].push_back(ch);
                     auto it = ranges_.try_emplace(l.scope, 1, active_.size()).first;
                     auto& [lo, hi] = it->second;
                     const std::size_t t = l.t;
                     switch (l.cmp) {
                       case Comparison::lt: hi = t == 0 ? 0 : std::min(hi, t - 1); break;
                       case Comparison::le: hi = std::min(hi, t); break;
                       case Comparison::eq: lo = std::max(lo, t); hi = std::min(hi, t); break;
                       case Comparison::ge: lo = std::max(lo, t); break;
                       case Comparison::gt: lo = std::max(lo, t + 1); break;
                     }
                   },
                   [&](const Smer& s) {
                     Check ch{Check::Kind::smer};
                     ch.scope = s.scope;
                     checks_[last_resource(s.scope)].push_back(ch);
                   },
                   [&](const TeamSod& t) {
                     Check ch{Check::Kind::team};
                     ch.scope = t.left;
                     ch.right = t.right;
                     const auto last = last_resource(t.left | t.right);
                     checks_[last].push_back(ch);
                     for (ResourceId r = (t.left | t.right).front(); r < last; ++r) partial_[r].push_back(ch);
                   },
               },
               c);
  }

  // A universal pair fixes how the later column relates to the earlier one,
  // so the later column's candidates are drawn from a narrowed mask.
  void narrow(const PairConstraint& p) {
    auto [early, late] = std::minmax(p.first, p.second);
    const bool forward = p.first == early;
    Link::Kind kind = Link::Kind::disjoint;
    switch (p.op) {
      case PairOp::iff: kind = Link::Kind::equal; break;
      case PairOp::exclusive: kind = Link::Kind::disjoint; break;
      case PairOp::implies: kind = forward ? Link::Kind::superset : Link::Kind::subset; break;
      case PairOp::implied_by: kind = forward ? Link::Kind::subset : Link::Kind::superset; break;
    }
    links_[late].push_back({kind, early});
  }

  // Returns true when the search should stop (decide found a witness).
  bool descend(std::size_t r, std::uint64_t twins_equal, std::size_t size) {
    if (stats_) ++stats_->nodes;
    if (r == k_) return leaf(size);
    if (maximize_ && best_ && size + remaining_[r] <= best_size_) return false;

    auto mask = base_cols_[r];
    std::uint64_t forced = 0;
    for (const auto& l : links_[r]) {
      const auto other = cols_[l.other];
      switch (l.kind) {
        case Link::Kind::equal: mask &= other; forced |= other; break;
        case Link::Kind::subset: mask &= other; break;
        case Link::Kind::superset: forced |= other; break;
        case Link::Kind::disjoint: mask &= ~other; break;
      }
    }
    if ((forced & ~mask) != 0) return false;
    mask &= ~forced;
    // forced plus sub-masks of `mask` in increasing (decide) or decreasing
    // (maximize) numeric order; the empty column breaks completeness.
    std::uint64_t sub = maximize_ ? mask : 0;
    while (true) {
      if ((forced | sub) != 0 && try_column(r, forced | sub, twins_equal, size)) return true;
      if (maximize_ && best_ && size + remaining_[r] <= best_size_) return false;
      if (maximize_ ? sub == 0 : sub == mask) break;
      sub = maximize_ ? (sub - 1) & mask : (sub - mask) & mask;
    }
    return false;
  }

  bool try_column(std::size_t r, std::uint64_t col, std::uint64_t twins_equal, std::size_t size) {
    if (options_.node_limit != 0 && ++nodes_ > options_.node_limit)
      throw CapacityError("oracle gave up after " + std::to_string(options_.node_limit) + " search nodes");
    if (twins_equal != 0) {
      // Rows of interchangeable users i < i+1 must be non-increasing in
      // lexicographic order over resources 0..k-1.
      const auto next = col >> 1;
      if ((twins_equal & ~col & next) != 0) return false;
      twins_equal &= ~(col & ~next);
    }
    cols_[r] = col;
    for (const auto& ch : checks_[r])
      if (!run_check(ch, cols_)) return false;
    for (const auto& ch : partial_[r])
      if (!run_partial(ch, cols_, base_cols_, r)) return false;
    return descend(r + 1, twins_equal, size + static_cast<std::size_t>(std::popcount(col)));
  }

  AuthorizationRelation relation() const {
    AuthorizationRelation a(inst_.user_count(), k_);
    for (ResourceId r = 0; r < k_; ++r)
      for (auto b = cols_[r]; b != 0; b &= b - 1) a.insert(active_[std::countr_zero(b)], r);
    return a;
  }

  std::optional<AuthorizationRelation> confirm() {
    auto a = relation();
    if (!check_valid(inst_, a).valid) return std::nullopt;
    return a;
  }

  bool leaf(std::size_t size) {
    if (stats_) ++stats_->leaves;
    if (maximize_ && best_ && size <= best_size_) return false;
    auto a = relation();
    if (!check_valid(inst_, a).valid) throw std::logic_error("oracle mask evaluation disagrees with check_valid");
    best_ = std::move(a);
    best_size_ = size;
    return !maximize_;
  }

  const Instance& inst_;
  OracleOptions options_;
  OracleStats* stats_;
  std::size_t k_;
  bool maximize_ = false;

  std::vector<UserId> active_;
  std::uint64_t twins_ = 0;
  std::uint64_t nodes_ = 0;
  std::vector<std::uint64_t> base_cols_;
  std::vector<std::size_t> remaining_;
  std::vector<std::vector<Check>> checks_;
  std::vector<std::vector<Check>> partial_;
  std::vector<std::vector<Link>> links_;
  std::map<ResourceSet, std::pair<std::size_t, std::size_t>> ranges_;
  bool infeasible_ = false;
  std::vector<std::uint64_t> cols_;

  std::optional<AuthorizationRelation> best_;
  std::size_t best_size_ = 0;
};

}  // namespace

std::uint64_t oracle_search_space(const Instance& inst, bool break_user_symmetry) {
  std::uint64_t plain = 1;
  for (ResourceId r = 0; r < inst.resource_count(); ++r) {
    const auto users = inst.base().column(r).size();
    plain = users >= 63 ? kSaturated : sat_mul(plain, std::uint64_t{1} << users);
  }
  if (!break_user_symmetry) return plain;

  std::map<std::uint64_t, std::uint64_t> families;
  for (auto row : inst.base().rows())
    if (!row.empty()) ++families[row.bits()];
  std::uint64_t reduced = 1;
  for (auto [row, count] : families) {
    const auto width = static_cast<std::size_t>(std::popcount(row));
    const std::uint64_t choices = width >= 63 ? kSaturated : std::uint64_t{1} << width;
    reduced = sat_mul(reduced, multisets(choices, count));
  }
  return std::min(plain, reduced);
}

namespace {

// Resources tied to many constraints go first so that contradictions
// surface near the root; ties favour narrow columns.
std::vector<ResourceId> search_order(const Instance& inst) {
  const auto k = inst.resource_count();
  std::vector<std::size_t> degree(k, 0);
  auto touch = [&](ResourceSet s) { s.for_each([&](ResourceId r) { ++degree[r]; }); };
  for (const auto& c : inst.constraints())
    std::visit(overloaded{
                   [&](const PairConstraint& p) { touch(ResourceSet{p.first, p.second}); },
                   [&](const GlobalCardinality&) {},
                   [&](const LocalCardinality& l) { touch(l.scope); },
                   [&](const Smer& m) { touch(m.scope); },
                   [&](const TeamSod& t) { touch(t.left | t.right); },
               },
               c);
  std::vector<ResourceId> order(k);
  std::iota(order.begin(), order.end(), ResourceId{0});
  std::stable_sort(order.begin(), order.end(), [&](ResourceId a, ResourceId b) {
    if (degree[a] != degree[b]) return degree[a] > degree[b];
    return inst.base().column(a).size() < inst.base().column(b).size();
  });
  return order;
}

ResourceSet relabel(ResourceSet s, const std::vector<ResourceId>& position) {
  ResourceSet out;
  s.for_each([&](ResourceId r) { out.insert(position[r]); });
  return out;
}

// The instance with resource order[i] moved to position i.
Instance reorder(const Instance& inst, const std::vector<ResourceId>& order) {
  std::vector<ResourceId> position(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<ResourceId>(i);
  AuthorizationRelation base(inst.user_count(), order.size());
  for (UserId u = 0; u < inst.user_count(); ++u)
    inst.base().row(u).for_each([&](ResourceId r) { base.insert(u, position[r]); });
  std::vector<Constraint> constraints;
  for (const auto& c : inst.constraints())
    constraints.push_back(std::visit(
        overloaded{
            [&](PairConstraint p) -> Constraint {
              p.first = position[p.first];
              p.second = position[p.second];
              return p;
            },
            [&](const GlobalCardinality& g) -> Constraint { return g; },
            [&](LocalCardinality l) -> Constraint {
              l.scope = relabel(l.scope, position);
              return l;
            },
            [&](Smer m) -> Constraint {
              m.scope = relabel(m.scope, position);
              return m;
            },
            [&](TeamSod t) -> Constraint {
              t.left = relabel(t.left, position);
              t.right = relabel(t.right, position);
              return t;
            },
        },
        c));
  return Instance::anonymous(std::move(base), std::move(constraints));
}

AuthorizationRelation restore(const AuthorizationRelation& a, const std::vector<ResourceId>& order) {
  AuthorizationRelation out(a.user_count(), order.size());
  for (UserId u = 0; u < a.user_count(); ++u) a.row(u).for_each([&](ResourceId r) { out.insert(u, order[r]); });
  return out;
}

}  // namespace

std::optional<AuthorizationRelation> brute_decide(const Instance& inst, const OracleOptions& options,
                                                  OracleStats* stats) {
  const auto order = search_order(inst);
  auto a = Search(reorder(inst, order), options, stats).decide();
  if (!a) return std::nullopt;
  return restore(*a, order);
}

std::optional<MaximumRelation> brute_maximize(const Instance& inst, const OracleOptions& options,
                                              OracleStats* stats) {
  const auto order = search_order(inst);
  auto m = Search(reorder(inst, order), options, stats).maximize();
  if (!m) return std::nullopt;
  m->relation = restore(m->relation, order);
  return m;
}

}  // namespace apep
