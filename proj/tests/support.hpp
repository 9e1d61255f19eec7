#pragma once

// Helpers shared by the test binaries: seeded instance generators and a
// set-based reference evaluator that does not reuse the library's bitmask code.

#include <algorithm>
#include <bit>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "apep/model.hpp"
#include "apep/verify.hpp"

#ifndef APEP_FIXTURE_DIR
#define APEP_FIXTURE_DIR "fixtures"
#endif

namespace apep::testing {

using Rng = std::mt19937_64;

inline std::string fixture(const std::string& name) { return std::string(APEP_FIXTURE_DIR) + "/" + name; }

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline AuthorizationRelation random_base(Rng& rng, std::size_t n, std::size_t k, double density) {
  std::bernoulli_distribution coin(density);
  std::vector<ResourceSet> rows(n);
  for (auto& row : rows)
    for (ResourceId r = 0; r < k; ++r)
      if (coin(rng)) row.insert(r);
  for (ResourceId r = 0; r < k; ++r) {
    bool covered = std::any_of(rows.begin(), rows.end(), [&](ResourceSet s) { return s.contains(r); });
    if (!covered) rows[pick(rng, 0, n - 1)].insert(r);
  }
  return AuthorizationRelation::from_rows(rows, k);
}

/// A random relation inside `base` (not necessarily complete).
inline AuthorizationRelation random_subrelation(Rng& rng, const AuthorizationRelation& base, double keep = 0.6) {
  std::bernoulli_distribution coin(keep);
  AuthorizationRelation a(base.user_count(), base.resource_count());
  for (auto [u, r] : base.pairs())
    if (coin(rng)) a.insert(u, r);
  return a;
}

inline ResourceSet random_set(Rng& rng, std::size_t k, std::size_t min_size = 1) {
  while (true) {
    ResourceSet s(std::uniform_int_distribution<std::uint64_t>(0, ResourceSet::full(k).bits())(rng));
    if (s.size() >= min_size) return s;
  }
}

inline std::pair<ResourceId, ResourceId> random_pair(Rng& rng, std::size_t k) {
  const auto a = static_cast<ResourceId>(pick(rng, 0, k - 1));
  auto b = static_cast<ResourceId>(pick(rng, 0, k - 2));
  if (b >= a) ++b;
  return {a, b};
}

inline Comparison random_cmp(Rng& rng) {
  constexpr Comparison all[] = {Comparison::lt, Comparison::le, Comparison::eq, Comparison::ge, Comparison::gt};
  return all[pick(rng, 0, 4)];
}

/// One random constraint of any modeled species (k >= 2).
inline Constraint random_constraint(Rng& rng, std::size_t k, std::size_t max_t = 4) {
  const auto t = static_cast<std::uint32_t>(pick(rng, 1, max_t));
  auto cmp = random_cmp(rng);
  if (cmp == Comparison::lt && t == 1) cmp = Comparison::le;
  switch (pick(rng, 0, 5)) {
    case 0:
    case 1: {
      auto [a, b] = random_pair(rng, k);
      constexpr PairOp ops[] = {PairOp::iff, PairOp::implies, PairOp::implied_by, PairOp::exclusive};
      return PairConstraint{a, b, ops[pick(rng, 0, 3)], pick(rng, 0, 1) ? Quantifier::forall : Quantifier::exists};
    }
    case 2: return GlobalCardinality{cmp, t};
    case 3: return LocalCardinality{random_set(rng, k), cmp, t};
    case 4: return Smer{random_set(rng, k, 2)};
    default: {
      const auto all = random_set(rng, k, 2);
      while (true) {
        ResourceSet l, r;
        all.for_each([&](ResourceId x) { (pick(rng, 0, 1) ? l : r).insert(x); });
        if (!l.empty() && !r.empty()) return TeamSod{l, r};
      }
    }
  }
}

inline std::vector<Constraint> random_pairs_of(Rng& rng, std::size_t k, std::size_t count, PairOp op, Quantifier q) {
  std::vector<Constraint> out;
  std::set<std::pair<ResourceId, ResourceId>> used;
  for (std::size_t attempt = 0; out.size() < count && attempt < 100; ++attempt) {
    auto [a, b] = random_pair(rng, k);
    if (!used.insert({std::min(a, b), std::max(a, b)}).second) continue;
    out.push_back(PairConstraint{a, b, op, q});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reference semantics on std::set columns.

using Column = std::set<UserId>;

inline Column column_of(const AuthorizationRelation& a, ResourceId r) {
  Column c;
  for (UserId u = 0; u < a.user_count(); ++u)
    if (a.contains(u, r)) c.insert(u);
  return c;
}

inline Column union_of(const AuthorizationRelation& a, ResourceSet s) {
  Column c;
  s.for_each([&](ResourceId r) {
    auto col = column_of(a, r);
    c.insert(col.begin(), col.end());
  });
  return c;
}

inline bool disjoint(const Column& x, const Column& y) {
  return std::none_of(x.begin(), x.end(), [&](UserId u) { return y.count(u) > 0; });
}

inline bool holds(std::size_t value, Comparison cmp, std::uint32_t t) {
  switch (cmp) {
    case Comparison::lt: return value < t;
    case Comparison::le: return value <= t;
    case Comparison::eq: return value == t;
    case Comparison::ge: return value >= t;
    case Comparison::gt: return value > t;
  }
  return false;
}

/// Set conditions of each constraint, written independently of the library.
inline bool reference_eval(const AuthorizationRelation& a, const Constraint& c) {
  if (auto p = std::get_if<PairConstraint>(&c)) {
    const auto x = column_of(a, p->first);
    const auto y = column_of(a, p->second);
    const bool forall = p->quant == Quantifier::forall;
    switch (p->op) {
      case PairOp::iff: return forall ? x == y : !disjoint(x, y);
      case PairOp::exclusive: return forall ? disjoint(x, y) : x != y;
      case PairOp::implies:
        return forall ? std::includes(y.begin(), y.end(), x.begin(), x.end()) : !disjoint(x, y);
      case PairOp::implied_by:
        return forall ? std::includes(x.begin(), x.end(), y.begin(), y.end()) : !disjoint(x, y);
    }
  }
  if (auto g = std::get_if<GlobalCardinality>(&c)) {
    for (ResourceId r = 0; r < a.resource_count(); ++r)
      if (!holds(column_of(a, r).size(), g->cmp, g->t)) return false;
    return true;
  }
  if (auto l = std::get_if<LocalCardinality>(&c)) return holds(union_of(a, l->scope).size(), l->cmp, l->t);
  if (auto s = std::get_if<Smer>(&c)) {
    std::optional<Column> common;
    s->scope.for_each([&](ResourceId r) {
      auto col = column_of(a, r);
      if (!common) {
        common = col;
      } else {
        Column keep;
        for (auto u : *common)
          if (col.count(u)) keep.insert(u);
        common = keep;
      }
    });
    return common->empty();
  }
  const auto& t = std::get<TeamSod>(c);
  return disjoint(union_of(a, t.left), union_of(a, t.right));
}

inline bool reference_valid(const Instance& inst, const AuthorizationRelation& a) {
  if (!a.subset_of(inst.base())) return false;
  for (ResourceId r = 0; r < inst.resource_count(); ++r)
    if (column_of(a, r).empty()) return false;
  return std::all_of(inst.constraints().begin(), inst.constraints().end(),
                     [&](const Constraint& c) { return reference_eval(a, c); });
}

/// Exhaustive over subsets of the base pairs. Returns the maximum |A| of a
/// valid relation, or nullopt. Only for |A_Bse| <= 22.
inline std::optional<std::size_t> reference_maximum(const Instance& inst) {
  const auto pairs = inst.base().pairs();
  if (pairs.size() > 22) throw std::runtime_error("reference search too large");
  std::optional<std::size_t> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs.size()); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (best && size <= *best) continue;
    AuthorizationRelation a(inst.user_count(), inst.resource_count());
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if ((mask >> i) & 1) a.insert(pairs[i].first, pairs[i].second);
    if (reference_valid(inst, a)) best = size;
  }
  return best;
}

}  // namespace apep::testing
