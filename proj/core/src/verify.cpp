#include "apep/verify.hpp"

#include <algorithm>

#include "apep/error.hpp"
#include "overloaded.hpp"

namespace apep {

using detail::overloaded;

Verdict check_valid(const Instance& inst, const AuthorizationRelation& a) {
  if (a.user_count() != inst.user_count() || a.resource_count() != inst.resource_count())
    throw InvalidInput("relation references users or resources outside the instance");

  Verdict v;
  v.authorized = a.subset_of(inst.base());

  ResourceSet covered;
  for (auto row : a.rows()) covered |= row;
  v.complete = covered == ResourceSet::full(inst.resource_count());

  if (v.complete) {
    const auto& cs = inst.constraints();
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (!eval_constraint(a, cs[i])) v.violated.push_back(i);
    v.eligible = v.violated.empty();
  }
  v.valid = v.authorized && v.complete && v.eligible;
  return v;
}

std::vector<UserId> compute_core(const Instance& inst, const AuthorizationRelation& a) {
  if (!check_valid(inst, a).valid) throw InvalidInput("core is only defined for valid relations");
  std::vector<UserId> core;
  for (UserId u = 0; u < a.user_count(); ++u) {
    // Removing a user with no pairs leaves A unchanged, hence valid.
    if (a.row(u).empty()) continue;
    if (!check_valid(inst, a.without_user(u)).valid) core.push_back(u);
  }
  return core;
}

CoreBound bound_for(const Constraint& c, std::size_t k) {
  const std::uint64_t kk = k;
  const auto n = normalize(c);
  return std::visit(
      overloaded{
          [&](const PairConstraint& p) -> CoreBound {
            if (p.op == PairOp::exclusive) return {0, kk, Provenance::stated};
            // iff (either quantifier) and universal implication.
            return {0, kk == 0 ? 0 : kk - 1, Provenance::stated};
          },
          [&](const GlobalCardinality& g) -> CoreBound {
            if (g.cmp == Comparison::le) return {0, kk, Provenance::stated};
            // Every user of A(R) can be pinned by an (=, t) or (>=, t) bound:
            // at most t per resource plus the sole holders.
            return {0, kk * (std::uint64_t{g.t} + 1), Provenance::derived};
          },
          [&](const LocalCardinality& l) -> CoreBound {
            if (l.cmp == Comparison::le) return {0, kk, Provenance::stated};
            return {0, 2 * std::max<std::uint64_t>(kk, l.t), Provenance::stated};
          },
          [&](const Smer&) -> CoreBound { return {0, kk, Provenance::stated}; },
          [&](const TeamSod&) -> CoreBound { return {0, kk, Provenance::stated}; },
      },
      n);
}

std::vector<CoreBound> core_bounds(const Instance& inst) {
  std::vector<CoreBound> out;
  out.reserve(inst.constraints().size());
  for (std::size_t i = 0; i < inst.constraints().size(); ++i) {
    auto b = bound_for(inst.constraints()[i], inst.resource_count());
    b.constraint_index = i;
    out.push_back(b);
  }
  return out;
}

std::uint64_t instance_bound(const Instance& inst) {
  std::uint64_t f = inst.resource_count();
  for (const auto& b : core_bounds(inst)) f = std::max(f, b.bound);
  return f;
}

}  // namespace apep
