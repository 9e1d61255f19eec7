#include "apep/reduce.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "apep/error.hpp"
#include "apep/verify.hpp"
#include "overloaded.hpp"

namespace apep {

using detail::overloaded;

namespace {

ResourceSet map_set(ResourceSet s, const std::vector<ResourceId>& class_of) {
  ResourceSet out;
  s.for_each([&](ResourceId r) { out.insert(class_of[r]); });
  return out;
}

Constraint map_constraint(const Constraint& c, const std::vector<ResourceId>& class_of) {
  return std::visit(overloaded{
                        [&](PairConstraint p) -> Constraint {
                          p.first = class_of[p.first];
                          p.second = class_of[p.second];
                          return p;
                        },
                        [&](LocalCardinality l) -> Constraint {
                          l.scope = map_set(l.scope, class_of);
                          return l;
                        },
                        [&](Smer s) -> Constraint {
                          s.scope = map_set(s.scope, class_of);
                          return s;
                        },
                        [&](TeamSod t) -> Constraint {
                          t.left = map_set(t.left, class_of);
                          t.right = map_set(t.right, class_of);
                          return t;
                        },
                        [](const GlobalCardinality& g) -> Constraint { return g; },
                    },
                    c);
}

std::vector<UserId> kept_users(std::size_t n, const std::vector<UserId>& removed) {
  std::vector<bool> gone(n, false);
  for (auto u : removed) gone.at(u) = true;
  std::vector<UserId> kept;
  for (UserId u = 0; u < n; ++u)
    if (!gone[u]) kept.push_back(u);
  return kept;
}

std::vector<ResourceSet> class_masks(const std::vector<std::vector<ResourceId>>& classes) {
  std::vector<ResourceSet> masks;
  for (const auto& cls : classes) {
    ResourceSet m;
    for (auto r : cls) m.insert(r);
    masks.push_back(m);
  }
  return masks;
}

}  // namespace

Instance replay(const Instance& original, const ReductionTrace& trace) {
  const auto k = original.resource_count();

  // Resources.
  std::vector<std::string> resource_names;
  std::vector<ResourceId> class_of(k);
  std::vector<ResourceSet> masks;
  if (trace.resource_classes.empty()) {
    resource_names = original.resources().names();
    std::iota(class_of.begin(), class_of.end(), 0);
    for (ResourceId r = 0; r < k; ++r) masks.push_back(ResourceSet::single(r));
  } else {
    masks = class_masks(trace.resource_classes);
    for (ResourceId c = 0; c < trace.resource_classes.size(); ++c) {
      std::string name;
      for (auto r : trace.resource_classes[c]) {
        if (!name.empty()) name += "+";
        name += original.resources().name(r);
        class_of.at(r) = c;
      }
      resource_names.push_back(std::move(name));
    }
  }

  // Constraints.
  std::vector<Constraint> constraints;
  if (trace.constraint_rewrites.empty()) {
    for (const auto& c : original.constraints())
      constraints.push_back(trace.resource_classes.empty() ? c : map_constraint(normalize(c), class_of));
  } else {
    std::size_t count = 0;
    for (const auto& rw : trace.constraint_rewrites)
      if (rw.reduced) count = std::max(count, *rw.reduced + 1);
    constraints.resize(count);
    for (const auto& rw : trace.constraint_rewrites)
      if (rw.reduced) constraints[*rw.reduced] = map_constraint(normalize(original.constraints().at(rw.original)), class_of);
  }

  // Users and base rows.
  const auto kept = kept_users(original.user_count(), trace.removed_users);
  std::vector<std::string> user_names;
  std::vector<ResourceSet> rows;
  for (auto u : kept) {
    user_names.push_back(original.users().name(u));
    const auto row = original.base().row(u);
    ResourceSet merged;
    for (ResourceId c = 0; c < masks.size(); ++c)
      if (row.contains(masks[c])) merged.insert(c);
    rows.push_back(merged);
  }

  return Instance(NameTable(std::move(user_names)), NameTable(std::move(resource_names)),
                  AuthorizationRelation::from_rows(std::move(rows), masks.size()), std::move(constraints));
}

AuthorizationRelation lift(const Instance& original, const ReductionTrace& trace,
                           const AuthorizationRelation& reduced_relation) {
  const auto kept = kept_users(original.user_count(), trace.removed_users);
  if (reduced_relation.user_count() != kept.size())
    throw InvalidInput("relation does not match the reduced user set");
  const auto masks = trace.resource_classes.empty() ? std::vector<ResourceSet>{} : class_masks(trace.resource_classes);

  AuthorizationRelation out(original.user_count(), original.resource_count());
  for (UserId i = 0; i < kept.size(); ++i) {
    const auto row = reduced_relation.row(i);
    if (masks.empty()) {
      out.set_row(kept[i], row);
    } else {
      ResourceSet expanded;
      row.for_each([&](ResourceId c) { expanded |= masks.at(c); });
      out.set_row(kept[i], expanded);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

BodUElimination eliminate_bod_u(const Instance& inst) {
  const auto k = inst.resource_count();
  std::vector<PairConstraint> pairs;
  bool any_binding = false;
  for (const auto& c : inst.constraints()) {
    const auto n = normalize(c);
    const auto* p = std::get_if<PairConstraint>(&n);
    if (!p) throw UnsupportedMix("binding-of-duty elimination only accepts pair constraints");
    pairs.push_back(*p);
    any_binding = any_binding || species_of(*p) == Species::bod_u;
  }

  BodUElimination result;
  if (!any_binding) {
    result.reduced = inst;
    return result;
  }

  std::vector<ResourceId> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](ResourceId r) {
    while (parent[r] != r) r = parent[r] = parent[parent[r]];
    return r;
  };
  for (const auto& p : pairs)
    if (species_of(p) == Species::bod_u) parent[find(p.first)] = find(p.second);

  // Classes are numbered by their smallest resource.
  std::vector<ResourceId> class_of(k);
  std::vector<std::optional<ResourceId>> class_of_root(k);
  auto& classes = result.trace.resource_classes;
  for (ResourceId r = 0; r < k; ++r) {
    auto& slot = class_of_root[find(r)];
    if (!slot) {
      slot = static_cast<ResourceId>(classes.size());
      classes.emplace_back();
    }
    class_of[r] = *slot;
    classes[*slot].push_back(r);
  }

  std::vector<PairConstraint> lifted;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (species_of(p) == Species::bod_u) {
      result.trace.constraint_rewrites.push_back({i, std::nullopt});
      continue;
    }
    const auto a = class_of[p.first];
    const auto b = class_of[p.second];
    if (a == b) {
      if (p.op == PairOp::exclusive) {
        result.unsat_reason = "separation constraint " + describe(p, inst.resources()) +
                              " inside a binding-of-duty class";
        return result;
      }
      // A(r) = A(r') and both non-empty: iff/exists and implies/forall hold.
      result.trace.constraint_rewrites.push_back({i, std::nullopt});
      continue;
    }
    const PairConstraint q{a, b, p.op, p.quant};
    auto it = std::find(lifted.begin(), lifted.end(), q);
    if (it != lifted.end()) {
      result.trace.constraint_rewrites.push_back({i, std::nullopt});
    } else {
      result.trace.constraint_rewrites.push_back({i, lifted.size()});
      lifted.push_back(q);
    }
  }

  const auto masks = class_masks(classes);
  for (std::size_t c = 0; c < masks.size(); ++c) {
    const bool covered = std::any_of(inst.base().rows().begin(), inst.base().rows().end(),
                                     [&](ResourceSet row) { return row.contains(masks[c]); });
    if (!covered) {
      std::string names;
      for (auto r : classes[c]) names += (names.empty() ? "" : ",") + inst.resources().name(r);
      result.unsat_reason = "no user is base-authorized for every resource of {" + names + "}";
      return result;
    }
  }

  result.reduced = replay(inst, result.trace);
  return result;
}

FamilyPartition partition_families(const Instance& inst) {
  FamilyPartition families;
  for (UserId u = 0; u < inst.user_count(); ++u) families[inst.base().row(u)].push_back(u);
  return families;
}

KernelReduction apply_reduction_rule(const Instance& inst, std::uint64_t f) {
  const auto k = inst.resource_count();
  if (f < k) throw InvalidInput("reduction threshold f = " + std::to_string(f) + " is below k = " + std::to_string(k));
  for (const auto& b : core_bounds(inst))
    if (b.bound > f)
      throw InvalidInput("constraint " + std::to_string(b.constraint_index) + " is not " + std::to_string(f) +
                         "-bounded (bound " + std::to_string(b.bound) + ")");

  ReductionTrace trace;
  for (const auto& [row, users] : partition_families(inst)) {
    for (std::size_t size = users.size(); size > f; --size) trace.removed_users.push_back(users[size - 1]);
  }
  if (trace.removed_users.empty()) return {inst, trace};
  return {replay(inst, trace), trace};
}

// ---------------------------------------------------------------------------

bool WspInstance::is_authorized(std::size_t step, UserId u) const {
  const auto& users = authorized.at(step);
  return std::binary_search(users.begin(), users.end(), u);
}

bool plan_valid(const WspInstance& wsp, const Plan& plan) {
  if (plan.size() != wsp.step_count()) return false;
  for (std::size_t s = 0; s < plan.size(); ++s)
    if (plan[s] >= wsp.user_count || !wsp.is_authorized(s, plan[s])) return false;
  for (const auto& c : wsp.constraints)
    if ((plan[c.first] == plan[c.second]) != c.equal) return false;
  return true;
}

WspInstance to_wsp(const Instance& inst) {
  const auto k = inst.resource_count();
  std::vector<std::set<ResourceId>> gamma(k);
  std::set<std::pair<ResourceId, ResourceId>> separations;
  for (const auto& c : inst.constraints()) {
    const auto n = normalize(c);
    const auto sp = species_of(n);
    const auto& p = std::get<PairConstraint>(n);
    if (sp == Species::bod_e) {
      gamma[p.first].insert(p.second);
      gamma[p.second].insert(p.first);
    } else if (sp == Species::sod_u) {
      separations.emplace(std::min(p.first, p.second), std::max(p.first, p.second));
    } else {
      throw UnsupportedMix("WSP reduction accepts only (iff, exists) and (xor, forall) constraints");
    }
  }

  WspInstance wsp;
  wsp.user_count = inst.user_count();
  std::vector<std::vector<std::size_t>> steps_of(k);
  std::map<std::pair<ResourceId, ResourceId>, std::size_t> step_index;
  const auto& names = inst.resources();
  for (ResourceId i = 0; i < k; ++i) {
    if (gamma[i].empty()) {
      steps_of[i].push_back(wsp.step_names.size());
      wsp.step_names.push_back("s_" + names.name(i));
      wsp.origin.push_back({i, std::nullopt});
      wsp.authorized.push_back(inst.base().column(i));
      continue;
    }
    for (auto j : gamma[i]) {
      step_index[{i, j}] = wsp.step_names.size();
      steps_of[i].push_back(wsp.step_names.size());
      wsp.step_names.push_back("s_" + names.name(i) + "_" + names.name(j));
      wsp.origin.push_back({i, j});
      wsp.authorized.emplace_back();
      auto& auth = wsp.authorized.back();
      for (UserId u = 0; u < inst.user_count(); ++u)
        if (inst.base().row(u).contains(ResourceSet{i, j})) auth.push_back(u);
    }
  }

  for (ResourceId i = 0; i < k; ++i)
    for (auto j : gamma[i])
      if (i < j) wsp.constraints.push_back({step_index[{i, j}], step_index[{j, i}], true});
  for (const auto& [a, b] : separations)
    for (auto s : steps_of[a])
      for (auto t : steps_of[b]) wsp.constraints.push_back({s, t, false});
  return wsp;
}

AuthorizationRelation from_wsp_plan(const Instance& inst, const WspInstance& wsp, const Plan& plan) {
  if (wsp.origin.size() != wsp.step_count()) throw InvalidInput("WSP instance was not produced by to_wsp");
  if (wsp.user_count != inst.user_count()) throw InvalidInput("WSP instance does not match the APEP instance");
  if (!plan_valid(wsp, plan)) throw InvalidInput("plan is not valid for the WSP instance");
  AuthorizationRelation a(inst.user_count(), inst.resource_count());
  for (std::size_t s = 0; s < plan.size(); ++s) a.insert(plan[s], wsp.origin[s].resource);
  return a;
}

// ---------------------------------------------------------------------------

ResiliencyEncoding encode_resiliency(const NameTable& users, const NameTable& resources,
                                     const AuthorizationRelation& a, const ResiliencyPolicy& policy,
                                     bool bound_team_size) {
  if (a.user_count() != users.size() || a.resource_count() != resources.size())
    throw InvalidInput("relation does not match the name tables");
  if (policy.resources.empty()) throw InvalidInput("resiliency policy needs a non-empty resource set");
  if (!ResourceSet::full(resources.size()).contains(policy.resources))
    throw InvalidInput("resiliency policy references an unknown resource");
  if (policy.teams < 1 || policy.team_size < 1) throw InvalidInput("resiliency policy needs d >= 1 and t >= 1");

  const auto q = policy.resources.members();
  const std::size_t d = policy.teams;
  if (q.size() * d > kMaxResources) throw InvalidInput("encoding would exceed 64 resources");

  ResiliencyEncoding out;
  for (auto r : q) {
    if (a.column(r).empty()) {
      out.unsat_reason = "no user is authorized for '" + resources.name(r) + "'";
      return out;
    }
  }

  std::vector<std::string> copy_names;
  std::vector<ResourceSet> copies(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t p = 0; p < q.size(); ++p) {
      copies[i].insert(static_cast<ResourceId>(i * q.size() + p));
      copy_names.push_back(resources.name(q[p]) + "^" + std::to_string(i + 1));
    }
  }

  std::vector<ResourceSet> rows(users.size());
  for (UserId u = 0; u < users.size(); ++u)
    for (std::size_t p = 0; p < q.size(); ++p)
      if (a.contains(u, q[p]))
        for (std::size_t i = 0; i < d; ++i) rows[u].insert(static_cast<ResourceId>(i * q.size() + p));

  std::vector<Constraint> constraints{GlobalCardinality{Comparison::eq, 1}};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) constraints.push_back(TeamSod{copies[i], copies[j]});
  if (bound_team_size)
    for (std::size_t i = 0; i < d; ++i)
      constraints.push_back(LocalCardinality{copies[i], Comparison::le, policy.team_size});

  out.instance = Instance(users, NameTable(std::move(copy_names)),
                          AuthorizationRelation::from_rows(std::move(rows), q.size() * d), std::move(constraints));
  return out;
}

}  // namespace apep
