#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apep/model.hpp"

namespace apep {

// ---------------------------------------------------------------------------
// Reduction traces

/// Fate of one original constraint: its index in the reduced instance, or
/// nullopt when it was consumed or became trivially true.
struct ConstraintRewrite {
  std::size_t original = 0;
  std::optional<std::size_t> reduced;
  bool operator==(const ConstraintRewrite&) const = default;
};

/// Everything needed to rebuild a reduced instance from the original and to
/// map its solutions back.
struct ReductionTrace {
  /// Original user indices, in removal order.
  std::vector<UserId> removed_users;
  /// Reduced resource i stands for the original resources resource_classes[i].
  /// Empty means resources are unchanged.
  std::vector<std::vector<ResourceId>> resource_classes;
  /// Empty means constraints are unchanged.
  std::vector<ConstraintRewrite> constraint_rewrites;

  bool empty() const { return removed_users.empty() && resource_classes.empty() && constraint_rewrites.empty(); }
  bool operator==(const ReductionTrace&) const = default;
};

/// Rebuild the reduced instance by applying the trace to the original.
Instance replay(const Instance& original, const ReductionTrace& trace);

/// Map a relation over the reduced instance back onto the original one.
AuthorizationRelation lift(const Instance& original, const ReductionTrace& trace,
                           const AuthorizationRelation& reduced_relation);

// ---------------------------------------------------------------------------
// Binding-of-duty elimination

struct BodUElimination {
  /// nullopt when the instance is trivially unsatisfiable.
  std::optional<Instance> reduced;
  ReductionTrace trace;
  std::string unsat_reason;

  bool unsatisfiable() const { return !reduced.has_value(); }
};

/// Merge resources tied by (r, r', iff, forall) into one resource whose base
/// users are the intersection of the class. Only pair constraints are
/// accepted (UnsupportedMix otherwise).
BodUElimination eliminate_bod_u(const Instance& inst);

// ---------------------------------------------------------------------------
// User families and the kernelization rule

/// U_T for every base row T that occurs, keyed by T. Users are in index order.
using FamilyPartition = std::map<ResourceSet, std::vector<UserId>>;

FamilyPartition partition_families(const Instance& inst);

/// Shrink every family to at most f users, dropping the largest user indices
/// first. Requires f >= k and every constraint f-bounded.
struct KernelReduction {
  Instance reduced;
  ReductionTrace trace;
};

KernelReduction apply_reduction_rule(const Instance& inst, std::uint64_t f);

// ---------------------------------------------------------------------------
// WSP(=, !=)

struct WspConstraint {
  std::size_t first = 0;
  std::size_t second = 0;
  bool equal = false;
  bool operator==(const WspConstraint&) const = default;
};

/// Resource (and binding partner) a step was created for.
struct WspStepOrigin {
  ResourceId resource = 0;
  std::optional<ResourceId> partner;
  bool operator==(const WspStepOrigin&) const = default;
};

struct WspInstance {
  std::vector<std::string> step_names;
  std::size_t user_count = 0;
  /// Users authorized for each step, sorted.
  std::vector<std::vector<UserId>> authorized;
  std::vector<WspConstraint> constraints;
  /// Filled by to_wsp; empty for hand-built instances.
  std::vector<WspStepOrigin> origin;

  std::size_t step_count() const { return step_names.size(); }
  bool is_authorized(std::size_t step, UserId u) const;
};

/// Step -> user assignment.
using Plan = std::vector<UserId>;

bool plan_valid(const WspInstance& wsp, const Plan& plan);

/// Reduce an instance whose constraints are (iff, exists) and (xor, forall)
/// pairs to WSP(=, !=).
WspInstance to_wsp(const Instance& inst);

/// A_pi = {(u, r_i) : pi(s) = u for some step s of r_i}. The plan must be valid.
AuthorizationRelation from_wsp_plan(const Instance& inst, const WspInstance& wsp, const Plan& plan);

// ---------------------------------------------------------------------------
// Resiliency (s = 0)

struct ResiliencyPolicy {
  ResourceSet resources;      // Q
  std::uint32_t teams = 1;    // d
  std::uint32_t team_size = 1;  // t
};

struct ResiliencyEncoding {
  /// nullopt when some resource of Q has no authorized user.
  std::optional<Instance> instance;
  std::string unsat_reason;
};

/// d copies of Q, one user per copy (=, 1), disjoint teams across copies and,
/// when bound_team_size is set, |A(Q^(i))| <= t per copy. The encoded instance
/// is satisfiable iff d disjoint teams of size <= t each cover Q.
ResiliencyEncoding encode_resiliency(const NameTable& users, const NameTable& resources,
                                     const AuthorizationRelation& a, const ResiliencyPolicy& policy,
                                     bool bound_team_size = true);

}  // namespace apep
