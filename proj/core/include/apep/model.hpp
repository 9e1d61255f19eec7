#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "apep/resource_set.hpp"

namespace apep {

/// Bijection between names and dense indices 0..size-1.
class NameTable {
public:
  NameTable() = default;
  explicit NameTable(std::vector<std::string> names);

  /// Names "<prefix>1" .. "<prefix>count".
  static NameTable numbered(std::string_view prefix, std::size_t count);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::uint32_t> find(std::string_view name) const;

  bool operator==(const NameTable& other) const { return names_ == other.names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// A ⊆ U × R, stored as one resource row per user. The per-resource view is
/// derived from the rows, so both views always agree.
class AuthorizationRelation {
public:
  AuthorizationRelation() = default;
  AuthorizationRelation(std::size_t users, std::size_t resources);

  static AuthorizationRelation from_rows(std::vector<ResourceSet> rows, std::size_t resources);
  static AuthorizationRelation full(std::size_t users, std::size_t resources);

  std::size_t user_count() const { return rows_.size(); }
  std::size_t resource_count() const { return resources_; }

  ResourceSet row(UserId u) const { return rows_.at(u); }
  const std::vector<ResourceSet>& rows() const { return rows_; }
  std::vector<UserId> column(ResourceId r) const;
  /// A(R'): users holding at least one resource of the set.
  std::vector<UserId> users_of(ResourceSet scope) const;
  /// A(U'): resources held by at least one of the users.
  ResourceSet resources_of(std::span<const UserId> users) const;

  bool contains(UserId u, ResourceId r) const { return row(u).contains(r); }
  void insert(UserId u, ResourceId r);
  void erase(UserId u, ResourceId r);
  void set_row(UserId u, ResourceSet row);

  /// |A|, the number of (user, resource) pairs.
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool subset_of(const AuthorizationRelation& other) const;
  /// A \ v: every pair of user v removed.
  AuthorizationRelation without_user(UserId v) const;
  std::vector<std::pair<UserId, ResourceId>> pairs() const;

  bool operator==(const AuthorizationRelation&) const = default;

private:
  std::vector<ResourceSet> rows_;
  std::size_t resources_ = 0;
};

// ---------------------------------------------------------------------------
// Constraints

/// Binary operators of the pair constraints. `exclusive` is separation
/// (exactly one side holds); `implied_by` is an input form only and
/// normalizes to `implies` with swapped operands.
enum class PairOp { iff, implies, implied_by, exclusive };
enum class Quantifier { forall, exists };
enum class Comparison { lt, le, eq, ge, gt };

struct PairConstraint {
  ResourceId first = 0;
  ResourceId second = 0;
  PairOp op = PairOp::iff;
  Quantifier quant = Quantifier::forall;
  bool operator==(const PairConstraint&) const = default;
};

/// |A(r)| ⊲ t for every resource r.
struct GlobalCardinality {
  Comparison cmp = Comparison::le;
  std::uint32_t t = 1;
  bool operator==(const GlobalCardinality&) const = default;
};

/// |A(scope)| ⊲ t.
struct LocalCardinality {
  ResourceSet scope;
  Comparison cmp = Comparison::le;
  std::uint32_t t = 1;
  bool operator==(const LocalCardinality&) const = default;
};

/// No user holds every resource of the scope.
struct Smer {
  ResourceSet scope;
  bool operator==(const Smer&) const = default;
};

/// A(left) ∩ A(right) = ∅: the two resource sets are served by disjoint teams.
struct TeamSod {
  ResourceSet left;
  ResourceSet right;
  bool operator==(const TeamSod&) const = default;
};

using Constraint = std::variant<PairConstraint, GlobalCardinality, LocalCardinality, Smer, TeamSod>;

/// Coarse classification used by the dispatcher and the specialised solvers.
enum class Species {
  bod_u,        // (r, r', iff, forall)
  bod_e,        // (r, r', iff, exists)
  sod_u,        // (r, r', xor, forall)
  sod_e,        // (r, r', xor, exists)
  implication,  // (r, r', implies, forall)
  global_card,
  local_card,
  smer,
  team_sod,
};

/// Species of a constraint after normalization.
Species species_of(const Constraint& c);
std::string_view to_string(Species s);
std::string_view to_string(PairOp op);
std::string_view to_string(Quantifier q);
std::string_view to_string(Comparison cmp);

/// Throws InvalidInput if the constraint breaks a structural invariant or
/// references a resource outside 0..resources-1.
void validate_constraint(const Constraint& c, std::size_t resources);

/// Canonical, satisfaction-equivalent form over complete relations.
Constraint normalize(const Constraint& c);

bool compare(std::size_t value, Comparison cmp, std::uint32_t t);

/// Satisfaction of c by A. Defined for complete relations.
bool eval_constraint(const AuthorizationRelation& a, const Constraint& c);

/// σ(A) = {(σ(u), r) : (u, r) ∈ A}. sigma[u] is the image of u.
AuthorizationRelation permute_users(const AuthorizationRelation& a, std::span<const UserId> sigma);

/// eval_constraint(σ(A), c). Throws InvalidInput if sigma is not a bijection.
bool user_independence_witness(const AuthorizationRelation& a, const Constraint& c,
                               std::span<const UserId> sigma);

// ---------------------------------------------------------------------------

/// An APEP instance: users, resources, base relation and constraints.
class Instance {
public:
  Instance() = default;
  /// Validates that every resource has a base-authorized user and that every
  /// constraint is well formed.
  Instance(NameTable users, NameTable resources, AuthorizationRelation base,
           std::vector<Constraint> constraints);

  /// Users named u1..un and resources r1..rk.
  static Instance anonymous(AuthorizationRelation base, std::vector<Constraint> constraints);

  const NameTable& users() const { return users_; }
  const NameTable& resources() const { return resources_; }
  const AuthorizationRelation& base() const { return base_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  std::size_t user_count() const { return users_.size(); }
  std::size_t resource_count() const { return resources_.size(); }

  Instance with_base(AuthorizationRelation base) const;
  Instance with_constraints(std::vector<Constraint> constraints) const;

  bool operator==(const Instance&) const = default;

private:
  NameTable users_;
  NameTable resources_;
  AuthorizationRelation base_;
  std::vector<Constraint> constraints_;
};

/// Copy of the instance with every constraint normalized.
Instance normalized(const Instance& inst);

std::string describe(const Constraint& c, const NameTable& resources);

}  // namespace apep
