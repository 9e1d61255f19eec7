#pragma once

#include <cstdint>
#include <vector>

#include "apep/model.hpp"

namespace apep {

struct Verdict {
  bool authorized = false;
  bool complete = false;
  /// Only meaningful when complete; false for incomplete relations.
  bool eligible = false;
  /// Indices of the failing constraints (evaluated only on complete relations).
  std::vector<std::size_t> violated;
  bool valid = false;
};

/// Authorized (A ⊆ A_Bse), complete (every resource assigned) and eligible
/// (every constraint holds). Throws InvalidInput when A is not over the
/// instance's users and resources.
Verdict check_valid(const Instance& inst, const AuthorizationRelation& a);

/// Users v such that A \ v is no longer valid. A must be valid.
std::vector<UserId> compute_core(const Instance& inst, const AuthorizationRelation& a);

enum class Provenance { stated, derived };

/// Upper bound on the core size of any relation valid for U × R and a single
/// constraint.
struct CoreBound {
  std::size_t constraint_index = 0;
  std::uint64_t bound = 0;
  Provenance provenance = Provenance::stated;
};

CoreBound bound_for(const Constraint& c, std::size_t k);

/// One bound per constraint, in constraint order.
std::vector<CoreBound> core_bounds(const Instance& inst);

/// max(k, max bound_for): the family size threshold of the kernelization.
std::uint64_t instance_bound(const Instance& inst);

}  // namespace apep
