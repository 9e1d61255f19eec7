#pragma once

#include <cstdint>
#include <optional>

#include "apep/model.hpp"

namespace apep {

struct OracleOptions {
  /// Largest search space (number of candidate relations) the oracle accepts.
  std::uint64_t budget = std::uint64_t{1} << 24;
  /// Treat users with identical base rows as interchangeable and visit one
  /// relation per orbit. Sound for user-independent constraints; changes which
  /// witness is reported, never the decision or the maximum.
  bool break_user_symmetry = false;
  /// Most search nodes to visit before giving up with CapacityError; 0 means
  /// no limit. Unlike `budget` this bounds the work actually done.
  std::uint64_t node_limit = 0;
};

struct OracleStats {
  std::uint64_t search_space = 0;
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
};

/// Number of candidate relations the oracle would enumerate: the product over
/// resources of 2^|A_Bse(r)|, or the number of per-family row multisets under
/// symmetry breaking (whichever is smaller). Saturates at 2^63.
std::uint64_t oracle_search_space(const Instance& inst, bool break_user_symmetry);

/// Some valid relation, or nullopt when none exists. Enumerates, resource by
/// resource, the non-empty subsets of A_Bse(r) in increasing order and returns
/// the first valid relation. Throws CapacityError when the search space exceeds
/// the budget.
std::optional<AuthorizationRelation> brute_decide(const Instance& inst, const OracleOptions& options = {},
                                                  OracleStats* stats = nullptr);

struct MaximumRelation {
  AuthorizationRelation relation;
  std::size_t size = 0;
};

/// A valid relation of maximum cardinality. Subsets are visited in decreasing
/// order so the first maximum found is kept.
std::optional<MaximumRelation> brute_maximize(const Instance& inst, const OracleOptions& options = {},
                                              OracleStats* stats = nullptr);

}  // namespace apep
