#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apep/model.hpp"
#include "apep/oracle.hpp"
#include "apep/reduce.hpp"

namespace apep {

struct SolveCounters {
  std::uint64_t patterns_explored = 0;
  std::uint64_t users_removed = 0;
  std::uint64_t dp_states = 0;
  /// Oracle nodes, matchings or partitions examined, depending on the route.
  std::uint64_t candidates = 0;
};

struct SolveReport {
  std::string algorithm;
  bool satisfiable = false;
  std::optional<AuthorizationRelation> witness;
  /// M_Sol; only set by routes that maximize.
  std::optional<std::size_t> max_size;
  SolveCounters counters;
  double wall_seconds = 0.0;
};

// ---------------------------------------------------------------------------
// Polynomial special cases

SolveReport solve_bod_u(const Instance& inst);
SolveReport solve_bod_e(const Instance& inst);

/// Kernelize (BoD_U elimination for pair-only instances, then the family rule
/// with f = instance_bound) and decide the kernel with the oracle.
struct BoundedOptions {
  /// Search nodes the kernel oracle may visit. The kernel has at most
  /// 2^k * f users, so its size is not checked up front.
  std::uint64_t kernel_budget = std::uint64_t{1} << 30;
};
SolveReport solve_bounded(const Instance& inst, const BoundedOptions& options = {});

// ---------------------------------------------------------------------------
// SoD_U: patterns and matchings

/// Blocks of a set partition of the resources, ordered by smallest member.
using Pattern = std::vector<ResourceSet>;
using ResourcePair = std::pair<ResourceId, ResourceId>;

/// Set partitions of 0..k-1 with no block holding both ends of a pair, in
/// restricted-growth-string order. Return false from visit to stop early.
void for_each_eligible_pattern(std::size_t k, const std::vector<ResourcePair>& separated,
                               const std::function<bool(const Pattern&)>& visit);
std::vector<Pattern> enumerate_eligible_patterns(std::size_t k, const std::vector<ResourcePair>& separated);

/// Separated pairs of an SoD_U-only instance (UnsupportedMix otherwise).
std::vector<ResourcePair> sod_u_pairs(const Instance& inst);

struct PatternValue {
  AuthorizationRelation relation;
  std::int64_t value = 0;
};

/// Best relation whose plan pattern is P, or nullopt when P is unrealizable.
/// Throws InvalidInput if P is not an eligible partition of the resources.
std::optional<PatternValue> pattern_value(const Instance& inst, const Pattern& p);

/// ω(T, u): largest independent X with T ⊆ X ⊆ A_Bse(u), or nullopt when no
/// such X exists.
std::optional<std::size_t> pattern_weight(const Instance& inst, ResourceSet t, UserId u);

SolveReport max_sod_u(const Instance& inst);

// ---------------------------------------------------------------------------
// SoD_E: index family and max weighted partition

struct IndexMember {
  std::vector<UserId> users;  // sorted
  ResourceSet resources;      // resources r with users ⊆ A_Bse(r)
  bool operator==(const IndexMember&) const = default;
};

struct IndexFamily {
  /// Candidate sets per resource, largest first.
  std::vector<std::vector<std::vector<UserId>>> per_resource;
  /// Union of per_resource with duplicates removed, in first-seen order.
  std::vector<IndexMember> members;
};

IndexFamily build_index_family(const Instance& inst);

/// f_i(T) for every T ⊆ {0..k-1}, indexed by mask.
using SubsetTable = std::vector<std::int64_t>;

struct PartitionResult {
  /// parts[i] is the block given to function i; blocks partition 0..k-1.
  std::vector<ResourceSet> parts;
  std::int64_t value = 0;
  std::uint64_t states = 0;
};

/// Layered DP over subsets, O(p 3^k).
PartitionResult max_weighted_partition(std::size_t k, const std::vector<SubsetTable>& functions);

/// Ranked subset convolution over polynomial-encoded values; same optimum as
/// max_weighted_partition.
PartitionResult max_weighted_partition_fast(std::size_t k, const std::vector<SubsetTable>& functions);

SolveReport max_sod_e(const Instance& inst);

// ---------------------------------------------------------------------------
// WSP(=, !=)

struct WspStats {
  std::uint64_t classes = 0;
  std::uint64_t patterns = 0;
};

std::optional<Plan> solve_wsp(const WspInstance& wsp, WspStats* stats = nullptr);

SolveReport solve_bod_e_sod_u(const Instance& inst);

// ---------------------------------------------------------------------------
// Routing

enum class Route { automatic, brute, bounded, bod_u, bod_e, sod_u, sod_e, wsp };
enum class Mode { decide, maximize };

std::string_view to_string(Route r);
std::optional<Route> parse_route(std::string_view name);

/// The route dispatch would pick for this instance and mode.
Route select_route(const Instance& inst, Mode mode);

/// Run one route. Decide-only routes (bounded, wsp) throw UnsupportedMix in
/// maximize mode; oracle routes throw CapacityError beyond their budget.
SolveReport solve_with(const Instance& inst, Route route, Mode mode);

SolveReport dispatch(const Instance& inst, Mode mode);

}  // namespace apep
