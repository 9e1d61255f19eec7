#include "apep/solve.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "apep/error.hpp"
#include "apep/verify.hpp"
#include "solve_common.hpp"

namespace apep {

using detail::require_species;
using detail::Stopwatch;

SolveReport solve_bod_u(const Instance& inst) {
  Stopwatch clock;
  require_species(inst, {Species::bod_u}, "bod_u solver");
  SolveReport report;
  report.algorithm = "bodu";
  const auto elim = eliminate_bod_u(inst);
  if (!elim.unsatisfiable()) {
    // Every valid relation is contained in the merged base, and the merged
    // base itself is valid, so it is also the maximum.
    auto a = lift(inst, elim.trace, elim.reduced->base());
    report.satisfiable = true;
    report.max_size = a.size();
    report.witness = std::move(a);
  }
  report.wall_seconds = clock.seconds();
  return report;
}

SolveReport solve_bod_e(const Instance& inst) {
  Stopwatch clock;
  require_species(inst, {Species::bod_e}, "bod_e solver");
  SolveReport report;
  report.algorithm = "bode";
  if (check_valid(inst, inst.base()).valid) {
    report.satisfiable = true;
    report.max_size = inst.base().size();
    report.witness = inst.base();
  }
  report.wall_seconds = clock.seconds();
  return report;
}

SolveReport solve_bounded(const Instance& inst, const BoundedOptions& options) {
  Stopwatch clock;
  SolveReport report;
  report.algorithm = "bounded";

  const bool pair_only = std::all_of(inst.constraints().begin(), inst.constraints().end(),
                                     [](const Constraint& c) { return std::holds_alternative<PairConstraint>(c); });
  std::optional<BodUElimination> elim;
  const Instance* current = &inst;
  if (pair_only) {
    elim = eliminate_bod_u(inst);
    if (elim->unsatisfiable()) {
      report.wall_seconds = clock.seconds();
      return report;
    }
    current = &*elim->reduced;
  }

  const auto kernel = apply_reduction_rule(*current, instance_bound(*current));
  report.counters.users_removed = kernel.trace.removed_users.size();

  OracleStats stats;
  OracleOptions search;
  search.budget = std::numeric_limits<std::uint64_t>::max();
  search.break_user_symmetry = true;
  search.node_limit = options.kernel_budget;
  const auto found = brute_decide(kernel.reduced, search, &stats);
  report.counters.candidates = stats.nodes;
  if (found) {
    auto a = lift(*current, kernel.trace, *found);
    if (elim) a = lift(inst, elim->trace, a);
    report.satisfiable = true;
    report.witness = std::move(a);
  }
  report.wall_seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Route r) {
  switch (r) {
    case Route::automatic: return "auto";
    case Route::brute: return "brute";
    case Route::bounded: return "bounded";
    case Route::bod_u: return "bodu";
    case Route::bod_e: return "bode";
    case Route::sod_u: return "sodu";
    case Route::sod_e: return "sode";
    case Route::wsp: return "wsp";
  }
  return "?";
}

std::optional<Route> parse_route(std::string_view name) {
  for (auto r : {Route::automatic, Route::brute, Route::bounded, Route::bod_u, Route::bod_e, Route::sod_u,
                 Route::sod_e, Route::wsp})
    if (to_string(r) == name) return r;
  return std::nullopt;
}

Route select_route(const Instance& inst, Mode mode) {
  std::set<Species> profile;
  for (const auto& c : inst.constraints()) profile.insert(species_of(c));

  if (profile.empty()) return Route::bod_e;
  if (profile.size() == 1) {
    switch (*profile.begin()) {
      case Species::bod_u: return Route::bod_u;
      case Species::bod_e: return Route::bod_e;
      case Species::sod_u: return Route::sod_u;
      case Species::sod_e: return Route::sod_e;
      default: break;
    }
  }
  if (profile == std::set<Species>{Species::bod_e, Species::sod_u})
    return mode == Mode::decide ? Route::wsp : Route::brute;
  return mode == Mode::decide ? Route::bounded : Route::brute;
}

SolveReport solve_with(const Instance& inst, Route route, Mode mode) {
  if (route == Route::automatic) route = select_route(inst, mode);
  switch (route) {
    case Route::bod_u: return solve_bod_u(inst);
    case Route::bod_e: return solve_bod_e(inst);
    case Route::sod_u: return max_sod_u(inst);
    case Route::sod_e: return max_sod_e(inst);
    case Route::bounded:
    case Route::wsp:
      if (mode == Mode::maximize)
        throw UnsupportedMix(std::string(to_string(route)) + " only decides; use --mode decide or --algo brute");
      return route == Route::wsp ? solve_bod_e_sod_u(inst) : solve_bounded(inst);
    case Route::brute:
    case Route::automatic: break;
  }

  Stopwatch clock;
  SolveReport report;
  report.algorithm = "brute";
  OracleStats stats;
  OracleOptions options;
  options.break_user_symmetry = true;
  try {
    if (mode == Mode::decide) {
      report.witness = brute_decide(inst, options, &stats);
    } else if (auto best = brute_maximize(inst, options, &stats)) {
      report.max_size = best->size;
      report.witness = std::move(best->relation);
    }
  } catch (const CapacityError& e) {
    if (mode == Mode::maximize)
      throw CapacityError(std::string(e.what()) +
                          "; no specialised maximizer covers this constraint mix, try --mode decide");
    throw;
  }
  report.satisfiable = report.witness.has_value();
  report.counters.candidates = stats.nodes;
  report.wall_seconds = clock.seconds();
  return report;
}

SolveReport dispatch(const Instance& inst, Mode mode) { return solve_with(inst, Route::automatic, mode); }

}  // namespace apep
