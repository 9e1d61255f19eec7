#include <bit>
#include <map>
#include <unordered_map>

#include "apep/error.hpp"
#include "apep/matching.hpp"
#include "apep/solve.hpp"
#include "solve_common.hpp"

namespace apep {

using detail::require_species;
using detail::Stopwatch;

namespace {

std::vector<ResourceSet> conflict_masks(std::size_t k, const std::vector<ResourcePair>& separated) {
  std::vector<ResourceSet> nb(k);
  for (auto [a, b] : separated) {
    if (a >= k || b >= k || a == b) throw InvalidInput("separated pair references an invalid resource");
    nb[a].insert(b);
    nb[b].insert(a);
  }
  return nb;
}

bool independent(ResourceSet x, const std::vector<ResourceSet>& nb) {
  bool ok = true;
  x.for_each([&](ResourceId r) { ok = ok && !nb[r].intersects(x); });
  return ok;
}

void grow(std::size_t r, std::size_t k, const std::vector<ResourceSet>& nb, Pattern& blocks,
          const std::function<bool(const Pattern&)>& visit, bool& stop) {
  if (stop) return;
  if (r == k) {
    stop = !visit(blocks);
    return;
  }
  for (std::size_t b = 0; b < blocks.size() && !stop; ++b) {
    if (blocks[b].intersects(nb[r])) continue;
    blocks[b].insert(static_cast<ResourceId>(r));
    grow(r + 1, k, nb, blocks, visit, stop);
    blocks[b].erase(static_cast<ResourceId>(r));
  }
  if (stop) return;
  blocks.push_back(ResourceSet::single(static_cast<ResourceId>(r)));
  grow(r + 1, k, nb, blocks, visit, stop);
  blocks.pop_back();
}

struct Extension {
  std::size_t size = 0;
  ResourceSet set;
};

// Largest independent X with t ⊆ X ⊆ row, memoized per (row, t).
class Extender {
public:
  Extender(std::vector<ResourceSet> nb) : nb_(std::move(nb)) {}

  std::optional<Extension> best(ResourceSet row, ResourceSet t) {
    if (!row.contains(t) || !independent(t, nb_)) return std::nullopt;
    const auto key = std::make_pair(row.bits(), t.bits());
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    ResourceSet blocked;
    t.for_each([&](ResourceId r) { blocked |= nb_[r]; });
    const auto free = (row - t - blocked).bits();
    if (std::popcount(free) > 26) throw CapacityError("independent-set search over more than 26 resources");

    Extension out{t.size(), t};
    std::uint64_t sub = free;
    while (true) {
      const auto x = ResourceSet(sub) | t;
      if (x.size() > out.size && independent(ResourceSet(sub), nb_)) out = {x.size(), x};
      if (sub == 0) break;
      sub = (sub - 1) & free;
    }
    memo_.emplace(key, out);
    return out;
  }

private:
  struct Hash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const {
      return std::hash<std::uint64_t>{}(p.first * 0x9E3779B97F4A7C15ULL ^ p.second);
    }
  };

  std::vector<ResourceSet> nb_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, Extension, Hash> memo_;
};

void check_pattern(const Pattern& p, std::size_t k, const std::vector<ResourceSet>& nb) {
  ResourceSet seen;
  for (auto block : p) {
    if (block.empty()) throw InvalidInput("pattern has an empty block");
    if (block.intersects(seen)) throw InvalidInput("pattern blocks overlap");
    if (!independent(block, nb)) throw InvalidInput("pattern block contains a separated pair");
    seen |= block;
  }
  if (seen != ResourceSet::full(k)) throw InvalidInput("pattern does not cover every resource");
}

std::optional<PatternValue> evaluate(const Instance& inst, const Pattern& p, Extender& ext) {
  const auto n = inst.user_count();
  const auto d = p.size();
  if (d > n) return std::nullopt;

  // Empty blocks all carry ω(∅, u), so the n x n graph collapses to d x n
  // gains over the baseline of every user taking its free optimum.
  std::int64_t baseline = 0;
  std::vector<Extension> free(n);
  for (UserId u = 0; u < n; ++u) {
    free[u] = *ext.best(inst.base().row(u), {});
    baseline += static_cast<std::int64_t>(free[u].size);
  }

  WeightedBipartite g(d, n);
  for (std::size_t i = 0; i < d; ++i)
    for (UserId u = 0; u < n; ++u)
      if (auto e = ext.best(inst.base().row(u), p[i]))
        g.set(i, u, static_cast<std::int64_t>(e->size) - static_cast<std::int64_t>(free[u].size));

  const auto m = max_weight_left_matching(g);
  if (!m) return std::nullopt;

  std::vector<ResourceSet> rows(n);
  for (UserId u = 0; u < n; ++u) rows[u] = free[u].set;
  for (std::size_t i = 0; i < d; ++i) {
    const auto u = static_cast<UserId>(m->mate[i]);
    rows[u] = ext.best(inst.base().row(u), p[i])->set;
  }
  return PatternValue{AuthorizationRelation::from_rows(std::move(rows), inst.resource_count()), baseline + m->total};
}

}  // namespace

void for_each_eligible_pattern(std::size_t k, const std::vector<ResourcePair>& separated,
                               const std::function<bool(const Pattern&)>& visit) {
  if (k > kMaxResources) throw InvalidInput("at most 64 resources are supported");
  const auto nb = conflict_masks(k, separated);
  Pattern blocks;
  bool stop = false;
  grow(0, k, nb, blocks, visit, stop);
}

std::vector<Pattern> enumerate_eligible_patterns(std::size_t k, const std::vector<ResourcePair>& separated) {
  std::vector<Pattern> out;
  for_each_eligible_pattern(k, separated, [&](const Pattern& p) {
    out.push_back(p);
    return true;
  });
  return out;
}

std::vector<ResourcePair> sod_u_pairs(const Instance& inst) {
  require_species(inst, {Species::sod_u}, "sod_u solver");
  std::vector<ResourcePair> pairs;
  for (const auto& c : inst.constraints()) {
    const auto p = std::get<PairConstraint>(normalize(c));
    pairs.emplace_back(p.first, p.second);
  }
  return pairs;
}

std::optional<std::size_t> pattern_weight(const Instance& inst, ResourceSet t, UserId u) {
  Extender ext(conflict_masks(inst.resource_count(), sod_u_pairs(inst)));
  const auto e = ext.best(inst.base().row(u), t);
  if (!e) return std::nullopt;
  return e->size;
}

std::optional<PatternValue> pattern_value(const Instance& inst, const Pattern& p) {
  auto nb = conflict_masks(inst.resource_count(), sod_u_pairs(inst));
  check_pattern(p, inst.resource_count(), nb);
  Extender ext(std::move(nb));
  return evaluate(inst, p, ext);
}

SolveReport max_sod_u(const Instance& inst) {
  Stopwatch clock;
  const auto pairs = sod_u_pairs(inst);
  Extender ext(conflict_masks(inst.resource_count(), pairs));

  SolveReport report;
  report.algorithm = "sodu";
  std::optional<PatternValue> best;
  for_each_eligible_pattern(inst.resource_count(), pairs, [&](const Pattern& p) {
    ++report.counters.patterns_explored;
    if (p.size() > inst.user_count()) return true;
    ++report.counters.candidates;
    auto v = evaluate(inst, p, ext);
    if (v && (!best || v->value > best->value)) best = std::move(v);
    return true;
  });

  if (best) {
    report.satisfiable = true;
    report.max_size = static_cast<std::size_t>(best->value);
    report.witness = std::move(best->relation);
  }
  report.wall_seconds = clock.seconds();
  return report;
}

}  // namespace apep
