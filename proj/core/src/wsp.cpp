#include <algorithm>
#include <numeric>

#include "apep/error.hpp"
#include "apep/solve.hpp"
#include "apep/verify.hpp"
#include "solve_common.hpp"

namespace apep {

using detail::require_species;
using detail::Stopwatch;

namespace {

std::vector<UserId> intersect(const std::vector<UserId>& a, const std::vector<UserId>& b) {
  std::vector<UserId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Kuhn's augmenting paths: distinct users for every block.
class BlockMatcher {
public:
  BlockMatcher(const std::vector<std::vector<UserId>>& candidates, std::size_t users)
      : candidates_(candidates), owner_(users, kNone), mate_(candidates.size(), kNone) {}

  bool run() {
    for (std::size_t b = 0; b < candidates_.size(); ++b) {
      visited_.assign(owner_.size(), 0);
      if (!augment(b)) return false;
    }
    return true;
  }

  UserId user_of(std::size_t block) const { return static_cast<UserId>(mate_[block]); }

private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool augment(std::size_t b) {
    for (auto u : candidates_[b]) {
      if (visited_[u]) continue;
      visited_[u] = 1;
      if (owner_[u] == kNone || augment(owner_[u])) {
        owner_[u] = b;
        mate_[b] = u;
        return true;
      }
    }
    return false;
  }

  const std::vector<std::vector<UserId>>& candidates_;
  std::vector<std::size_t> owner_;
  std::vector<std::size_t> mate_;
  std::vector<char> visited_;
};

struct ClassSearch {
  std::size_t users = 0;
  std::vector<std::vector<UserId>> auth;      // per contracted class
  std::vector<std::vector<char>> conflict;    // class x class
  std::vector<std::size_t> block_of;          // class -> block
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::vector<UserId>> block_auth;
  std::uint64_t patterns = 0;
  std::optional<std::vector<UserId>> found;   // class -> user

  void grow(std::size_t c) {
    if (found) return;
    if (c == auth.size()) {
      ++patterns;
      BlockMatcher m(block_auth, users);
      if (!m.run()) return;
      std::vector<UserId> assign(auth.size());
      for (std::size_t i = 0; i < auth.size(); ++i) assign[i] = m.user_of(block_of[i]);
      found = std::move(assign);
      return;
    }
    for (std::size_t b = 0; b < blocks.size() && !found; ++b) {
      const bool clash = std::any_of(blocks[b].begin(), blocks[b].end(), [&](std::size_t o) { return conflict[c][o]; });
      if (clash) continue;
      auto shared = intersect(block_auth[b], auth[c]);
      if (shared.empty()) continue;
      auto saved = std::move(block_auth[b]);
      block_auth[b] = std::move(shared);
      blocks[b].push_back(c);
      block_of[c] = b;
      grow(c + 1);
      blocks[b].pop_back();
      block_auth[b] = std::move(saved);
    }
    if (found) return;
    blocks.push_back({c});
    block_auth.push_back(auth[c]);
    block_of[c] = blocks.size() - 1;
    grow(c + 1);
    blocks.pop_back();
    block_auth.pop_back();
  }
};

}  // namespace

std::optional<Plan> solve_wsp(const WspInstance& wsp, WspStats* stats) {
  const auto m = wsp.step_count();
  if (wsp.authorized.size() != m) throw InvalidInput("WSP authorization list does not match the step count");
  for (const auto& c : wsp.constraints)
    if (c.first >= m || c.second >= m) throw InvalidInput("WSP constraint references an unknown step");
  for (const auto& users : wsp.authorized) {
    if (!std::is_sorted(users.begin(), users.end())) throw InvalidInput("WSP authorizations must be sorted");
    if (!users.empty() && users.back() >= wsp.user_count) throw InvalidInput("WSP authorization names an unknown user");
  }

  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t s) {
    while (parent[s] != s) s = parent[s] = parent[parent[s]];
    return s;
  };
  for (const auto& c : wsp.constraints)
    if (c.equal) parent[find(c.first)] = find(c.second);

  std::vector<std::size_t> class_of(m);
  std::vector<std::size_t> class_of_root(m, static_cast<std::size_t>(-1));
  ClassSearch search;
  search.users = wsp.user_count;
  for (std::size_t s = 0; s < m; ++s) {
    auto& slot = class_of_root[find(s)];
    if (slot == static_cast<std::size_t>(-1)) {
      slot = search.auth.size();
      search.auth.push_back(wsp.authorized[s]);
    } else {
      search.auth[slot] = intersect(search.auth[slot], wsp.authorized[s]);
    }
    class_of[s] = slot;
  }
  const auto classes = search.auth.size();
  if (stats) *stats = {classes, 0};

  for (const auto& a : search.auth)
    if (a.empty()) return std::nullopt;
  search.conflict.assign(classes, std::vector<char>(classes, 0));
  for (const auto& c : wsp.constraints) {
    if (c.equal) continue;
    const auto a = class_of[c.first];
    const auto b = class_of[c.second];
    if (a == b) return std::nullopt;
    search.conflict[a][b] = search.conflict[b][a] = 1;
  }

  search.block_of.assign(classes, 0);
  search.grow(0);
  if (stats) stats->patterns = search.patterns;
  if (!search.found) return std::nullopt;

  Plan plan(m);
  for (std::size_t s = 0; s < m; ++s) plan[s] = (*search.found)[class_of[s]];
  return plan;
}

SolveReport solve_bod_e_sod_u(const Instance& inst) {
  Stopwatch clock;
  require_species(inst, {Species::bod_e, Species::sod_u}, "WSP route");
  SolveReport report;
  report.algorithm = "wsp";
  const auto wsp = to_wsp(inst);
  WspStats stats;
  const auto plan = solve_wsp(wsp, &stats);
  report.counters.patterns_explored = stats.patterns;
  report.counters.candidates = wsp.step_count();
  if (plan) {
    report.satisfiable = true;
    report.witness = from_wsp_plan(inst, wsp, *plan);
  }
  report.wall_seconds = clock.seconds();
  return report;
}

}  // namespace apep
