#include <algorithm>
#include <bit>
#include <limits>
#include <set>

#include "apep/error.hpp"
#include "apep/solve.hpp"
#include "solve_common.hpp"

namespace apep {

using detail::require_species;
using detail::Stopwatch;

namespace {

std::vector<std::vector<UserId>> largest_subsets(const std::vector<UserId>& users, std::size_t count) {
  // Cardinality descending, then lexicographic on the sorted members.
  std::vector<std::vector<UserId>> out;
  const auto m = users.size();
  for (std::size_t s = m; s >= 1 && out.size() < count; --s) {
    std::vector<std::size_t> idx(s);
    for (std::size_t i = 0; i < s; ++i) idx[i] = i;
    while (out.size() < count) {
      std::vector<UserId> pick;
      for (auto i : idx) pick.push_back(users[i]);
      out.push_back(std::move(pick));
      std::size_t i = s;
      while (i > 0 && idx[i - 1] == m - s + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

void check_tables(std::size_t k, const std::vector<SubsetTable>& functions) {
  if (k > 20) throw CapacityError("max weighted partition supports at most 20 resources");
  if (functions.empty()) throw InvalidInput("max weighted partition needs at least one function");
  for (const auto& f : functions)
    if (f.size() != (std::size_t{1} << k)) throw InvalidInput("weight table size must be 2^k");
}

PartitionResult reconstruct(std::size_t k, const std::vector<SubsetTable>& functions,
                            const std::vector<SubsetTable>& layers) {
  PartitionResult out;
  out.parts.resize(functions.size());
  std::uint64_t s = (std::uint64_t{1} << k) - 1;
  out.value = layers.back()[s];
  for (std::size_t i = functions.size() - 1; i > 0; --i) {
    const auto target = layers[i][s];
    for (std::uint64_t t = s;; t = (t - 1) & s) {
      if (layers[i - 1][s & ~t] + functions[i][t] == target) {
        out.parts[i] = ResourceSet(t);
        s &= ~t;
        break;
      }
      if (t == 0) throw std::logic_error("partition back-pointer not found");
    }
  }
  out.parts[0] = ResourceSet(s);
  return out;
}

// Arithmetic modulo the Mersenne prime 2^61 - 1.
constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

std::uint64_t mod_add(std::uint64_t a, std::uint64_t b) {
  const auto s = a + b;
  return s >= kPrime ? s - kPrime : s;
}
std::uint64_t mod_sub(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + kPrime - b; }
std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  const std::uint64_t lo = static_cast<std::uint64_t>(p & kPrime);
  const std::uint64_t hi = static_cast<std::uint64_t>(p >> 61);
  return mod_add(lo, hi);
}

// Ranked tables of polynomials: entry (rank, set) holds `len` coefficients.
struct RankedPolys {
  std::size_t k = 0;
  std::size_t len = 0;
  std::vector<std::uint64_t> c;

  RankedPolys(std::size_t k_, std::size_t len_)
      : k(k_), len(len_), c((k_ + 1) * (std::size_t{1} << k_) * len_, 0) {}
  std::uint64_t* at(std::size_t rank, std::uint64_t s) { return &c[(rank * (std::size_t{1} << k) + s) * len]; }
};

RankedPolys encode(std::size_t k, const SubsetTable& values, std::int64_t lo, std::size_t len) {
  RankedPolys out(k, len);
  for (std::uint64_t s = 0; s < values.size(); ++s)
    out.at(static_cast<std::size_t>(std::popcount(s)), s)[values[s] - lo] = 1;
  return out;
}

void zeta(RankedPolys& p, bool inverse) {
  const std::uint64_t full = std::uint64_t{1} << p.k;
  for (std::size_t r = 0; r <= p.k; ++r)
    for (std::size_t b = 0; b < p.k; ++b)
      for (std::uint64_t s = 0; s < full; ++s) {
        if (!((s >> b) & 1)) continue;
        auto* dst = p.at(r, s);
        const auto* src = p.at(r, s ^ (std::uint64_t{1} << b));
        for (std::size_t i = 0; i < p.len; ++i) dst[i] = inverse ? mod_sub(dst[i], src[i]) : mod_add(dst[i], src[i]);
      }
}

// h(S) = max over T ⊆ S of a(S \ T) + b(T).
SubsetTable max_plus_convolution(std::size_t k, const SubsetTable& a, const SubsetTable& b, std::uint64_t& work) {
  const auto [alo, ahi] = std::minmax_element(a.begin(), a.end());
  const auto [blo, bhi] = std::minmax_element(b.begin(), b.end());
  const auto la = static_cast<std::size_t>(*ahi - *alo) + 1;
  const auto lb = static_cast<std::size_t>(*bhi - *blo) + 1;
  if (la + lb > 1 << 14) throw CapacityError("weight range too wide for the polynomial encoding");
  const auto len = la + lb - 1;

  auto pa = encode(k, a, *alo, la);
  auto pb = encode(k, b, *blo, lb);
  zeta(pa, false);
  zeta(pb, false);

  RankedPolys ph(k, len);
  const std::uint64_t full = std::uint64_t{1} << k;
  for (std::uint64_t s = 0; s < full; ++s) {
    for (std::size_t r = 0; r <= k; ++r) {
      auto* dst = ph.at(r, s);
      for (std::size_t j = 0; j <= r; ++j) {
        const auto* x = pa.at(j, s);
        const auto* y = pb.at(r - j, s);
        for (std::size_t i = 0; i < la; ++i) {
          if (x[i] == 0) continue;
          for (std::size_t l = 0; l < lb; ++l)
            if (y[l] != 0) dst[i + l] = mod_add(dst[i + l], mod_mul(x[i], y[l]));
        }
        ++work;
      }
    }
  }
  zeta(ph, true);

  SubsetTable h(full);
  for (std::uint64_t s = 0; s < full; ++s) {
    const auto* poly = ph.at(static_cast<std::size_t>(std::popcount(s)), s);
    std::size_t top = len;
    while (top > 0 && poly[top - 1] == 0) --top;
    if (top == 0) throw std::logic_error("subset convolution lost every term");
    h[s] = *alo + *blo + static_cast<std::int64_t>(top - 1);
  }
  return h;
}

}  // namespace

IndexFamily build_index_family(const Instance& inst) {
  require_species(inst, {Species::sod_e}, "sod_e solver");
  const auto k = inst.resource_count();
  std::vector<std::set<ResourceId>> partners(k);
  for (const auto& c : inst.constraints()) {
    const auto p = std::get<PairConstraint>(normalize(c));
    partners[p.first].insert(p.second);
    partners[p.second].insert(p.first);
  }
  const std::size_t threshold = k == 0 ? 0 : static_cast<std::size_t>(std::bit_width(k) - 1);

  IndexFamily family;
  std::set<std::vector<UserId>> seen;
  for (ResourceId r = 0; r < k; ++r) {
    const auto users = inst.base().column(r);
    const std::size_t all = (std::size_t{1} << std::min<std::size_t>(users.size(), 63)) - 1;
    const std::size_t count = users.size() <= threshold ? all : std::min(all, partners[r].size() + 1);
    auto subsets = largest_subsets(users, count);
    for (const auto& x : subsets) {
      if (!seen.insert(x).second) continue;
      IndexMember m{x, {}};
      for (ResourceId q = 0; q < k; ++q) {
        const auto col = inst.base().column(q);
        if (std::includes(col.begin(), col.end(), x.begin(), x.end())) m.resources.insert(q);
      }
      family.members.push_back(std::move(m));
    }
    family.per_resource.push_back(std::move(subsets));
  }
  return family;
}

PartitionResult max_weighted_partition(std::size_t k, const std::vector<SubsetTable>& functions) {
  check_tables(k, functions);
  const std::uint64_t full = std::uint64_t{1} << k;
  std::vector<SubsetTable> layers{functions[0]};
  std::uint64_t states = full;
  for (std::size_t i = 1; i < functions.size(); ++i) {
    const auto& prev = layers.back();
    SubsetTable h(full, std::numeric_limits<std::int64_t>::min());
    for (std::uint64_t s = 0; s < full; ++s) {
      for (std::uint64_t t = s;; t = (t - 1) & s) {
        h[s] = std::max(h[s], prev[s & ~t] + functions[i][t]);
        ++states;
        if (t == 0) break;
      }
    }
    layers.push_back(std::move(h));
  }
  auto out = reconstruct(k, functions, layers);
  out.states = states;
  return out;
}

PartitionResult max_weighted_partition_fast(std::size_t k, const std::vector<SubsetTable>& functions) {
  check_tables(k, functions);
  std::vector<SubsetTable> layers{functions[0]};
  std::uint64_t work = 0;
  for (std::size_t i = 1; i < functions.size(); ++i)
    layers.push_back(max_plus_convolution(k, layers.back(), functions[i], work));
  auto out = reconstruct(k, functions, layers);
  out.states = work;
  return out;
}

SolveReport max_sod_e(const Instance& inst) {
  Stopwatch clock;
  const auto family = build_index_family(inst);
  const auto k = inst.resource_count();
  SolveReport report;
  report.algorithm = "sode";
  report.counters.candidates = family.members.size();

  std::vector<ResourceSet> nb(k);
  for (const auto& c : inst.constraints()) {
    const auto p = std::get<PairConstraint>(normalize(c));
    nb[p.first].insert(p.second);
    nb[p.second].insert(p.first);
  }
  auto independent = [&](std::uint64_t t) {
    bool ok = true;
    ResourceSet(t).for_each([&](ResourceId r) { ok = ok && !nb[r].intersects(ResourceSet(t)); });
    return ok;
  };

  if (k == 0) {
    report.satisfiable = true;
    report.max_size = 0;
    report.witness = AuthorizationRelation(inst.user_count(), 0);
    report.wall_seconds = clock.seconds();
    return report;
  }

  const std::uint64_t full = std::uint64_t{1} << k;
  const auto penalty = -static_cast<std::int64_t>(inst.base().size()) - 1;
  std::vector<SubsetTable> functions;
  for (const auto& m : family.members) {
    SubsetTable f(full, penalty);
    f[0] = 0;
    for (std::uint64_t t = 1; t < full; ++t)
      if (m.resources.contains(ResourceSet(t)) && independent(t))
        f[t] = static_cast<std::int64_t>(std::popcount(t) * m.users.size());
    functions.push_back(std::move(f));
  }

  const auto best = max_weighted_partition(k, functions);
  report.counters.dp_states = best.states;
  if (best.value >= 1) {
    AuthorizationRelation a(inst.user_count(), k);
    for (std::size_t i = 0; i < functions.size(); ++i)
      best.parts[i].for_each([&](ResourceId r) {
        for (auto u : family.members[i].users) a.insert(u, r);
      });
    report.satisfiable = true;
    report.max_size = static_cast<std::size_t>(best.value);
    report.witness = std::move(a);
  }
  report.wall_seconds = clock.seconds();
  return report;
}

}  // namespace apep
