#include "generate.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace apep::io {

namespace {

using Rng = std::mt19937_64;

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

ResourceSet random_subset(Rng& rng, std::size_t k, std::size_t min_size) {
  while (true) {
    ResourceSet s(std::uniform_int_distribution<std::uint64_t>(0, ResourceSet::full(k).bits())(rng));
    if (s.size() >= min_size) return s;
  }
}

Comparison random_cmp(Rng& rng) {
  constexpr Comparison cmps[] = {Comparison::lt, Comparison::le, Comparison::eq, Comparison::ge, Comparison::gt};
  return cmps[uniform(rng, 0, 4)];
}

}  // namespace

InstanceFile generate(const GenParams& p) {
  if (p.k == 0 || p.k > kMaxResources) throw InvalidInput("k must be in 1..64");
  if (p.n == 0) throw InvalidInput("n must be positive");
  if (!(p.density > 0.0 && p.density <= 1.0)) throw InvalidInput("density must be in (0, 1]");
  if (p.t_min < 1 || p.t_min > p.t_max) throw InvalidInput("t range must satisfy 1 <= t_min <= t_max");
  const std::size_t pair_count = p.bod_u + p.bod_e + p.sod_u + p.sod_e + p.implication;
  const std::size_t distinct_pairs = p.k * (p.k - 1) / 2;
  if (pair_count > distinct_pairs)
    throw InvalidInput(std::to_string(pair_count) + " pair constraints requested but only " +
                       std::to_string(distinct_pairs) + " distinct resource pairs exist");
  if ((p.smer > 0 || p.team_sod > 0) && p.k < 2) throw InvalidInput("SMER and team constraints need k >= 2");

  Rng rng(p.seed);
  std::bernoulli_distribution coin(p.density);
  std::vector<ResourceSet> rows(p.n);
  for (auto& row : rows)
    for (ResourceId r = 0; r < p.k; ++r)
      if (coin(rng)) row.insert(r);
  for (ResourceId r = 0; r < p.k; ++r) {
    auto covered = [&] { return std::any_of(rows.begin(), rows.end(), [&](ResourceSet s) { return s.contains(r); }); };
    while (!covered())
      for (auto& row : rows)
        if (coin(rng)) row.insert(r);
  }

  std::vector<std::pair<ResourceId, ResourceId>> pairs;
  for (ResourceId a = 0; a < p.k; ++a)
    for (ResourceId b = a + 1; b < p.k; ++b) pairs.emplace_back(a, b);
  std::shuffle(pairs.begin(), pairs.end(), rng);

  std::vector<Constraint> constraints;
  std::size_t next_pair = 0;
  auto add_pairs = [&](std::size_t count, PairOp op, Quantifier q) {
    for (std::size_t i = 0; i < count; ++i) {
      auto [a, b] = pairs[next_pair++];
      if (op == PairOp::implies && uniform(rng, 0, 1) == 1) std::swap(a, b);
      constraints.push_back(PairConstraint{a, b, op, q});
    }
  };
  add_pairs(p.bod_u, PairOp::iff, Quantifier::forall);
  add_pairs(p.bod_e, PairOp::iff, Quantifier::exists);
  add_pairs(p.sod_u, PairOp::exclusive, Quantifier::forall);
  add_pairs(p.sod_e, PairOp::exclusive, Quantifier::exists);
  add_pairs(p.implication, PairOp::implies, Quantifier::forall);

  auto add_distinct = [&](std::size_t count, const char* what, auto make) {
    std::size_t added = 0;
    for (std::size_t attempt = 0; added < count; ++attempt) {
      if (attempt > 1000 * (count + 1)) throw InvalidInput(std::string("cannot sample enough distinct ") + what);
      Constraint c = normalize(make());
      if (std::find(constraints.begin(), constraints.end(), c) != constraints.end()) continue;
      constraints.push_back(c);
      ++added;
    }
  };
  auto threshold = [&] { return static_cast<std::uint32_t>(uniform(rng, p.t_min, p.t_max)); };
  auto bounded_cmp = [&](std::uint32_t t) {
    auto cmp = random_cmp(rng);
    return cmp == Comparison::lt && t == 1 ? Comparison::le : cmp;
  };
  add_distinct(p.global_card, "global cardinality constraints", [&]() -> Constraint {
    const auto t = threshold();
    return GlobalCardinality{bounded_cmp(t), t};
  });
  add_distinct(p.local_card, "local cardinality constraints", [&]() -> Constraint {
    const auto t = threshold();
    return LocalCardinality{random_subset(rng, p.k, 1), bounded_cmp(t), t};
  });
  add_distinct(p.smer, "SMER constraints", [&]() -> Constraint { return Smer{random_subset(rng, p.k, 2)}; });
  add_distinct(p.team_sod, "team constraints", [&]() -> Constraint {
    while (true) {
      const auto all = random_subset(rng, p.k, 2);
      ResourceSet left, right;
      all.for_each([&](ResourceId r) { (uniform(rng, 0, 1) ? left : right).insert(r); });
      if (!left.empty() && !right.empty()) return TeamSod{left, right};
    }
  });

  InstanceFile file;
  file.instance = Instance(NameTable::numbered("u", p.n), NameTable::numbered("r", p.k),
                           AuthorizationRelation::from_rows(std::move(rows), p.k), std::move(constraints));
  file.metadata = Json::object();
  file.metadata["generator"] = params_to_json(p);
  return file;
}

Json params_to_json(const GenParams& p) {
  Json j;
  j["n"] = p.n;
  j["k"] = p.k;
  j["density"] = p.density;
  j["bod_u"] = p.bod_u;
  j["bod_e"] = p.bod_e;
  j["sod_u"] = p.sod_u;
  j["sod_e"] = p.sod_e;
  j["implication"] = p.implication;
  j["global_card"] = p.global_card;
  j["local_card"] = p.local_card;
  j["smer"] = p.smer;
  j["team_sod"] = p.team_sod;
  j["t_min"] = p.t_min;
  j["t_max"] = p.t_max;
  j["seed"] = p.seed;
  return j;
}

GenParams params_from_json(const Json& j) {
  GenParams p;
  auto get = [&](const char* key, auto& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
  };
  get("n", p.n);
  get("k", p.k);
  get("density", p.density);
  get("bod_u", p.bod_u);
  get("bod_e", p.bod_e);
  get("sod_u", p.sod_u);
  get("sod_e", p.sod_e);
  get("implication", p.implication);
  get("global_card", p.global_card);
  get("local_card", p.local_card);
  get("smer", p.smer);
  get("team_sod", p.team_sod);
  get("t_min", p.t_min);
  get("t_max", p.t_max);
  get("seed", p.seed);
  return p;
}

}  // namespace apep::io
