// Acceptance suite: one PASS/FAIL line per criterion.
//
//   apep_acceptance                 run every criterion
//   apep_acceptance --criterion 4   run one criterion

#include <chrono>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apep/oracle.hpp"
#include "apep/reduce.hpp"
#include "apep/solve.hpp"
#include "apep/verify.hpp"
#include "generate.hpp"
#include "io.hpp"
#include "support.hpp"

using namespace apep;
using apep::testing::pick;
using apep::testing::Rng;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  // Records a failed check; the first few are kept in the detail line.
  void check(bool cond, const std::string& what) {
    if (cond) return;
    if (ok || failures < 3) detail << " [" << what << "]";
    ok = false;
    ++failures;
  }
  int failures = 0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Instance load(const char* name) { return io::read_instance(apep::testing::fixture(name)).instance; }

std::string sizes(const FamilyPartition& fam) {
  std::string s;
  for (const auto& [row, users] : fam) s += (s.empty() ? "" : ",") + std::to_string(users.size());
  return "{" + s + "}";
}

// ---------------------------------------------------------------------------

void families_reduction(Outcome& out) {
  const auto t0 = Clock::now();
  const auto inst = load("families.json");
  const auto fam = partition_families(inst);
  std::multiset<std::size_t> got;
  for (const auto& [row, users] : fam) got.insert(users.size());
  out.check(got == std::multiset<std::size_t>{2, 5, 1}, "family sizes " + sizes(fam));

  const auto red = apply_reduction_rule(inst, 3);
  const auto& family = fam.at(ResourceSet{0, 1});
  bool all_from_family = true;
  for (auto u : red.trace.removed_users)
    all_from_family = all_from_family && std::count(family.begin(), family.end(), u) == 1;
  out.check(red.trace.removed_users.size() == 2 && all_from_family, "removed users");

  const bool before = brute_decide(inst).has_value();
  const bool after = brute_decide(red.reduced).has_value();
  out.check(before && after, "sat before and after");
  out.check(solve_bounded(inst).satisfiable, "solve_bounded sat");
  const double s = seconds_since(t0);
  out.check(s < 1.0, "time");
  out.detail << " families " << sizes(fam) << ", removed";
  for (auto u : red.trace.removed_users) out.detail << " " << inst.users().name(u);
  out.detail << ", " << s << " s";
}

void workflow_wsp(Outcome& out) {
  const auto t0 = Clock::now();
  const auto inst = load("workflow.json");
  const auto wsp = to_wsp(inst);
  const std::vector<std::string> steps{"s_r1_r2", "s_r1_r3", "s_r2_r1", "s_r3_r1", "s_r4"};
  out.check(wsp.step_names == steps, "step set");

  std::set<std::pair<std::size_t, std::size_t>> eq, ne;
  for (const auto& c : wsp.constraints)
    (c.equal ? eq : ne).insert({std::min(c.first, c.second), std::max(c.first, c.second)});
  out.check(eq == std::set<std::pair<std::size_t, std::size_t>>{{0, 2}, {1, 3}}, "equality constraints");
  out.check(ne == std::set<std::pair<std::size_t, std::size_t>>{{0, 4}, {1, 4}, {2, 4}}, "inequality constraints");
  out.check(wsp.constraints.size() == 5, "constraint count");

  // Rows u1..u5 over s^1_2, s^1_3, s^2_1, s^3_1, s^4.
  const int table[5][5] = {{1, 1, 1, 1, 0}, {0, 0, 0, 0, 1}, {0, 1, 0, 1, 0}, {1, 0, 1, 0, 0}, {0, 0, 0, 0, 1}};
  bool same = wsp.user_count == 5;
  for (UserId u = 0; u < 5; ++u)
    for (std::size_t s = 0; s < 5; ++s) same = same && wsp.is_authorized(s, u) == (table[u][s] == 1);
  out.check(same, "authorization table");

  const auto r = solve_bod_e_sod_u(inst);
  out.check(r.satisfiable && r.witness && check_valid(inst, *r.witness).valid, "witness valid");
  const double s = seconds_since(t0);
  out.check(s < 1.0, "time");
  out.detail << " " << wsp.step_count() << " steps, " << eq.size() << " =, " << ne.size() << " !=, " << s << " s";
}

void path_patterns(Outcome& out) {
  const auto t0 = Clock::now();
  const auto inst = load("path.json");
  const auto w = pattern_weight(inst, ResourceSet{2}, 2);
  out.check(w == 2u, "omega({r3}, u3)");
  const auto v = pattern_value(inst, {ResourceSet{0, 3}, ResourceSet{1}, ResourceSet{2}});
  out.check(v && v->value == 7, "M_P");
  const auto r = max_sod_u(inst);
  const auto best = brute_maximize(inst);
  out.check(r.max_size == 7u, "max_sod_u");
  out.check(best && best->size == 7 && r.max_size == best->size, "brute_maximize");
  const double s = seconds_since(t0);
  out.check(s < 1.0, "time");
  out.detail << " M_P = " << (v ? v->value : -1) << ", M_Sol = " << r.max_size.value_or(0) << ", oracle "
             << (best ? best->size : 0) << ", " << s << " s";
}

// ---------------------------------------------------------------------------

struct Profile {
  const char* name;
  std::function<io::GenParams(Rng&)> params;
  bool maximizes;
};

io::GenParams small(Rng& rng, std::size_t min_k) {
  io::GenParams p;
  p.n = pick(rng, 1, 6);
  p.k = pick(rng, min_k, 4);
  p.density = 0.3 + 0.1 * static_cast<double>(pick(rng, 0, 5));
  p.seed = rng();
  return p;
}

std::size_t max_pairs(const io::GenParams& p) { return p.k * (p.k - 1) / 2; }

void oracle_equivalence(Outcome& out) {
  const auto t0 = Clock::now();
  const std::vector<Profile> profiles{
      {"BoD_U", [](Rng& rng) { auto p = small(rng, 2); p.bod_u = pick(rng, 1, max_pairs(p)); return p; }, true},
      {"BoD_E", [](Rng& rng) { auto p = small(rng, 2); p.bod_e = pick(rng, 1, max_pairs(p)); return p; }, true},
      {"SoD_U", [](Rng& rng) { auto p = small(rng, 2); p.sod_u = pick(rng, 1, max_pairs(p)); return p; }, true},
      {"SoD_E", [](Rng& rng) { auto p = small(rng, 2); p.sod_e = pick(rng, 1, max_pairs(p)); return p; }, true},
      {"BoD_E+SoD_U",
       [](Rng& rng) {
         auto p = small(rng, 3);
         p.bod_e = pick(rng, 1, max_pairs(p) - 1);
         p.sod_u = pick(rng, 1, max_pairs(p) - p.bod_e);
         return p;
       },
       false},
      {"mixed",
       [](Rng& rng) {
         auto p = small(rng, 2);
         p.t_max = 3;
         p.local_card = pick(rng, 0, 1);
         p.smer = pick(rng, 0, 1);
         p.team_sod = p.local_card + p.smer == 0 ? 1 : pick(rng, 0, 1);
         p.bod_u = pick(rng, 0, 1);
         p.sod_e = max_pairs(p) > p.bod_u ? pick(rng, 0, 1) : 0;
         p.implication = max_pairs(p) > p.bod_u + p.sod_e ? pick(rng, 0, 1) : 0;
         p.global_card = pick(rng, 0, 1);
         return p;
       },
       false},
  };

  Rng rng(20240601);
  for (const auto& prof : profiles) {
    int decide_ok = 0, max_ok = 0, sat = 0;
    for (int i = 0; i < 500; ++i) {
      const auto p = prof.params(rng);
      const auto inst = io::generate(p).instance;
      const auto oracle = brute_decide(inst);
      const auto routed = dispatch(inst, Mode::decide);
      bool ok = routed.satisfiable == oracle.has_value();
      if (routed.witness) ok = ok && check_valid(inst, *routed.witness).valid;
      decide_ok += ok;
      sat += oracle.has_value();
      if (prof.maximizes) {
        const auto best = brute_maximize(inst);
        const auto m = dispatch(inst, Mode::maximize);
        max_ok += best ? (m.max_size == best->size && m.witness && check_valid(inst, *m.witness).valid)
                       : !m.satisfiable;
      }
    }
    out.check(decide_ok == 500, std::string(prof.name) + " decide");
    if (prof.maximizes) out.check(max_ok == 500, std::string(prof.name) + " maximize");
    out.detail << " " << prof.name << " " << decide_ok << "/500";
    if (prof.maximizes) out.detail << " max " << max_ok << "/500";
    out.detail << " (" << sat << " sat);";
  }
  const double s = seconds_since(t0);
  out.check(s < 300.0, "time");
  out.detail << " " << s << " s";
}

void reduction_soundness(Outcome& out) {
  Rng rng(777);
  int bodu_ok = 0, bodu_merged = 0;
  for (int i = 0; i < 500; ++i) {
    auto p = small(rng, 2);
    p.bod_u = pick(rng, 1, max_pairs(p));
    const auto rest = max_pairs(p) - p.bod_u;
    p.sod_u = rest ? pick(rng, 0, rest) : 0;
    p.bod_e = rest > p.sod_u ? pick(rng, 0, rest - p.sod_u) : 0;
    const auto inst = io::generate(p).instance;
    const auto before = brute_decide(inst).has_value();
    const auto e = eliminate_bod_u(inst);
    bool ok;
    if (e.unsatisfiable()) {
      ok = !before;
    } else {
      const auto w = brute_decide(*e.reduced);
      ok = w.has_value() == before && (!w || check_valid(inst, lift(inst, e.trace, *w)).valid);
      bodu_merged += e.reduced->resource_count() < inst.resource_count();
    }
    bodu_ok += ok;
  }

  int rule_ok = 0, shrunk = 0;
  for (int i = 0; i < 500; ++i) {
    // Rows drawn from two prototypes so families exceed the threshold.
    const std::size_t n = pick(rng, 2, 6), k = pick(rng, 1, 4);
    const auto proto = apep::testing::random_base(rng, 2, k, 0.6);
    std::vector<ResourceSet> rows;
    for (std::size_t u = 0; u < n; ++u) rows.push_back(proto.row(static_cast<UserId>(pick(rng, 0, 1))));
    for (ResourceId r = 0; r < k; ++r)
      if (std::none_of(rows.begin(), rows.end(), [&](ResourceSet s) { return s.contains(r); })) rows[0].insert(r);
    std::vector<Constraint> cs;
    if (k >= 2)
      for (std::size_t j = pick(rng, 1, 2); j > 0; --j) cs.push_back(normalize(apep::testing::random_constraint(rng, k, 2)));
    const auto inst = Instance::anonymous(AuthorizationRelation::from_rows(rows, k), cs);
    const auto red = apply_reduction_rule(inst, instance_bound(inst));
    const auto before = brute_decide(inst).has_value();
    const auto w = brute_decide(red.reduced);
    rule_ok += w.has_value() == before && (!w || check_valid(inst, lift(inst, red.trace, *w)).valid);
    shrunk += !red.trace.removed_users.empty();
  }
  out.check(bodu_ok == 500, "eliminate_bod_u");
  out.check(rule_ok == 500, "apply_reduction_rule");
  out.detail << " eliminate_bod_u " << bodu_ok << "/500 (" << bodu_merged << " merged), apply_reduction_rule "
             << rule_ok << "/500 (" << shrunk << " shrunk)";
}

// ---------------------------------------------------------------------------

// Every normalized single constraint over k resources with thresholds up to n + 1.
std::vector<Constraint> all_constraints(std::size_t k, std::size_t n) {
  std::vector<Constraint> out;
  for (ResourceId a = 0; a < k; ++a)
    for (ResourceId b = 0; b < k; ++b) {
      if (a == b) continue;
      for (auto op : {PairOp::iff, PairOp::exclusive, PairOp::implies})
        for (auto q : {Quantifier::forall, Quantifier::exists}) {
          if (op == PairOp::implies && q == Quantifier::exists) continue;
          if (op != PairOp::implies && a > b) continue;
          out.push_back(PairConstraint{a, b, op, q});
        }
    }
  const auto t_max = static_cast<std::uint32_t>(n + 1);
  for (auto cmp : {Comparison::le, Comparison::eq, Comparison::ge})
    for (std::uint32_t t = 1; t <= t_max; ++t) {
      out.push_back(GlobalCardinality{cmp, t});
      for (std::uint64_t m = 1; m < (std::uint64_t{1} << k); ++m) out.push_back(LocalCardinality{ResourceSet(m), cmp, t});
    }
  for (std::uint64_t m = 1; m < (std::uint64_t{1} << k); ++m) {
    if (std::popcount(m) >= 2) out.push_back(Smer{ResourceSet(m)});
    for (std::uint64_t l = m; l != 0; l = (l - 1) & m)
      if (l != m) out.push_back(TeamSod{ResourceSet(l), ResourceSet(m & ~l)});
  }
  return out;
}

// Visits one relation per multiset of user rows: cores are user-independent,
// so the order of the rows does not change the core size.
void for_each_row_multiset(std::size_t n, std::size_t k, const std::function<void(const AuthorizationRelation&)>& fn) {
  std::vector<ResourceSet> rows(n);
  const std::uint64_t top = std::uint64_t{1} << k;
  std::function<void(std::size_t, std::uint64_t)> go = [&](std::size_t i, std::uint64_t from) {
    if (i == n) {
      fn(AuthorizationRelation::from_rows(rows, k));
      return;
    }
    for (std::uint64_t m = from; m < top; ++m) {
      rows[i] = ResourceSet(m);
      go(i + 1, m);
    }
  };
  go(0, 0);
}

std::size_t largest_core(const Instance& inst) {
  std::size_t best = 0;
  for_each_row_multiset(inst.user_count(), inst.resource_count(), [&](const AuthorizationRelation& a) {
    if (check_valid(inst, a).valid) best = std::max(best, compute_core(inst, a).size());
  });
  return best;
}

void boundedness(Outcome& out) {
  const auto t0 = Clock::now();
  std::size_t instances = 0, relations = 0, violations = 0;
  for (std::size_t k = 1; k <= 3; ++k)
    for (std::size_t n = 1; n <= 5; ++n) {
      const auto base = AuthorizationRelation::full(n, k);
      for (const auto& c : all_constraints(k, n)) {
        const auto inst = Instance::anonymous(base, {c});
        const auto bound = bound_for(c, k).bound;
        ++instances;
        for_each_row_multiset(n, k, [&](const AuthorizationRelation& a) {
          if (!check_valid(inst, a).valid) return;
          ++relations;
          if (compute_core(inst, a).size() > bound) {
            if (violations++ == 0) out.detail << " violation: " << describe(c, inst.resources()) << ";";
          }
        });
      }
    }
  out.check(violations == 0, "core above bound_for");
  out.detail << " " << instances << " instances, " << relations << " valid relations, " << violations
             << " over bound;";

  // One instance per table row, searched exhaustively for its largest core.
  struct Row {
    std::string name;
    Instance inst;
    std::uint64_t expected;
  };
  const std::size_t k = 3;
  const std::uint32_t t = 2;
  const auto wide = AuthorizationRelation::full(5, k);
  const std::vector<Row> rows{
      {"(r,r',xor,*)", Instance::anonymous(wide, {PairConstraint{0, 1, PairOp::exclusive, Quantifier::forall}}), k},
      {"(r,r',iff,*),(r,r',->,forall)", Instance::anonymous(wide, {PairConstraint{0, 1, PairOp::iff, Quantifier::forall}}),
       k - 1},
      {"(R',<=,t)", Instance::anonymous(wide, {LocalCardinality{{0, 1}, Comparison::le, t}}), k},
      {"(R',=,t),(R',>=,t)", Instance::anonymous(wide, {LocalCardinality{{0}, Comparison::ge, t}}),
       2 * std::max<std::uint64_t>(k, t)},
  };
  for (const auto& row : rows) {
    const auto got = largest_core(row.inst);
    out.check(got == row.expected, row.name + " attains " + std::to_string(got) + ", table " +
                                       std::to_string(row.expected));
    out.detail << " " << row.name << " " << got << "/" << row.expected << ";";
  }
  out.detail << " " << seconds_since(t0) << " s";
}

void partition_cross_check(Outcome& out) {
  Rng rng(4242);
  int equal = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t k = pick(rng, 1, 10), p = pick(rng, 1, 4);
    std::vector<SubsetTable> fs(p, SubsetTable(std::size_t{1} << k));
    for (auto& f : fs) {
      f[0] = 0;
      for (std::size_t m = 1; m < f.size(); ++m) f[m] = static_cast<std::int64_t>(pick(rng, 0, 60)) - 20;
    }
    const auto slow = max_weighted_partition(k, fs);
    const auto fast = max_weighted_partition_fast(k, fs);
    std::int64_t realized = 0;
    for (std::size_t j = 0; j < p; ++j) realized += fs[j][fast.parts[j].bits()];
    equal += slow.value == fast.value && realized == fast.value;
  }
  out.check(equal == 200, "fast != reference");
  out.detail << " " << equal << "/200 tables equal";
}

void fpt_smoke(Outcome& out) {
  double worst_sodu = 0.0, worst_bounded = 0.0;
  std::uint64_t most_patterns = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    io::GenParams p;
    p.n = 1000;
    p.k = 6;
    p.density = 0.5;
    p.sod_u = 5;
    p.seed = seed;
    const auto inst = io::generate(p).instance;
    const auto t0 = Clock::now();
    const auto r = max_sod_u(inst);
    const double s = seconds_since(t0);
    worst_sodu = std::max(worst_sodu, s);
    most_patterns = std::max(most_patterns, r.counters.patterns_explored);
    out.check(s < 10.0, "max_sod_u time");
    out.check(r.counters.patterns_explored <= 203, "pattern count");
    out.check(!r.witness || check_valid(inst, *r.witness).valid, "max_sod_u witness");
  }
  std::size_t kernel_users = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    io::GenParams p;
    p.n = 10000;
    p.k = 3;
    p.density = 0.5;
    p.sod_u = 1;
    p.sod_e = 1;
    p.local_card = 1;
    p.smer = 1;
    p.t_max = 3;
    p.seed = seed;
    const auto inst = io::generate(p).instance;
    const auto t0 = Clock::now();
    const auto r = solve_bounded(inst);
    const double s = seconds_since(t0);
    worst_bounded = std::max(worst_bounded, s);
    kernel_users = std::max<std::size_t>(kernel_users, inst.user_count() - r.counters.users_removed);
    out.check(s < 5.0, "solve_bounded time");
    out.check(!r.witness || check_valid(inst, *r.witness).valid, "solve_bounded witness");
  }
  out.detail << " max_sod_u worst " << worst_sodu << " s (" << most_patterns << " patterns), solve_bounded worst "
             << worst_bounded << " s (kernel <= " << kernel_users << " users)";
}

void resiliency(Outcome& out) {
  const auto a = AuthorizationRelation::from_rows({{0, 1}, {0, 1}}, 2);
  const auto users = NameTable::numbered("u", 2);
  const NameTable q({"q1", "q2"});
  for (std::uint32_t d : {2u, 3u}) {
    const auto enc = encode_resiliency(users, q, a, {ResourceSet{0, 1}, d, 1});
    const bool expected = d == 2;
    out.check(enc.instance.has_value(), "encoding");
    if (!enc.instance) continue;
    const auto r = dispatch(*enc.instance, Mode::decide);
    const bool oracle = brute_decide(*enc.instance).has_value();
    out.check(r.satisfiable == expected && oracle == expected, "d=" + std::to_string(d));
    out.detail << " d=" << d << ": " << (r.satisfiable ? "sat" : "unsat") << " via " << r.algorithm << ", oracle "
               << (oracle ? "sat" : "unsat") << ";";
  }
}

bool complete(const AuthorizationRelation& a) {
  for (ResourceId r = 0; r < a.resource_count(); ++r)
    if (a.column(r).empty()) return false;
  return true;
}

void user_independence(Outcome& out) {
  Rng rng(99);
  const std::vector<std::pair<Species, std::function<Constraint(std::size_t)>>> species{
      {Species::bod_u, [&](std::size_t k) { auto [a, b] = apep::testing::random_pair(rng, k); return Constraint(PairConstraint{a, b, PairOp::iff, Quantifier::forall}); }},
      {Species::bod_e, [&](std::size_t k) { auto [a, b] = apep::testing::random_pair(rng, k); return Constraint(PairConstraint{a, b, PairOp::iff, Quantifier::exists}); }},
      {Species::sod_u, [&](std::size_t k) { auto [a, b] = apep::testing::random_pair(rng, k); return Constraint(PairConstraint{a, b, PairOp::exclusive, Quantifier::forall}); }},
      {Species::sod_e, [&](std::size_t k) { auto [a, b] = apep::testing::random_pair(rng, k); return Constraint(PairConstraint{a, b, PairOp::exclusive, Quantifier::exists}); }},
      {Species::implication, [&](std::size_t k) { auto [a, b] = apep::testing::random_pair(rng, k); return Constraint(PairConstraint{a, b, PairOp::implies, Quantifier::forall}); }},
      {Species::global_card, [&](std::size_t) { return Constraint(GlobalCardinality{Comparison::le, static_cast<std::uint32_t>(pick(rng, 1, 3))}); }},
      {Species::local_card, [&](std::size_t k) { return Constraint(LocalCardinality{apep::testing::random_set(rng, k), Comparison::ge, static_cast<std::uint32_t>(pick(rng, 1, 4))}); }},
      {Species::smer, [&](std::size_t k) { return Constraint(Smer{apep::testing::random_set(rng, k, 2)}); }},
      {Species::team_sod, [&](std::size_t k) {
         const auto [a, b] = apep::testing::random_pair(rng, k);
         return Constraint(TeamSod{ResourceSet::single(a), ResourceSet::single(b)});
       }},
  };
  std::size_t failures = 0, truths = 0;
  for (const auto& [sp, make] : species) {
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = pick(rng, 1, 5), k = pick(rng, 2, 4);
      AuthorizationRelation a;
      do {
        a = apep::testing::random_subrelation(rng, AuthorizationRelation::full(n, k), 0.5);
      } while (!complete(a));
      const auto c = make(k);
      if (species_of(c) != sp) ++failures;
      std::vector<UserId> sigma(n);
      std::iota(sigma.begin(), sigma.end(), 0);
      std::shuffle(sigma.begin(), sigma.end(), rng);
      const bool before = eval_constraint(a, c);
      truths += before;
      if (before != user_independence_witness(a, c, sigma)) ++failures;
    }
  }
  out.check(failures == 0, std::to_string(failures) + " failures");
  out.detail << " " << species.size() * 1000 << " triples, " << failures << " failures (" << truths
             << " true before permuting)";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"families example and reduction rule", families_reduction},
      {"workflow example WSP construction", workflow_wsp},
      {"path example pattern value and maximum", path_patterns},
      {"oracle equivalence per constraint profile", oracle_equivalence},
      {"reduction soundness", reduction_soundness},
      {"core boundedness", boundedness},
      {"partition DP cross-check", partition_cross_check},
      {"FPT smoke test", fpt_smoke},
      {"resiliency encoding", resiliency},
      {"user independence", user_independence},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome out;
    try {
      criteria[i].second(out);
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    failed += !out.ok;
    std::cout << (out.ok ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "):" << out.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
