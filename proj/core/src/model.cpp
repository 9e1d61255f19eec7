#include "apep/model.hpp"

#include <algorithm>
#include <sstream>

#include "apep/error.hpp"
#include "overloaded.hpp"

namespace apep {

using detail::overloaded;

// ---------------------------------------------------------------------------
// NameTable

NameTable::NameTable(std::vector<std::string> names) : names_(std::move(names)) {
  index_.reserve(names_.size());
  for (std::uint32_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw InvalidInput("empty name at index " + std::to_string(i));
    if (!index_.emplace(names_[i], i).second) throw InvalidInput("duplicate name '" + names_[i] + "'");
  }
}

NameTable NameTable::numbered(std::string_view prefix, std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) names.push_back(std::string(prefix) + std::to_string(i));
  return NameTable(std::move(names));
}

std::optional<std::uint32_t> NameTable::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// AuthorizationRelation

AuthorizationRelation::AuthorizationRelation(std::size_t users, std::size_t resources)
    : rows_(users), resources_(resources) {
  if (resources > kMaxResources) throw InvalidInput("at most 64 resources are supported");
}

AuthorizationRelation AuthorizationRelation::from_rows(std::vector<ResourceSet> rows, std::size_t resources) {
  AuthorizationRelation a(0, resources);
  const auto universe = ResourceSet::full(resources);
  for (std::size_t u = 0; u < rows.size(); ++u)
    if (!universe.contains(rows[u])) throw InvalidInput("row of user " + std::to_string(u) + " exceeds resource range");
  a.rows_ = std::move(rows);
  return a;
}

AuthorizationRelation AuthorizationRelation::full(std::size_t users, std::size_t resources) {
  return from_rows(std::vector<ResourceSet>(users, ResourceSet::full(resources)), resources);
}

std::vector<UserId> AuthorizationRelation::column(ResourceId r) const {
  std::vector<UserId> out;
  for (UserId u = 0; u < rows_.size(); ++u)
    if (rows_[u].contains(r)) out.push_back(u);
  return out;
}

std::vector<UserId> AuthorizationRelation::users_of(ResourceSet scope) const {
  std::vector<UserId> out;
  for (UserId u = 0; u < rows_.size(); ++u)
    if (rows_[u].intersects(scope)) out.push_back(u);
  return out;
}

ResourceSet AuthorizationRelation::resources_of(std::span<const UserId> users) const {
  ResourceSet out;
  for (auto u : users) out |= row(u);
  return out;
}

void AuthorizationRelation::insert(UserId u, ResourceId r) {
  if (u >= rows_.size() || r >= resources_) throw InvalidInput("pair outside the relation's universe");
  rows_[u].insert(r);
}

void AuthorizationRelation::erase(UserId u, ResourceId r) {
  if (u >= rows_.size() || r >= resources_) throw InvalidInput("pair outside the relation's universe");
  rows_[u].erase(r);
}

void AuthorizationRelation::set_row(UserId u, ResourceSet row) {
  if (u >= rows_.size() || !ResourceSet::full(resources_).contains(row))
    throw InvalidInput("row outside the relation's universe");
  rows_[u] = row;
}

std::size_t AuthorizationRelation::size() const {
  std::size_t total = 0;
  for (auto row : rows_) total += row.size();
  return total;
}

bool AuthorizationRelation::subset_of(const AuthorizationRelation& other) const {
  if (rows_.size() != other.rows_.size()) return false;
  for (std::size_t u = 0; u < rows_.size(); ++u)
    if (!other.rows_[u].contains(rows_[u])) return false;
  return true;
}

AuthorizationRelation AuthorizationRelation::without_user(UserId v) const {
  auto copy = *this;
  copy.rows_.at(v) = ResourceSet{};
  return copy;
}

std::vector<std::pair<UserId, ResourceId>> AuthorizationRelation::pairs() const {
  std::vector<std::pair<UserId, ResourceId>> out;
  for (UserId u = 0; u < rows_.size(); ++u) rows_[u].for_each([&](ResourceId r) { out.emplace_back(u, r); });
  return out;
}

// ---------------------------------------------------------------------------
// Constraints

std::string_view to_string(Species s) {
  switch (s) {
    case Species::bod_u: return "bod_u";
    case Species::bod_e: return "bod_e";
    case Species::sod_u: return "sod_u";
    case Species::sod_e: return "sod_e";
    case Species::implication: return "implication";
    case Species::global_card: return "global_card";
    case Species::local_card: return "local_card";
    case Species::smer: return "smer";
    case Species::team_sod: return "team_sod";
  }
  return "?";
}

std::string_view to_string(PairOp op) {
  switch (op) {
    case PairOp::iff: return "iff";
    case PairOp::implies: return "implies";
    case PairOp::implied_by: return "implied_by";
    case PairOp::exclusive: return "xor";
  }
  return "?";
}

std::string_view to_string(Quantifier q) { return q == Quantifier::forall ? "forall" : "exists"; }

std::string_view to_string(Comparison cmp) {
  switch (cmp) {
    case Comparison::lt: return "<";
    case Comparison::le: return "<=";
    case Comparison::eq: return "=";
    case Comparison::ge: return ">=";
    case Comparison::gt: return ">";
  }
  return "?";
}

namespace {

void check_scope(ResourceSet scope, std::size_t resources, const char* what) {
  if (scope.empty()) throw InvalidInput(std::string(what) + " scope must be non-empty");
  if (!ResourceSet::full(resources).contains(scope)) throw InvalidInput(std::string(what) + " scope references an unknown resource");
}

}  // namespace

void validate_constraint(const Constraint& c, std::size_t resources) {
  std::visit(overloaded{
                 [&](const PairConstraint& p) {
                   if (p.first >= resources || p.second >= resources)
                     throw InvalidInput("pair constraint references an unknown resource");
                   if (p.first == p.second) throw InvalidInput("pair constraint needs two distinct resources");
                 },
                 [&](const GlobalCardinality& g) {
                   if (g.t < 1) throw InvalidInput("cardinality bound t must be at least 1");
                 },
                 [&](const LocalCardinality& l) {
                   if (l.t < 1) throw InvalidInput("cardinality bound t must be at least 1");
                   check_scope(l.scope, resources, "local cardinality");
                 },
                 [&](const Smer& s) {
                   check_scope(s.scope, resources, "smer");
                   if (s.scope.size() < 2) throw InvalidInput("smer scope needs at least two resources");
                 },
                 [&](const TeamSod& t) {
                   check_scope(t.left, resources, "team_sod left");
                   check_scope(t.right, resources, "team_sod right");
                   if (t.left.intersects(t.right)) throw InvalidInput("team_sod sides must be disjoint");
                 },
             },
             c);
}

namespace {

void normalize_bound(Comparison& cmp, std::uint32_t& t) {
  if (cmp == Comparison::gt) {
    cmp = Comparison::ge;
    t += 1;
  } else if (cmp == Comparison::lt) {
    if (t <= 1) throw InvalidInput("cardinality (<, 1) cannot hold on a complete relation");
    cmp = Comparison::le;
    t -= 1;
  }
}

}  // namespace

Constraint normalize(const Constraint& c) {
  return std::visit(overloaded{
                        [](PairConstraint p) -> Constraint {
                          if (p.op == PairOp::implied_by) {
                            std::swap(p.first, p.second);
                            p.op = PairOp::implies;
                          }
                          // Both sides are non-empty on complete relations, so an
                          // existential implication is just a shared user.
                          if (p.op == PairOp::implies && p.quant == Quantifier::exists) p.op = PairOp::iff;
                          return p;
                        },
                        [](GlobalCardinality g) -> Constraint {
                          normalize_bound(g.cmp, g.t);
                          return g;
                        },
                        [](LocalCardinality l) -> Constraint {
                          normalize_bound(l.cmp, l.t);
                          return l;
                        },
                        [](const auto& other) -> Constraint { return other; },
                    },
                    c);
}

Species species_of(const Constraint& c) {
  const auto n = normalize(c);
  return std::visit(overloaded{
                        [](const PairConstraint& p) {
                          const bool forall = p.quant == Quantifier::forall;
                          switch (p.op) {
                            case PairOp::iff: return forall ? Species::bod_u : Species::bod_e;
                            case PairOp::exclusive: return forall ? Species::sod_u : Species::sod_e;
                            default: return Species::implication;
                          }
                        },
                        [](const GlobalCardinality&) { return Species::global_card; },
                        [](const LocalCardinality&) { return Species::local_card; },
                        [](const Smer&) { return Species::smer; },
                        [](const TeamSod&) { return Species::team_sod; },
                    },
                    n);
}

bool compare(std::size_t value, Comparison cmp, std::uint32_t t) {
  switch (cmp) {
    case Comparison::lt: return value < t;
    case Comparison::le: return value <= t;
    case Comparison::eq: return value == t;
    case Comparison::ge: return value >= t;
    case Comparison::gt: return value > t;
  }
  return false;
}

namespace {

bool eval_pair(const AuthorizationRelation& a, const PairConstraint& p) {
  ResourceId lhs = p.first;
  ResourceId rhs = p.second;
  PairOp op = p.op;
  if (op == PairOp::implied_by) {
    std::swap(lhs, rhs);
    op = PairOp::implies;
  }
  // An existential implication reads as a shared user, like normalize().
  if (op == PairOp::implies && p.quant == Quantifier::exists) op = PairOp::iff;
  // Scan the users of A(lhs) ∪ A(rhs) and evaluate the propositional operator.
  bool any_true = false;
  bool all_true = true;
  for (auto row : a.rows()) {
    const bool in_l = row.contains(lhs);
    const bool in_r = row.contains(rhs);
    if (!in_l && !in_r) continue;
    bool value = false;
    switch (op) {
      case PairOp::iff: value = in_l == in_r; break;
      case PairOp::implies: value = !in_l || in_r; break;
      case PairOp::exclusive: value = in_l != in_r; break;
      case PairOp::implied_by: break;
    }
    any_true = any_true || value;
    all_true = all_true && value;
  }
  return p.quant == Quantifier::forall ? all_true : any_true;
}

}  // namespace

bool eval_constraint(const AuthorizationRelation& a, const Constraint& c) {
  return std::visit(overloaded{
                        [&](const PairConstraint& p) { return eval_pair(a, p); },
                        [&](const GlobalCardinality& g) {
                          std::vector<std::size_t> counts(a.resource_count(), 0);
                          for (auto row : a.rows()) row.for_each([&](ResourceId r) { ++counts[r]; });
                          return std::all_of(counts.begin(), counts.end(),
                                             [&](std::size_t n) { return compare(n, g.cmp, g.t); });
                        },
                        [&](const LocalCardinality& l) {
                          return compare(a.users_of(l.scope).size(), l.cmp, l.t);
                        },
                        [&](const Smer& s) {
                          return std::none_of(a.rows().begin(), a.rows().end(),
                                              [&](ResourceSet row) { return row.contains(s.scope); });
                        },
                        [&](const TeamSod& t) {
                          return std::none_of(a.rows().begin(), a.rows().end(), [&](ResourceSet row) {
                            return row.intersects(t.left) && row.intersects(t.right);
                          });
                        },
                    },
                    c);
}

AuthorizationRelation permute_users(const AuthorizationRelation& a, std::span<const UserId> sigma) {
  const auto n = a.user_count();
  if (sigma.size() != n) throw InvalidInput("permutation size does not match the user count");
  std::vector<bool> seen(n, false);
  for (auto image : sigma) {
    if (image >= n || seen[image]) throw InvalidInput("user map is not a bijection");
    seen[image] = true;
  }
  std::vector<ResourceSet> rows(n);
  for (UserId u = 0; u < n; ++u) rows[sigma[u]] = a.row(u);
  return AuthorizationRelation::from_rows(std::move(rows), a.resource_count());
}

bool user_independence_witness(const AuthorizationRelation& a, const Constraint& c,
                               std::span<const UserId> sigma) {
  return eval_constraint(permute_users(a, sigma), c);
}

// ---------------------------------------------------------------------------
// Instance

Instance::Instance(NameTable users, NameTable resources, AuthorizationRelation base,
                   std::vector<Constraint> constraints)
    : users_(std::move(users)),
      resources_(std::move(resources)),
      base_(std::move(base)),
      constraints_(std::move(constraints)) {
  if (resources_.size() > kMaxResources) throw InvalidInput("at most 64 resources are supported");
  if (base_.user_count() != users_.size() || base_.resource_count() != resources_.size())
    throw InvalidInput("base relation dimensions do not match the user and resource tables");
  std::vector<bool> covered(resources_.size(), false);
  for (auto row : base_.rows()) row.for_each([&](ResourceId r) { covered[r] = true; });
  for (ResourceId r = 0; r < covered.size(); ++r)
    if (!covered[r]) throw InvalidInput("resource '" + resources_.name(r) + "' has no base-authorized user");
  for (const auto& c : constraints_) validate_constraint(c, resources_.size());
}

Instance Instance::anonymous(AuthorizationRelation base, std::vector<Constraint> constraints) {
  auto users = NameTable::numbered("u", base.user_count());
  auto resources = NameTable::numbered("r", base.resource_count());
  return Instance(std::move(users), std::move(resources), std::move(base), std::move(constraints));
}

Instance Instance::with_base(AuthorizationRelation base) const {
  return Instance(users_, resources_, std::move(base), constraints_);
}

Instance Instance::with_constraints(std::vector<Constraint> constraints) const {
  return Instance(users_, resources_, base_, std::move(constraints));
}

Instance normalized(const Instance& inst) {
  std::vector<Constraint> cs;
  cs.reserve(inst.constraints().size());
  for (const auto& c : inst.constraints()) cs.push_back(normalize(c));
  return inst.with_constraints(std::move(cs));
}

namespace {

std::string set_string(ResourceSet s, const NameTable& resources) {
  std::string out = "{";
  bool first = true;
  s.for_each([&](ResourceId r) {
    if (!first) out += ",";
    out += resources.name(r);
    first = false;
  });
  return out + "}";
}

}  // namespace

std::string describe(const Constraint& c, const NameTable& resources) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const PairConstraint& p) {
                   os << "(" << resources.name(p.first) << ", " << resources.name(p.second) << ", "
                      << to_string(p.op) << ", " << to_string(p.quant) << ")";
                 },
                 [&](const GlobalCardinality& g) { os << "(" << to_string(g.cmp) << ", " << g.t << ")"; },
                 [&](const LocalCardinality& l) {
                   os << "(" << set_string(l.scope, resources) << ", " << to_string(l.cmp) << ", " << l.t << ")";
                 },
                 [&](const Smer& s) { os << "smer" << set_string(s.scope, resources); },
                 [&](const TeamSod& t) {
                   os << "team_sod(" << set_string(t.left, resources) << ", " << set_string(t.right, resources) << ")";
                 },
             },
             c);
  return os.str();
}

}  // namespace apep
