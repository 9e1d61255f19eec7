#include "io.hpp"

#include <array>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace apep::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string child(const std::string& pointer, std::string_view key) { return pointer + "/" + std::string(key); }
std::string child(const std::string& pointer, std::size_t index) { return pointer + "/" + std::to_string(index); }

const Json& field(const Json& obj, const std::string& pointer, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(pointer, std::string("missing field '") + key + "'");
  return *it;
}

std::string as_string(const Json& j, const std::string& pointer) {
  if (!j.is_string()) throw FormatError(pointer, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> as_names(const Json& j, const std::string& pointer) {
  if (!j.is_array()) throw FormatError(pointer, "expected an array of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], child(pointer, i)));
  return out;
}

NameTable as_table(const Json& j, const std::string& pointer) {
  auto names = as_names(j, pointer);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) throw FormatError(child(pointer, i), "empty name");
    if (!seen.insert(names[i]).second) throw FormatError(child(pointer, i), "duplicate name '" + names[i] + "'");
  }
  return NameTable(std::move(names));
}

ResourceId resource_ref(const Json& j, const std::string& pointer, const NameTable& resources) {
  const auto name = as_string(j, pointer);
  auto r = resources.find(name);
  if (!r) throw FormatError(pointer, "unknown resource '" + name + "'");
  return *r;
}

ResourceSet resource_set(const Json& j, const std::string& pointer, const NameTable& resources) {
  if (!j.is_array()) throw FormatError(pointer, "expected an array of resource names");
  ResourceSet out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto r = resource_ref(j[i], child(pointer, i), resources);
    if (out.contains(r)) throw FormatError(child(pointer, i), "resource listed twice");
    out.insert(r);
  }
  return out;
}

std::uint32_t as_threshold(const Json& j, const std::string& pointer) {
  if (!j.is_number_integer()) throw FormatError(pointer, "expected an integer");
  const auto t = j.get<std::int64_t>();
  if (t < 1 || t > std::numeric_limits<std::uint32_t>::max()) throw FormatError(pointer, "t must be a positive integer");
  return static_cast<std::uint32_t>(t);
}

template <typename Enum, std::size_t N>
Enum as_enum(const Json& j, const std::string& pointer, const std::array<std::pair<const char*, Enum>, N>& table) {
  const auto s = as_string(j, pointer);
  for (const auto& [name, value] : table)
    if (s == name) return value;
  std::string allowed;
  for (const auto& [name, value] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw FormatError(pointer, "unknown value '" + s + "' (expected one of " + allowed + ")");
}

constexpr std::array<std::pair<const char*, PairOp>, 4> kOps{{
    {"iff", PairOp::iff},
    {"implies", PairOp::implies},
    {"implied_by", PairOp::implied_by},
    {"xor", PairOp::exclusive},
}};
constexpr std::array<std::pair<const char*, Quantifier>, 2> kQuants{{
    {"forall", Quantifier::forall},
    {"exists", Quantifier::exists},
}};
constexpr std::array<std::pair<const char*, Comparison>, 5> kCmps{{
    {"<", Comparison::lt},
    {"<=", Comparison::le},
    {"=", Comparison::eq},
    {">=", Comparison::ge},
    {">", Comparison::gt},
}};

template <typename Enum, std::size_t N>
const char* enum_name(Enum e, const std::array<std::pair<const char*, Enum>, N>& table) {
  for (const auto& [name, value] : table)
    if (value == e) return name;
  return "?";
}

Json names_of(ResourceSet s, const NameTable& resources) {
  Json out = Json::array();
  s.for_each([&](ResourceId r) { out.push_back(resources.name(r)); });
  return out;
}

// Splits `obj` into known fields and the rest; strict mode rejects the rest.
Json leftovers(const Json& obj, const std::string& pointer, std::initializer_list<const char*> known, bool strict) {
  Json extra = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (ok) continue;
    if (strict) throw FormatError(child(pointer, it.key()), "unknown field");
    extra[it.key()] = it.value();
  }
  return extra;
}

std::pair<Constraint, Json> parse_constraint(const Json& j, const std::string& pointer, const NameTable& resources,
                                             bool strict) {
  if (!j.is_object()) throw FormatError(pointer, "expected a constraint object");
  const auto type = as_string(field(j, pointer, "type"), child(pointer, "type"));
  Constraint c;
  Json extra;
  if (type == "pair") {
    PairConstraint p;
    p.first = resource_ref(field(j, pointer, "r"), child(pointer, "r"), resources);
    p.second = resource_ref(field(j, pointer, "r2"), child(pointer, "r2"), resources);
    p.op = as_enum(field(j, pointer, "op"), child(pointer, "op"), kOps);
    p.quant = as_enum(field(j, pointer, "quant"), child(pointer, "quant"), kQuants);
    c = p;
    extra = leftovers(j, pointer, {"type", "r", "r2", "op", "quant"}, strict);
  } else if (type == "global_card") {
    GlobalCardinality g;
    g.cmp = as_enum(field(j, pointer, "cmp"), child(pointer, "cmp"), kCmps);
    g.t = as_threshold(field(j, pointer, "t"), child(pointer, "t"));
    c = g;
    extra = leftovers(j, pointer, {"type", "cmp", "t"}, strict);
  } else if (type == "local_card") {
    LocalCardinality l;
    l.scope = resource_set(field(j, pointer, "scope"), child(pointer, "scope"), resources);
    l.cmp = as_enum(field(j, pointer, "cmp"), child(pointer, "cmp"), kCmps);
    l.t = as_threshold(field(j, pointer, "t"), child(pointer, "t"));
    c = l;
    extra = leftovers(j, pointer, {"type", "scope", "cmp", "t"}, strict);
  } else if (type == "smer") {
    c = Smer{resource_set(field(j, pointer, "scope"), child(pointer, "scope"), resources)};
    extra = leftovers(j, pointer, {"type", "scope"}, strict);
  } else if (type == "team_sod") {
    c = TeamSod{resource_set(field(j, pointer, "left"), child(pointer, "left"), resources),
                resource_set(field(j, pointer, "right"), child(pointer, "right"), resources)};
    extra = leftovers(j, pointer, {"type", "left", "right"}, strict);
  } else {
    throw FormatError(child(pointer, "type"), "unknown constraint type '" + type + "'");
  }

  try {
    validate_constraint(c, resources.size());
    c = normalize(c);
  } catch (const InvalidInput& e) {
    throw FormatError(pointer, e.what());
  }
  return {c, extra};
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("", std::string("malformed JSON: ") + e.what());
  }
}

void check_schema(const Json& doc) {
  if (!doc.is_object()) throw FormatError("", "expected a JSON object");
  const auto& schema = field(doc, "", "schema");
  if (!schema.is_number_integer() || schema.get<int>() != kSchemaVersion)
    throw FormatError("/schema", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
}

}  // namespace

InstanceFile parse_instance(std::string_view text, bool strict) {
  const auto doc = parse_json(text);
  check_schema(doc);

  auto users = as_table(field(doc, "", "users"), "/users");
  auto resources = as_table(field(doc, "", "resources"), "/resources");
  if (resources.size() > kMaxResources) throw FormatError("/resources", "at most 64 resources are supported");

  const auto& base_json = field(doc, "", "base");
  if (!base_json.is_object()) throw FormatError("/base", "expected an object of per-user resource lists");
  std::vector<ResourceSet> rows(users.size());
  for (auto it = base_json.begin(); it != base_json.end(); ++it) {
    const auto pointer = child("/base", it.key());
    auto u = users.find(it.key());
    if (!u) throw FormatError(pointer, "unknown user '" + it.key() + "'");
    rows[*u] = resource_set(it.value(), pointer, resources);
  }
  auto base = AuthorizationRelation::from_rows(std::move(rows), resources.size());
  for (ResourceId r = 0; r < resources.size(); ++r)
    if (base.column(r).empty())
      throw FormatError("/base", "resource '" + resources.name(r) + "' has no base-authorized user");

  InstanceFile file;
  std::vector<Constraint> constraints;
  if (auto it = doc.find("constraints"); it != doc.end()) {
    if (!it->is_array()) throw FormatError("/constraints", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      auto [c, extra] = parse_constraint((*it)[i], child("/constraints", i), resources, strict);
      constraints.push_back(c);
      file.constraint_extra.push_back(std::move(extra));
    }
  }
  if (auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) throw FormatError("/metadata", "expected an object");
    file.metadata = *it;
  }
  file.extra = leftovers(doc, "", {"schema", "users", "resources", "base", "constraints", "metadata"}, strict);
  file.instance = Instance(std::move(users), std::move(resources), std::move(base), std::move(constraints));
  return file;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

InstanceFile read_instance(const std::filesystem::path& path, bool strict) {
  const auto text = read_text(path);
  try {
    return parse_instance(text, strict);
  } catch (const FormatError& e) {
    throw FormatError(e.pointer(), e.message() + " (in " + path.string() + ")");
  }
}

Json constraint_to_json(const Constraint& c, const NameTable& resources) {
  Json j;
  std::visit(overloaded{
                 [&](const PairConstraint& p) {
                   j["type"] = "pair";
                   j["r"] = resources.name(p.first);
                   j["r2"] = resources.name(p.second);
                   j["op"] = enum_name(p.op, kOps);
                   j["quant"] = enum_name(p.quant, kQuants);
                 },
                 [&](const GlobalCardinality& g) {
                   j["type"] = "global_card";
                   j["cmp"] = enum_name(g.cmp, kCmps);
                   j["t"] = g.t;
                 },
                 [&](const LocalCardinality& l) {
                   j["type"] = "local_card";
                   j["scope"] = names_of(l.scope, resources);
                   j["cmp"] = enum_name(l.cmp, kCmps);
                   j["t"] = l.t;
                 },
                 [&](const Smer& s) {
                   j["type"] = "smer";
                   j["scope"] = names_of(s.scope, resources);
                 },
                 [&](const TeamSod& t) {
                   j["type"] = "team_sod";
                   j["left"] = names_of(t.left, resources);
                   j["right"] = names_of(t.right, resources);
                 },
             },
             c);
  return j;
}

static Json relation_body(const Instance& inst, const AuthorizationRelation& a) {
  Json body = Json::object();
  for (UserId u = 0; u < inst.user_count(); ++u) body[inst.users().name(u)] = names_of(a.row(u), inst.resources());
  return body;
}

Json to_json(const InstanceFile& file) {
  const auto& inst = file.instance;
  Json doc;
  doc["schema"] = kSchemaVersion;
  doc["users"] = inst.users().names();
  doc["resources"] = inst.resources().names();
  doc["base"] = relation_body(inst, inst.base());
  doc["constraints"] = Json::array();
  for (std::size_t i = 0; i < inst.constraints().size(); ++i) {
    auto c = constraint_to_json(inst.constraints()[i], inst.resources());
    if (i < file.constraint_extra.size() && file.constraint_extra[i].is_object())
      for (auto it = file.constraint_extra[i].begin(); it != file.constraint_extra[i].end(); ++it)
        c[it.key()] = it.value();
    doc["constraints"].push_back(std::move(c));
  }
  if (!file.metadata.is_null()) doc["metadata"] = file.metadata;
  for (auto it = file.extra.begin(); it != file.extra.end(); ++it) doc[it.key()] = it.value();
  return doc;
}

std::string serialize(const InstanceFile& file) { return to_json(file).dump(2) + "\n"; }

Json relation_to_json(const Instance& inst, const AuthorizationRelation& a) {
  Json doc;
  doc["schema"] = kSchemaVersion;
  doc["relation"] = relation_body(inst, a);
  return doc;
}

AuthorizationRelation parse_relation(const Instance& inst, std::string_view text) {
  const auto doc = parse_json(text);
  check_schema(doc);
  const auto& body = field(doc, "", "relation");
  if (!body.is_object()) throw FormatError("/relation", "expected an object of per-user resource lists");
  AuthorizationRelation a(inst.user_count(), inst.resource_count());
  for (auto it = body.begin(); it != body.end(); ++it) {
    const auto pointer = child("/relation", it.key());
    auto u = inst.users().find(it.key());
    if (!u) throw FormatError(pointer, "unknown user '" + it.key() + "'");
    a.set_row(*u, resource_set(it.value(), pointer, inst.resources()));
  }
  return a;
}

AuthorizationRelation read_relation(const Instance& inst, const std::filesystem::path& path) {
  return parse_relation(inst, read_text(path));
}

Json verdict_to_json(const Instance& inst, const Verdict& v) {
  Json j;
  j["valid"] = v.valid;
  j["authorized"] = v.authorized;
  j["complete"] = v.complete;
  j["eligible"] = v.eligible;
  j["violated"] = Json::array();
  for (auto i : v.violated) {
    Json entry;
    entry["index"] = i;
    entry["constraint"] = constraint_to_json(inst.constraints()[i], inst.resources());
    j["violated"].push_back(std::move(entry));
  }
  return j;
}

Json report_to_json(const Instance& inst, const SolveReport& r) {
  Json j;
  j["algorithm"] = r.algorithm;
  j["satisfiable"] = r.satisfiable;
  j["max_size"] = r.max_size ? Json(*r.max_size) : Json(nullptr);
  j["counters"] = {{"patterns_explored", r.counters.patterns_explored},
                   {"users_removed", r.counters.users_removed},
                   {"dp_states", r.counters.dp_states},
                   {"candidates", r.counters.candidates}};
  j["wall_seconds"] = r.wall_seconds;
  j["witness"] = r.witness ? relation_body(inst, *r.witness) : Json(nullptr);
  return j;
}

Json trace_to_json(const Instance& original, const ReductionTrace& trace) {
  Json j;
  j["removed_users"] = Json::array();
  for (auto u : trace.removed_users) j["removed_users"].push_back(original.users().name(u));
  j["resource_classes"] = Json::array();
  for (const auto& cls : trace.resource_classes) {
    Json names = Json::array();
    for (auto r : cls) names.push_back(original.resources().name(r));
    j["resource_classes"].push_back(std::move(names));
  }
  j["constraint_rewrites"] = Json::array();
  for (const auto& rw : trace.constraint_rewrites)
    j["constraint_rewrites"].push_back(
        {{"original", rw.original}, {"reduced", rw.reduced ? Json(*rw.reduced) : Json(nullptr)}});
  return j;
}

}  // namespace apep::io
