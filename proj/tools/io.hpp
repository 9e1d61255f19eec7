#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apep/error.hpp"
#include "apep/model.hpp"
#include "apep/reduce.hpp"
#include "apep/solve.hpp"
#include "apep/verify.hpp"

namespace apep::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Parse failure; what() starts with the JSON pointer of the offending value.
class FormatError : public InvalidInput {
public:
  FormatError(const std::string& pointer, const std::string& message)
      : InvalidInput((pointer.empty() ? std::string("/") : pointer) + ": " + message),
        pointer_(pointer),
        message_(message) {}
  const std::string& pointer() const { return pointer_; }
  const std::string& message() const { return message_; }

private:
  std::string pointer_;
  std::string message_;
};

struct InstanceFile {
  Instance instance;
  /// Free-form object, null when absent.
  Json metadata;
  /// Unknown top-level fields (non-strict parsing only).
  Json extra = Json::object();
  /// Unknown fields per constraint, aligned with instance.constraints().
  std::vector<Json> constraint_extra;
};

/// Constraints are normalized on the way in. Under strict parsing any unknown
/// field is an error; otherwise it is kept and written back on serialize.
InstanceFile parse_instance(std::string_view text, bool strict = false);
InstanceFile read_instance(const std::filesystem::path& path, bool strict = false);

Json to_json(const InstanceFile& file);
/// Canonical text: fixed field order, two-space indent, trailing newline.
std::string serialize(const InstanceFile& file);

Json constraint_to_json(const Constraint& c, const NameTable& resources);

/// {"schema": 1, "relation": {user: [resources]}} with every user listed.
Json relation_to_json(const Instance& inst, const AuthorizationRelation& a);
AuthorizationRelation parse_relation(const Instance& inst, std::string_view text);
AuthorizationRelation read_relation(const Instance& inst, const std::filesystem::path& path);

Json verdict_to_json(const Instance& inst, const Verdict& v);
Json report_to_json(const Instance& inst, const SolveReport& r);
/// Removed users and merged resources are named after the original instance.
Json trace_to_json(const Instance& original, const ReductionTrace& trace);

std::string read_text(const std::filesystem::path& path);

}  // namespace apep::io
