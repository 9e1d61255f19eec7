// apep: solve, verify, reduce, generate and benchmark APEP instances.
//
// Exit codes: 0 sat/valid, 1 unsat/invalid, 2 usage or input error,
// 3 capacity error, 4 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "apep/error.hpp"
#include "apep/reduce.hpp"
#include "apep/solve.hpp"
#include "apep/verify.hpp"
#include "generate.hpp"
#include "io.hpp"

namespace fs = std::filesystem;
using namespace apep;
using io::Json;

namespace {

enum Exit { kOk = 0, kNegative = 1, kUsage = 2, kCapacity = 3, kInternal = 4 };

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
}

std::string relation_lines(const Instance& inst, const AuthorizationRelation& a) {
  std::string out;
  for (UserId u = 0; u < inst.user_count(); ++u) {
    if (a.row(u).empty()) continue;
    out += "  " + inst.users().name(u) + ":";
    a.row(u).for_each([&](ResourceId r) { out += " " + inst.resources().name(r); });
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SolveArgs {
  std::string in, out, algo = "auto", mode = "decide";
  bool json = false, strict = false;
};

int run_solve(const SolveArgs& args) {
  const auto file = io::read_instance(args.in, args.strict);
  const auto& inst = file.instance;
  const auto route = parse_route(args.algo);
  if (!route) throw InvalidInput("unknown algorithm '" + args.algo + "'");
  const auto mode = args.mode == "max" ? Mode::maximize : Mode::decide;

  const auto report = solve_with(inst, *route, mode);
  if (report.witness && !check_valid(inst, *report.witness).valid)
    throw std::logic_error("solver returned a witness that fails verification");

  if (args.json) {
    std::cout << io::report_to_json(inst, report).dump(2) << "\n";
  } else {
    std::cout << "algorithm: " << report.algorithm << "\n";
    std::cout << "result: " << (report.satisfiable ? "sat" : "unsat") << "\n";
    if (report.max_size) std::cout << "M_Sol: " << *report.max_size << "\n";
    std::cout << "wall_seconds: " << report.wall_seconds << "\n";
    if (report.witness) std::cout << "witness:\n" << relation_lines(inst, *report.witness);
  }
  if (!args.out.empty() && report.witness)
    write_output(args.out, io::relation_to_json(inst, *report.witness).dump(2) + "\n");
  return report.satisfiable ? kOk : kNegative;
}

struct VerifyArgs {
  std::string in, relation;
  bool json = false;
};

int run_verify(const VerifyArgs& args) {
  const auto file = io::read_instance(args.in);
  const auto& inst = file.instance;
  const auto a = io::read_relation(inst, args.relation);
  const auto v = check_valid(inst, a);
  if (args.json) {
    std::cout << io::verdict_to_json(inst, v).dump(2) << "\n";
  } else {
    std::cout << std::boolalpha;
    std::cout << "authorized: " << v.authorized << "\n";
    std::cout << "complete: " << v.complete << "\n";
    std::cout << "eligible: " << v.eligible << "\n";
    std::cout << "valid: " << v.valid << "\n";
    for (auto i : v.violated) std::cout << "violated: " << describe(inst.constraints()[i], inst.resources()) << "\n";
    if (v.valid) {
      std::cout << "core:";
      for (auto u : compute_core(inst, a)) std::cout << " " << inst.users().name(u);
      std::cout << "\n";
    }
  }
  return v.valid ? kOk : kNegative;
}

struct ReduceArgs {
  std::string in, out, rule = "families";
  std::optional<std::uint64_t> f;
};

int run_reduce(const ReduceArgs& args) {
  const auto file = io::read_instance(args.in);
  const auto& inst = file.instance;
  Json doc;
  doc["rule"] = args.rule;
  int code = kOk;
  if (args.rule == "bodu") {
    const auto elim = eliminate_bod_u(inst);
    if (elim.unsatisfiable()) {
      doc["unsatisfiable"] = true;
      doc["reason"] = elim.unsat_reason;
      code = kNegative;
    } else {
      doc["instance"] = io::to_json({*elim.reduced, Json(), Json::object(), {}});
    }
    doc["trace"] = io::trace_to_json(inst, elim.trace);
  } else {
    const auto f = args.f.value_or(instance_bound(inst));
    const auto kernel = apply_reduction_rule(inst, f);
    doc["f"] = f;
    doc["families"] = Json::array();
    for (const auto& [row, users] : partition_families(inst)) {
      Json fam;
      fam["resources"] = Json::array();
      row.for_each([&](ResourceId r) { fam["resources"].push_back(inst.resources().name(r)); });
      fam["size"] = users.size();
      doc["families"].push_back(std::move(fam));
    }
    doc["instance"] = io::to_json({kernel.reduced, Json(), Json::object(), {}});
    doc["trace"] = io::trace_to_json(inst, kernel.trace);
  }
  write_output(args.out, doc.dump(2) + "\n");
  return code;
}

// ---------------------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

int run_bench(const std::string& suite_path, const std::string& out_path) {
  const auto suite = Json::parse(io::read_text(suite_path));
  if (!suite.is_object() || !suite.contains("runs") || !suite["runs"].is_array())
    throw io::FormatError("/runs", "suite needs an array of runs");
  const auto root = fs::path(suite_path).parent_path();

  std::string csv =
      "instance,algo,mode,decision,m_sol,wall_seconds,patterns_explored,users_removed,dp_states,candidates\n";
  for (std::size_t i = 0; i < suite["runs"].size(); ++i) {
    const auto& run = suite["runs"][i];
    const auto pointer = "/runs/" + std::to_string(i);
    io::InstanceFile file;
    std::string label;
    if (run.contains("instance")) {
      label = run["instance"].get<std::string>();
      file = io::read_instance(root / label);
    } else if (run.contains("generate")) {
      const auto params = io::params_from_json(run["generate"]);
      file = io::generate(params);
      label = "gen:n=" + std::to_string(params.n) + ";k=" + std::to_string(params.k) +
              ";seed=" + std::to_string(params.seed);
    } else {
      throw io::FormatError(pointer, "run needs 'instance' or 'generate'");
    }
    const auto algo = run.value("algo", std::string("auto"));
    const auto mode_name = run.value("mode", std::string("decide"));
    const auto route = parse_route(algo);
    if (!route) throw io::FormatError(pointer + "/algo", "unknown algorithm '" + algo + "'");
    const auto mode = mode_name == "max" ? Mode::maximize : Mode::decide;

    std::string decision, m_sol, wall, counters = ",,,";
    try {
      const auto report = solve_with(file.instance, *route, mode);
      decision = report.satisfiable ? "sat" : "unsat";
      m_sol = report.max_size ? std::to_string(*report.max_size) : "";
      wall = std::to_string(report.wall_seconds);
      const auto& c = report.counters;
      counters = std::to_string(c.patterns_explored) + "," + std::to_string(c.users_removed) + "," +
                 std::to_string(c.dp_states) + "," + std::to_string(c.candidates);
    } catch (const CapacityError&) {
      decision = "capacity";
    } catch (const UnsupportedMix&) {
      decision = "unsupported";
    }
    csv += csv_field(label) + "," + algo + "," + mode_name + "," + decision + "," + m_sol + "," + wall + "," +
           counters + "\n";
  }
  write_output(out_path, csv);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Authorization policy existence solver"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Decide or maximize an instance");
  solve_cmd->add_option("--in", solve.in, "Instance file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--out", solve.out, "Write the witness relation here");
  solve_cmd->add_option("--algo", solve.algo, "Algorithm")
      ->check(CLI::IsMember({"auto", "brute", "bounded", "bodu", "bode", "sodu", "sode", "wsp"}));
  solve_cmd->add_option("--mode", solve.mode, "decide or max")->check(CLI::IsMember({"decide", "max"}));
  solve_cmd->add_flag("--json", solve.json, "Print the report as JSON");
  solve_cmd->add_flag("--strict", solve.strict, "Reject unknown fields");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check a relation against an instance");
  verify_cmd->add_option("--in", verify.in, "Instance file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--relation", verify.relation, "Relation file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_flag("--json", verify.json, "Print the verdict as JSON");

  ReduceArgs reduce;
  auto* reduce_cmd = app.add_subcommand("reduce", "Apply a reduction and print instance plus trace");
  reduce_cmd->add_option("--in", reduce.in, "Instance file")->required()->check(CLI::ExistingFile);
  reduce_cmd->add_option("--rule", reduce.rule, "bodu or families")->check(CLI::IsMember({"bodu", "families"}));
  reduce_cmd->add_option("--f", reduce.f, "Family size threshold (default: instance bound)");
  reduce_cmd->add_option("--out", reduce.out, "Output file (default: stdout)");

  io::GenParams gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random instance");
  gen_cmd->add_option("-n,--users", gen.n, "Number of users");
  gen_cmd->add_option("-k,--resources", gen.k, "Number of resources");
  gen_cmd->add_option("--density", gen.density, "Base density in (0, 1]");
  gen_cmd->add_option("--bod-u", gen.bod_u, "(iff, forall) constraints");
  gen_cmd->add_option("--bod-e", gen.bod_e, "(iff, exists) constraints");
  gen_cmd->add_option("--sod-u", gen.sod_u, "(xor, forall) constraints");
  gen_cmd->add_option("--sod-e", gen.sod_e, "(xor, exists) constraints");
  gen_cmd->add_option("--implication", gen.implication, "(implies, forall) constraints");
  gen_cmd->add_option("--global-card", gen.global_card, "Global cardinality constraints");
  gen_cmd->add_option("--local-card", gen.local_card, "Local cardinality constraints");
  gen_cmd->add_option("--smer", gen.smer, "SMER constraints");
  gen_cmd->add_option("--team-sod", gen.team_sod, "Team separation constraints");
  gen_cmd->add_option("--t-min", gen.t_min, "Smallest cardinality threshold");
  gen_cmd->add_option("--t-max", gen.t_max, "Largest cardinality threshold");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen_out, "Output file (default: stdout)");

  std::string suite, bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Run a suite of instances and print CSV");
  bench_cmd->add_option("--suite", suite, "Suite file")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--out", bench_out, "CSV output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) return run_solve(solve);
    if (*verify_cmd) return run_verify(verify);
    if (*reduce_cmd) return run_reduce(reduce);
    if (*gen_cmd) {
      write_output(gen_out, io::serialize(io::generate(gen)));
      return kOk;
    }
    if (*bench_cmd) return run_bench(suite, bench_out);
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kCapacity;
  } catch (const UnsupportedMix& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
