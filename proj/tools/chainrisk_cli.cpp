// chainrisk: critical-chain scheduling and schedule risk analysis.
//
//   chainrisk run --project p.rcp --risks r.csv --fault-tree ft.json --out out/
//
// Exit codes: 0 ok, 2 validation failure, 3 parse/usage failure, 4 runtime
// failure. Failures print one JSON line on stderr.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "chainrisk/io.hpp"
#include "chainrisk/pipeline.hpp"

namespace {

using chainrisk::Command;
using chainrisk::ErrorCode;
using chainrisk::RunConfig;
using chainrisk::StageError;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("chainrisk");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("CHAIN_LOG");
  const std::string level = env ? env : "";
  if (level == "error") spdlog::set_level(spdlog::level::err);
  else if (level == "warn") spdlog::set_level(spdlog::level::warn);
  else if (level == "info") spdlog::set_level(spdlog::level::info);
  else if (level == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::off);
}

int fail(const StageError& e) {
  std::cerr << e.to_json_line() << "\n";
  return e.exit_code();
}

struct Flags {
  std::string project, risks, ahp, fault_tree, estimates, rules, config, out;
  std::vector<std::string> methods, formats;
  std::string variance;
  long long reps = 0;
  std::uint64_t seed = 0;
  double deadline = 0.0;
  unsigned workers = 1;
  bool dump_sample = false;
};

// Explicit flags win over --config; --config wins over built-in defaults.
RunConfig resolve(Command command, const Flags& f, const CLI::App& sub) {
  RunConfig cfg;
  cfg.command = command;
  if (sub.count("--config")) {
    const auto text = chainrisk::read_file(f.config);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw chainrisk::Error(ErrorCode::kMalformed, f.config + ": " + e.what());
    }
    chainrisk::apply_config_json(cfg, doc);
  }
  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--project")) cfg.project_path = f.project;
  if (given("--risks")) cfg.risk_register_path = f.risks;
  if (given("--ahp")) cfg.ahp_matrix_path = f.ahp;
  if (given("--fault-tree")) cfg.fault_tree_path = f.fault_tree;
  if (given("--estimates")) cfg.estimates_path = f.estimates;
  if (given("--rules")) cfg.rules_path = f.rules;
  if (given("--method")) cfg.methods = chainrisk::parse_methods(f.methods);
  if (given("--variance")) cfg.variance = chainrisk::parse_variance_model(f.variance);
  if (given("--reps")) {
    if (f.reps < 1) throw chainrisk::Error(ErrorCode::kRange, "--reps must be >= 1");
    cfg.replications = static_cast<std::size_t>(f.reps);
  }
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--deadline")) cfg.deadline = f.deadline;
  if (given("--workers")) cfg.workers = f.workers;
  if (given("--out")) cfg.output_dir = f.out;
  if (given("--format")) {
    cfg.formats.clear();
    for (const auto& s : f.formats) cfg.formats.insert(s);
  }
  if (given("--dump-sample")) cfg.dump_sample = f.dump_sample;
  return cfg;
}

void add_flags(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON file with defaults for any flag");
  sub.add_option("--project", f.project, "project file (.json or Patterson text)");
  sub.add_option("--risks", f.risks, "risk register CSV");
  sub.add_option("--ahp", f.ahp, "AHP comparison matrix JSON");
  sub.add_option("--fault-tree", f.fault_tree, "fault tree / event tree JSON");
  sub.add_option("--estimates", f.estimates, "estimates CSV overriding the project");
  sub.add_option("--rules", f.rules, "fuzzy rule base JSON");
  sub.add_option("--method", f.methods, "buffer sizing: cpm, rsem, apd or all")
      ->delimiter(',')
      ->check(CLI::IsMember({"cpm", "rsem", "apd", "all"}));
  sub.add_option("--variance", f.variance, "activity variance for apd")
      ->check(CLI::IsMember({"rsem_half_u", "triangular"}));
  sub.add_option("--reps", f.reps, "Monte Carlo replications");
  sub.add_option("--seed", f.seed, "random seed");
  sub.add_option("--deadline", f.deadline, "deadline for P(makespan <= T)");
  sub.add_option("--workers", f.workers, "simulation threads (0 = all cores)");
  sub.add_option("--out", f.out, "output directory");
  sub.add_option("--format", f.formats, "report formats: json, csv, text")
      ->delimiter(',')
      ->check(CLI::IsMember({"json", "csv", "text"}));
  sub.add_flag("--dump-sample", f.dump_sample, "write every makespan to makespans.txt");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Critical-chain scheduling and schedule risk analysis"};
  app.set_version_flag("--version", std::string(chainrisk::kToolVersion));
  app.require_subcommand(1);

  const std::map<std::string, std::pair<Command, std::string>> commands = {
      {"validate", {Command::kValidate, "check a project for structural errors"}},
      {"assess", {Command::kAssess, "rank risks by fuzzy criticality"}},
      {"schedule", {Command::kSchedule, "baseline, critical chain and buffers"}},
      {"simulate", {Command::kSimulate, "schedule plus Monte Carlo risk simulation"}},
      {"mitigate", {Command::kMitigate, "fault-tree and event-tree analysis"}},
      {"run", {Command::kRun, "every stage the inputs allow"}},
  };
  Flags flags;
  std::map<CLI::App*, Command> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    add_flags(*sub, flags);
    subs[sub] = entry.first;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << StageError("usage", ErrorCode::kInvalidInput, e.what(), 3)
                     .to_json_line()
              << "\n";
    return 3;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig cfg;
  try {
    cfg = resolve(subs.at(sub), flags, *sub);
  } catch (const chainrisk::Error& e) {
    return fail(StageError("config", e.code(), e.what(), 3));
  }

  try {
    const auto bundle = chainrisk::run_pipeline(cfg);
    for (const auto& path : chainrisk::render_report(bundle, cfg)) {
      spdlog::info("wrote {}", path.string());
    }
    if (bundle.validation && !bundle.validation->ok()) {
      const auto& f = bundle.validation->errors.front();
      return fail(StageError("validate", ErrorCode::kInvalidInput,
                             f.code + ": " + f.message, 2));
    }
  } catch (const StageError& e) {
    return fail(e);
  } catch (const chainrisk::Error& e) {
    return fail(StageError("runtime", e.code(), e.what(), 4));
  } catch (const std::exception& e) {
    return fail(StageError("runtime", ErrorCode::kInvalidInput, e.what(), 4));
  }
  return 0;
}
