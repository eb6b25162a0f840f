#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "chainrisk/buffers.hpp"
#include "chainrisk/error.hpp"
#include "chainrisk/mitigation.hpp"
#include "chainrisk/project.hpp"
#include "chainrisk/risk.hpp"
#include "chainrisk/scheduler.hpp"
#include "chainrisk/simulation.hpp"
#include "json.hpp"

namespace chainrisk {

inline constexpr const char* kToolVersion = "0.3.0";

/// Which stages a run performs.
enum class Command { kValidate, kAssess, kSchedule, kSimulate, kMitigate, kRun };

std::string_view to_string(Command command);

struct RunConfig {
  Command command = Command::kRun;
  std::optional<std::filesystem::path> project_path;
  std::optional<std::filesystem::path> risk_register_path;
  std::optional<std::filesystem::path> ahp_matrix_path;
  std::optional<std::filesystem::path> fault_tree_path;
  std::optional<std::filesystem::path> estimates_path;
  std::optional<std::filesystem::path> rules_path;
  std::vector<BufferMethod> methods = {BufferMethod::kCutPaste, BufferMethod::kRsem,
                                       BufferMethod::kApd};
  VarianceModel variance = VarianceModel::kRsemHalfU;
  std::size_t replications = 10000;
  std::uint64_t seed = 42;
  std::optional<double> deadline;
  unsigned workers = 1;
  std::filesystem::path output_dir = "chainrisk-out";
  std::set<std::string> formats = {"json", "csv", "text"};
  /// Also write every simulated makespan to makespans.txt.
  bool dump_sample = false;
};

/// Applies a JSON object whose keys mirror the command-line flags
/// (project, risks, ahp, fault_tree, estimates, rules, method, variance,
/// reps, seed, deadline, out, format, workers).
void apply_config_json(RunConfig& cfg, const nlohmann::json& doc);

/// Parses "cpm", "rsem", "apd" or "all" (comma lists allowed).
std::vector<BufferMethod> parse_methods(const std::vector<std::string>& names);

struct Provenance {
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  /// (input label, path as given, SHA-256 hex of the file bytes)
  std::vector<std::tuple<std::string, std::string, std::string>> inputs;
};

struct AnalysisBundle {
  Command command = Command::kRun;
  Provenance provenance;
  std::optional<Project> project;
  std::optional<ValidationReport> validation;
  std::optional<CriteriaWeights> weights;
  std::optional<std::vector<RiskAssessment>> risks;
  std::optional<BaselineSchedule> baseline;
  std::optional<CriticalChainPlan> plan;
  std::vector<BufferedSchedule> buffered;
  std::optional<SimulationResult> simulation;
  std::optional<MitigationReport> mitigation;
  std::vector<std::string> skipped;
};

/// A failed stage. exit_code: 2 validation, 3 parse/input, 4 runtime.
class StageError : public Error {
 public:
  StageError(std::string stage, ErrorCode code, const std::string& message,
             int exit_code)
      : Error(code, stage + ": " + message),
        stage_(std::move(stage)),
        detail_(message),
        exit_code_(exit_code) {}

  const std::string& stage() const { return stage_; }
  const std::string& detail() const { return detail_; }
  int exit_code() const { return exit_code_; }
  /// Single-line JSON for the diagnostic stream.
  std::string to_json_line() const;

 private:
  std::string stage_;
  std::string detail_;
  int exit_code_;
};

std::string sha256_hex(const std::string& bytes);

/// validate -> assess -> baseline -> chain -> buffers -> simulate ->
/// mitigate, each only when the command and inputs call for it. Throws
/// StageError.
AnalysisBundle run_pipeline(const RunConfig& cfg);

nlohmann::ordered_json bundle_to_json(const AnalysisBundle& bundle);

/// Shortest round-trip decimal form.
std::string format_number(double v);

std::string risks_csv(const std::vector<RiskAssessment>& risks);
std::string schedule_csv(const std::vector<GanttRow>& rows);
std::string buffers_csv(const std::vector<BufferedSchedule>& buffered);
std::string histogram_csv(const SimulationResult& result);
std::string summary_text(const AnalysisBundle& bundle);

/// Writes the requested report files into cfg.output_dir and returns their
/// paths. Throws StageError("report", kIo, ...) on I/O failure.
std::vector<std::filesystem::path> render_report(const AnalysisBundle& bundle,
                                                 const RunConfig& cfg);

}  // namespace chainrisk
