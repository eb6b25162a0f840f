#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "chainrisk/project.hpp"
#include "json.hpp"

namespace chainrisk {

/// Reads a Patterson instance: `n m`, m capacities, then n records
/// `duration d_1..d_m s succ_1..succ_s`. Tokens may wrap across lines.
/// All four estimates are set to the single listed duration. Throws
/// Error(kMalformed | kRange) naming the offending line.
Project parse_patterson(std::istream& in);
Project parse_patterson_string(const std::string& text);

/// Inverse of parse_patterson. Requires ids 1..n in order and integral
/// avg durations, demands and capacities.
std::string write_patterson(const Project& project);

Project project_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json project_to_json(const Project& project);

/// Loads a project by extension: `.json` is the project document, anything
/// else is read as Patterson text.
Project load_project(const std::filesystem::path& path);

/// Overrides estimates from CSV `task_id,min,avg,safe,max`.
void apply_estimates(Project& project, std::istream& in);

/// Risk register CSV with header `risk_id,description,p,ic,ti,iq,d` followed
/// by any number of `rf:<task-id>` columns. When `project` is given, rf
/// columns naming tasks outside it raise kUnknownTask.
RiskRegister parse_risk_register(std::istream& in,
                                 const Project* project = nullptr);

std::string read_file(const std::filesystem::path& path);

}  // namespace chainrisk
