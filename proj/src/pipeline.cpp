#include "chainrisk/pipeline.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chainrisk/io.hpp"
#include "text.hpp"

namespace chainrisk {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Command command) {
  switch (command) {
    case Command::kValidate: return "validate";
    case Command::kAssess: return "assess";
    case Command::kSchedule: return "schedule";
    case Command::kSimulate: return "simulate";
    case Command::kMitigate: return "mitigate";
    case Command::kRun: return "run";
  }
  return "run";
}

std::vector<BufferMethod> parse_methods(const std::vector<std::string>& names) {
  std::vector<BufferMethod> out;
  auto add = [&](BufferMethod m) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  };
  for (const auto& entry : names) {
    std::stringstream ss(entry);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name.empty()) continue;
      if (name == "all") {
        add(BufferMethod::kCutPaste);
        add(BufferMethod::kRsem);
        add(BufferMethod::kApd);
      } else {
        add(parse_buffer_method(name));
      }
    }
  }
  if (out.empty()) throw Error(ErrorCode::kUnknownMethod, "no buffer method given");
  return out;
}

void apply_config_json(RunConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformed, "config must be a JSON object");
  }
  try {
    auto path = [&](const char* key, std::optional<fs::path>& slot) {
      if (doc.contains(key)) slot = doc.at(key).get<std::string>();
    };
    path("project", cfg.project_path);
    path("risks", cfg.risk_register_path);
    path("ahp", cfg.ahp_matrix_path);
    path("fault_tree", cfg.fault_tree_path);
    path("estimates", cfg.estimates_path);
    path("rules", cfg.rules_path);
    if (doc.contains("method")) {
      const auto& m = doc.at("method");
      cfg.methods = parse_methods(m.is_array() ? m.get<std::vector<std::string>>()
                                               : std::vector{m.get<std::string>()});
    }
    if (doc.contains("variance")) {
      cfg.variance = parse_variance_model(doc.at("variance").get<std::string>());
    }
    if (doc.contains("reps")) {
      const auto reps = doc.at("reps").get<long long>();
      if (reps < 1) throw Error(ErrorCode::kRange, "reps must be >= 1");
      cfg.replications = static_cast<std::size_t>(reps);
    }
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("deadline")) cfg.deadline = doc.at("deadline").get<double>();
    if (doc.contains("out")) cfg.output_dir = doc.at("out").get<std::string>();
    if (doc.contains("workers")) cfg.workers = doc.at("workers").get<unsigned>();
    if (doc.contains("format")) {
      const auto& f = doc.at("format");
      cfg.formats.clear();
      for (const auto& s : f.is_array() ? f.get<std::vector<std::string>>()
                                        : std::vector{f.get<std::string>()}) {
        if (s != "json" && s != "csv" && s != "text") {
          throw Error(ErrorCode::kMalformed, "unknown format '" + s + "'");
        }
        cfg.formats.insert(s);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("config: ") + e.what());
  }
}

std::string StageError::to_json_line() const {
  json j = {{"error", std::string(chainrisk::to_string(code()))},
            {"stage", stage_},
            {"message", detail_},
            {"exit_code", exit_code_}};
  return j.dump();
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIo, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitParse = 3;
constexpr int kExitRuntime = 4;

// Runs `f`, re-throwing library errors as StageError under `stage`.
template <class F>
auto in_stage(const std::string& stage, int exit_code, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.code(), e.what(), exit_code);
  } catch (const json::exception& e) {
    throw StageError(stage, ErrorCode::kMalformed, e.what(), kExitParse);
  }
}

[[noreturn]] void missing(const std::string& stage, const std::string& flag) {
  throw StageError(stage, ErrorCode::kInvalidInput, flag + " is required",
                   kExitParse);
}

}  // namespace

AnalysisBundle run_pipeline(const RunConfig& cfg) {
  AnalysisBundle bundle;
  bundle.command = cfg.command;
  bundle.provenance.seed = cfg.seed;
  bundle.provenance.replications = cfg.replications;
  if (cfg.replications < 1) {
    throw StageError("config", ErrorCode::kRange, "replications must be >= 1",
                     kExitParse);
  }

  const Command cmd = cfg.command;
  const bool needs_project = cmd != Command::kMitigate && cmd != Command::kAssess;
  const bool wants_schedule = cmd == Command::kSchedule ||
                              cmd == Command::kSimulate || cmd == Command::kRun;
  const bool wants_assess = cmd == Command::kAssess || cmd == Command::kRun;
  const bool wants_sim = cmd == Command::kSimulate || cmd == Command::kRun;
  const bool wants_mitigation = cmd == Command::kMitigate || cmd == Command::kRun;

  // Digest every input up front so the provenance block reflects exactly
  // the bytes that were read.
  std::map<std::string, std::string> contents;
  auto ingest = [&](const char* label, const std::optional<fs::path>& p) {
    if (!p) return;
    std::string bytes = in_stage("input", kExitParse, [&] { return read_file(*p); });
    bundle.provenance.inputs.emplace_back(label, p->string(), sha256_hex(bytes));
    contents[label] = std::move(bytes);
  };
  ingest("project", cfg.project_path);
  ingest("estimates", cfg.estimates_path);
  ingest("risks", cfg.risk_register_path);
  ingest("ahp", cfg.ahp_matrix_path);
  ingest("rules", cfg.rules_path);
  ingest("fault_tree", cfg.fault_tree_path);

  if (cfg.project_path) {
    spdlog::info("loading project {}", cfg.project_path->string());
    bundle.project = in_stage("project", kExitParse, [&] {
      const std::string& text = contents["project"];
      const std::string prefix = cfg.project_path->string() + ": ";
      try {
        if (cfg.project_path->extension() == ".json") {
          return project_from_json(ordered_json::parse(text));
        }
        return parse_patterson_string(text);
      } catch (const Error& e) {
        throw Error(e.code(), prefix + e.what());
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformed, prefix + e.what());
      }
    });
    if (cfg.estimates_path) {
      in_stage("estimates", kExitParse, [&] {
        std::istringstream in(contents["estimates"]);
        apply_estimates(*bundle.project, in);
      });
    }
  } else if (needs_project) {
    missing("project", "--project");
  }

  if (bundle.project) {
    bundle.validation = validate_project(*bundle.project);
    spdlog::info("validation: {} errors, {} warnings",
                 bundle.validation->errors.size(),
                 bundle.validation->warnings.size());
    for (const auto& w : bundle.validation->warnings) {
      spdlog::warn("{}: {}", w.code, w.message);
    }
    if (!bundle.validation->ok() && cmd != Command::kValidate) {
      const Finding& f = bundle.validation->errors.front();
      throw StageError("validate", ErrorCode::kInvalidInput,
                       f.code + ": " + f.message, kExitValidation);
    }
  }
  if (cmd == Command::kValidate) return bundle;

  std::optional<RiskRegister> reg;
  if (cfg.risk_register_path) {
    reg = in_stage("risks", kExitParse, [&] {
      std::istringstream in(contents["risks"]);
      return parse_risk_register(in, bundle.project ? &*bundle.project : nullptr);
    });
  }

  if (wants_assess) {
    if (reg) {
      const AhpComparisonMatrix ahp =
          cfg.ahp_matrix_path
              ? in_stage("ahp", kExitParse,
                         [&] { return ahp_from_json(json::parse(contents["ahp"])); })
              : AhpComparisonMatrix::uniform();
      const RuleBase rules =
          cfg.rules_path ? in_stage("rules", kExitParse,
                                    [&] {
                                      return rule_base_from_json(
                                          json::parse(contents["rules"]));
                                    })
                         : default_rule_base();
      in_stage("assess", kExitRuntime, [&] {
        bundle.weights = ahp_weights(ahp);
        bundle.risks = rank_register(reg->risks, ahp, rules);
      });
    } else if (cmd == Command::kAssess) {
      missing("assess", "--risks");
    } else {
      bundle.skipped.push_back("assess");
    }
  }

  if (wants_schedule) {
    in_stage("schedule", kExitRuntime, [&] {
      const Project& p = *bundle.project;
      bundle.baseline = build_baseline(p);
      bundle.plan = identify_critical_chain(p, *bundle.baseline);
      spdlog::info("baseline makespan {}, critical chain of {} tasks",
                   bundle.plan->makespan, bundle.plan->critical_chain.size());
    });
    in_stage("buffers", kExitRuntime, [&] {
      for (BufferMethod m : cfg.methods) {
        bundle.buffered.push_back(insert_buffers(*bundle.plan, *bundle.project,
                                                 *bundle.baseline, m,
                                                 cfg.variance));
      }
    });
  }

  if (wants_sim) {
    if (reg) {
      in_stage("simulate", kExitRuntime, [&] {
        SimConfig sc;
        sc.replications = cfg.replications;
        sc.seed = cfg.seed;
        sc.deadline = cfg.deadline;
        sc.workers = cfg.workers;
        bundle.simulation =
            run_simulation(*bundle.project, reg->matrix, *bundle.baseline, sc);
        spdlog::info("simulation mean {} over {} replications",
                     bundle.simulation->mean, cfg.replications);
      });
    } else if (cmd == Command::kSimulate) {
      missing("simulate", "--risks");
    } else {
      bundle.skipped.push_back("simulation");
    }
  }

  if (wants_mitigation) {
    if (cfg.fault_tree_path) {
      const auto [tree, events] = in_stage("fault_tree", kExitParse, [&] {
        return mitigation_from_json(json::parse(contents["fault_tree"]));
      });
      bundle.mitigation = in_stage(
          "mitigate", kExitRuntime, [&] { return analyze_mitigation(tree, events); });
    } else if (cmd == Command::kMitigate) {
      missing("mitigate", "--fault-tree");
    } else {
      bundle.skipped.push_back("mitigation");
    }
  }
  return bundle;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

ordered_json findings_json(const std::vector<Finding>& fs) {
  ordered_json out = ordered_json::array();
  for (const auto& f : fs) {
    ordered_json j;
    j["code"] = f.code;
    j["message"] = f.message;
    if (f.location != 0) j["task"] = f.location;
    out.push_back(std::move(j));
  }
  return out;
}

ordered_json ids_json(const std::vector<TaskId>& ids) {
  ordered_json out = ordered_json::array();
  for (TaskId id : ids) out.push_back(id);
  return out;
}

const BufferedSchedule* find_method(const AnalysisBundle& b, BufferMethod m) {
  for (const auto& bs : b.buffered) {
    if (bs.method == m) return &bs;
  }
  return nullptr;
}

std::optional<double> cpm_apd_ratio(const AnalysisBundle& b) {
  const auto* cpm = find_method(b, BufferMethod::kCutPaste);
  const auto* apd = find_method(b, BufferMethod::kApd);
  if (!cpm || !apd || apd->buffered_completion <= 0.0) return std::nullopt;
  return cpm->buffered_completion / apd->buffered_completion;
}

}  // namespace

ordered_json bundle_to_json(const AnalysisBundle& b) {
  ordered_json out;
  out["tool"] = "chainrisk";
  out["command"] = std::string(to_string(b.command));

  ordered_json prov;
  prov["tool_version"] = b.provenance.tool_version;
  prov["seed"] = b.provenance.seed;
  prov["replications"] = b.provenance.replications;
  prov["inputs"] = ordered_json::array();
  for (const auto& [label, path, digest] : b.provenance.inputs) {
    prov["inputs"].push_back({{"label", label}, {"path", path}, {"sha256", digest}});
  }
  out["provenance"] = std::move(prov);

  if (b.validation) {
    out["validation"] = {{"ok", b.validation->ok()},
                         {"errors", findings_json(b.validation->errors)},
                         {"warnings", findings_json(b.validation->warnings)}};
  }

  if (b.risks) {
    ordered_json r;
    if (b.weights) {
      r["weights"] = {{"cost", b.weights->tpc},
                      {"time", b.weights->tpt},
                      {"quality", b.weights->tpq}};
    }
    r["ranking"] = ordered_json::array();
    for (const auto& a : *b.risks) {
      r["ranking"].push_back(
          {{"risk_id", a.risk_id}, {"ai", a.ai}, {"rcn", a.rcn}, {"rank", a.rank}});
    }
    out["risks"] = std::move(r);
  }

  if (b.baseline && b.plan) {
    ordered_json s;
    s["makespan"] = b.plan->makespan;
    s["tasks"] = ordered_json::array();
    std::set<TaskId> on_chain(b.plan->critical_chain.begin(),
                              b.plan->critical_chain.end());
    for (const auto& [id, start] : b.baseline->start) {
      s["tasks"].push_back({{"id", id},
                            {"start", start},
                            {"finish", b.baseline->finish.at(id)},
                            {"critical", on_chain.count(id) > 0}});
    }
    s["resource_links"] = ordered_json::array();
    for (const auto& [from, to] : b.baseline->resource_links) {
      s["resource_links"].push_back({from, to});
    }
    s["critical_chain"] = ids_json(b.plan->critical_chain);
    s["feeding_chains"] = ordered_json::array();
    for (const auto& fc : b.plan->feeding_chains) {
      s["feeding_chains"].push_back({{"tasks", ids_json(fc.tasks)},
                                     {"merge_task", fc.merge_task},
                                     {"attach_task", fc.attach_task}});
    }
    out["schedule"] = std::move(s);
  }

  if (!b.buffered.empty()) {
    ordered_json arr = ordered_json::array();
    for (const auto& bs : b.buffered) {
      ordered_json j;
      j["method"] = std::string(to_string(bs.method));
      j["variance"] = std::string(to_string(bs.variance));
      j["feeding_buffers"] = ordered_json::array();
      for (std::size_t i = 0; i < bs.feeding_buffers.size(); ++i) {
        j["feeding_buffers"].push_back({{"chain", "FB" + std::to_string(i + 1)},
                                        {"size", bs.feeding_buffers[i]},
                                        {"latest_start", bs.feeding_latest_start[i]}});
      }
      j["project_buffer"] = bs.project_buffer;
      j["buffered_completion"] = bs.buffered_completion;
      arr.push_back(std::move(j));
    }
    out["buffers"] = std::move(arr);
    if (const auto ratio = cpm_apd_ratio(b)) out["cpm_apd_ratio"] = *ratio;
  }

  if (b.simulation) {
    const auto& s = *b.simulation;
    ordered_json j;
    j["replications"] = s.makespans.size();
    j["mean"] = s.mean;
    j["std"] = s.std;
    j["min"] = s.min;
    j["max"] = s.max;
    j["percentiles"] = {{"p10", s.percentiles.p10},
                        {"p50", s.percentiles.p50},
                        {"p80", s.percentiles.p80},
                        {"p90", s.percentiles.p90},
                        {"p95", s.percentiles.p95}};
    j["criticality_index"] = ordered_json::array();
    for (const auto& [id, ci] : s.criticality_index) {
      j["criticality_index"].push_back({{"task", id}, {"index", ci}});
    }
    if (s.deadline_probability) j["deadline_probability"] = *s.deadline_probability;
    out["simulation"] = std::move(j);
  }

  if (b.mitigation) out["mitigation"] = ordered_json(to_json(*b.mitigation));
  if (!b.skipped.empty()) out["skipped"] = b.skipped;
  return out;
}

std::string risks_csv(const std::vector<RiskAssessment>& risks) {
  std::string out = "risk_id,ai,rcn,rank\n";
  for (const auto& r : risks) {
    out += text::csv_escape(r.risk_id) + "," + format_number(r.ai) + "," +
           format_number(r.rcn) + "," + std::to_string(r.rank) + "\n";
  }
  return out;
}

std::string schedule_csv(const std::vector<GanttRow>& rows) {
  std::string out = "task,start,finish,kind\n";
  for (const auto& r : rows) {
    out += text::csv_escape(r.label) + "," + format_number(r.start) + "," +
           format_number(r.finish) + "," + r.kind + "\n";
  }
  return out;
}

std::string buffers_csv(const std::vector<BufferedSchedule>& buffered) {
  std::string out = "chain,method,size\n";
  for (const auto& bs : buffered) {
    const std::string method(to_string(bs.method));
    for (std::size_t i = 0; i < bs.feeding_buffers.size(); ++i) {
      out += "FB" + std::to_string(i + 1) + "," + method + "," +
             format_number(bs.feeding_buffers[i]) + "\n";
    }
    out += "project," + method + "," + format_number(bs.project_buffer) + "\n";
  }
  return out;
}

std::string histogram_csv(const SimulationResult& result) {
  std::string out = "bin_lower,bin_upper,count\n";
  for (const auto& bin : histogram(result)) {
    out += format_number(bin.lower) + "," + format_number(bin.upper) + "," +
           std::to_string(bin.count) + "\n";
  }
  return out;
}

std::string summary_text(const AnalysisBundle& b) {
  std::ostringstream os;
  char buf[160];
  os << "chainrisk " << b.provenance.tool_version << " — " << to_string(b.command)
     << "\nseed: " << b.provenance.seed << "\n";
  for (const auto& [label, path, digest] : b.provenance.inputs) {
    os << "input " << label << ": " << path << " (sha256 " << digest.substr(0, 16)
       << "…)\n";
  }
  if (b.validation) {
    os << "\nvalidation: " << (b.validation->ok() ? "ok" : "FAILED") << " ("
       << b.validation->errors.size() << " errors, "
       << b.validation->warnings.size() << " warnings)\n";
    for (const auto& f : b.validation->errors) {
      os << "  error " << f.code << ": " << f.message << "\n";
    }
    for (const auto& f : b.validation->warnings) {
      os << "  warning " << f.code << ": " << f.message << "\n";
    }
  }
  if (b.risks) {
    os << "\nrisk ranking (rank, id, AI, RCN):\n";
    for (const auto& r : *b.risks) {
      std::snprintf(buf, sizeof buf, "  %3d  %-12s  %7.4f  %7.4f\n", r.rank,
                    r.risk_id.c_str(), r.ai, r.rcn);
      os << buf;
    }
  }
  if (b.plan) {
    os << "\nbaseline makespan: " << format_number(b.plan->makespan)
       << "\ncritical chain:";
    for (TaskId id : b.plan->critical_chain) os << " " << id;
    os << "\nfeeding chains: " << b.plan->feeding_chains.size() << "\n";
    for (std::size_t i = 0; i < b.plan->feeding_chains.size(); ++i) {
      const auto& fc = b.plan->feeding_chains[i];
      os << "  FB" << i + 1 << ":";
      for (TaskId id : fc.tasks) os << " " << id;
      os << " -> " << fc.attach_task << "\n";
    }
  }
  if (!b.buffered.empty()) {
    os << "\nbuffered completion per method:\n";
    for (const auto& bs : b.buffered) {
      std::snprintf(buf, sizeof buf,
                    "  %-5s project buffer %10.4f  completion %10.4f\n",
                    std::string(to_string(bs.method)).c_str(), bs.project_buffer,
                    bs.buffered_completion);
      os << buf;
    }
    if (const auto ratio = cpm_apd_ratio(b)) {
      os << "cpm/apd completion ratio: " << format_number(*ratio) << "\n";
    }
  }
  if (b.simulation) {
    const auto& s = *b.simulation;
    os << "\nsimulation: " << s.makespans.size() << " replications\n";
    std::snprintf(buf, sizeof buf,
                  "  mean %.4f  std %.4f  min %.4f  max %.4f\n", s.mean, s.std,
                  s.min, s.max);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "  P10 %.4f  P50 %.4f  P80 %.4f  P90 %.4f  P95 %.4f\n",
                  s.percentiles.p10, s.percentiles.p50, s.percentiles.p80,
                  s.percentiles.p90, s.percentiles.p95);
    os << buf;
    if (s.deadline_probability) {
      os << "  P(makespan <= deadline): " << format_number(*s.deadline_probability)
         << "\n";
    }
  } else if (std::find(b.skipped.begin(), b.skipped.end(), "simulation") !=
             b.skipped.end()) {
    os << "\nsimulation: skipped\n";
  }
  if (b.mitigation) os << "\n" << format_table(*b.mitigation);
  return os.str();
}

namespace {

void write_text(const fs::path& path, const std::string& text,
                std::vector<fs::path>& written) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) {
    throw StageError("report", ErrorCode::kIo, "cannot write " + path.string(),
                     kExitRuntime);
  }
  written.push_back(path);
}

}  // namespace

std::vector<fs::path> render_report(const AnalysisBundle& b, const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) {
    throw StageError("report", ErrorCode::kIo,
                     "cannot create " + cfg.output_dir.string() + ": " + ec.message(),
                     kExitRuntime);
  }
  const fs::path& dir = cfg.output_dir;
  std::vector<fs::path> written;
  const bool json_out = cfg.formats.count("json") > 0;
  const bool csv_out = cfg.formats.count("csv") > 0;
  const bool text_out = cfg.formats.count("text") > 0;

  if (json_out) {
    write_text(dir / "bundle.json", bundle_to_json(b).dump(2) + "\n", written);
    if (b.mitigation) {
      write_text(dir / "mitigation.json", to_json(*b.mitigation).dump(2) + "\n",
                 written);
    }
  }
  if (csv_out) {
    if (b.risks) write_text(dir / "risks.csv", risks_csv(*b.risks), written);
    if (b.baseline && !b.buffered.empty()) {
      write_text(dir / "schedule.csv",
                 schedule_csv(gantt_rows(*b.project, *b.baseline, b.buffered.front())),
                 written);
      if (b.buffered.size() > 1) {
        for (const auto& bs : b.buffered) {
          write_text(dir / ("schedule_" + std::string(to_string(bs.method)) + ".csv"),
                     schedule_csv(gantt_rows(*b.project, *b.baseline, bs)), written);
        }
      }
      write_text(dir / "buffers.csv", buffers_csv(b.buffered), written);
    }
    if (b.simulation) {
      write_text(dir / "makespan_hist.csv", histogram_csv(*b.simulation), written);
    }
  }
  if (text_out) write_text(dir / "summary.txt", summary_text(b), written);
  if (cfg.dump_sample && b.simulation) {
    std::string sample;
    for (double m : b.simulation->makespans) sample += format_number(m) + "\n";
    write_text(dir / "makespans.txt", sample, written);
  }
  return written;
}

}  // namespace chainrisk
