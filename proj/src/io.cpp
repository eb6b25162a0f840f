#include "chainrisk/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "chainrisk/error.hpp"
#include "text.hpp"

namespace chainrisk {

using nlohmann::ordered_json;

namespace {

struct Token {
  std::string text;
  std::size_t line;
};

class TokenStream {
 public:
  explicit TokenStream(std::istream& in) {
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back({tok, n});
    }
    last_line_ = n;
  }

  std::int64_t next_int(const char* what) {
    if (pos_ >= tokens_.size()) {
      throw Error(ErrorCode::kMalformed,
                  "line " + std::to_string(last_line_) +
                      ": unexpected end of input, expected " + what);
    }
    const Token& t = tokens_[pos_++];
    auto v = text::parse_int(t.text);
    if (!v) {
      throw Error(ErrorCode::kMalformed, "line " + std::to_string(t.line) +
                                             ": expected integer " + what +
                                             ", got '" + t.text + "'");
    }
    current_line_ = t.line;
    return *v;
  }

  std::size_t line() const { return current_line_; }
  bool done() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t current_line_ = 0;
  std::size_t last_line_ = 0;
};

[[noreturn]] void range_error(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::kRange, "line " + std::to_string(line) + ": " + msg);
}

std::int64_t nonnegative(TokenStream& ts, const char* what) {
  auto v = ts.next_int(what);
  if (v < 0) range_error(ts.line(), std::string(what) + " must be >= 0");
  return v;
}

bool integral(double v) { return std::floor(v) == v; }

[[noreturn]] void json_error(const std::string& where, const std::string& msg) {
  throw Error(ErrorCode::kMalformed, where + ": " + msg);
}

double json_number(const ordered_json& obj, const char* key,
                   const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) json_error(where + "." + key, "expected a number");
  return v.get<double>();
}

}  // namespace

Project parse_patterson(std::istream& in) {
  TokenStream ts(in);
  Project project;
  const auto n = ts.next_int("job count");
  if (n < 1) range_error(ts.line(), "job count must be >= 1");
  const auto m = nonnegative(ts, "resource count");

  for (std::int64_t r = 0; r < m; ++r) {
    const auto cap = nonnegative(ts, "resource capacity");
    project.resources.push_back(
        {"R" + std::to_string(r + 1), static_cast<double>(cap)});
  }

  for (std::int64_t j = 1; j <= n; ++j) {
    Task t;
    t.id = static_cast<TaskId>(j);
    t.name = "J" + std::to_string(j);
    const double dur = static_cast<double>(nonnegative(ts, "duration"));
    t.est_min = t.est_avg = t.est_safe = t.est_max = dur;
    for (std::int64_t r = 0; r < m; ++r) {
      const auto units = nonnegative(ts, "resource demand");
      if (units > 0) {
        t.demand[project.resources[r].id] = static_cast<double>(units);
      }
    }
    const auto s = nonnegative(ts, "successor count");
    for (std::int64_t k = 0; k < s; ++k) {
      const auto succ = ts.next_int("successor id");
      if (succ < 1 || succ > n) {
        range_error(ts.line(), "successor " + std::to_string(succ) +
                                   " outside [1," + std::to_string(n) + "]");
      }
      project.arcs.emplace_back(t.id, static_cast<TaskId>(succ));
    }
    project.tasks.push_back(std::move(t));
  }
  if (!ts.done()) {
    throw Error(ErrorCode::kMalformed,
                "line " + std::to_string(ts.peek().line) +
                    ": trailing token '" + ts.peek().text + "'");
  }
  return project;
}

Project parse_patterson_string(const std::string& text) {
  std::istringstream in(text);
  return parse_patterson(in);
}

std::string write_patterson(const Project& project) {
  for (std::size_t i = 0; i < project.tasks.size(); ++i) {
    const Task& t = project.tasks[i];
    if (t.id != static_cast<TaskId>(i + 1)) {
      throw Error(ErrorCode::kInvalidInput,
                  "Patterson output needs task ids 1..n in order");
    }
    if (!integral(t.est_avg)) {
      throw Error(ErrorCode::kInvalidInput,
                  "task " + std::to_string(t.id) + " has fractional duration");
    }
  }
  std::ostringstream os;
  os << project.tasks.size() << ' ' << project.resources.size() << '\n';
  for (std::size_t r = 0; r < project.resources.size(); ++r) {
    if (!integral(project.resources[r].capacity)) {
      throw Error(ErrorCode::kInvalidInput,
                  "resource " + project.resources[r].id +
                      " has fractional capacity");
    }
    if (r) os << ' ';
    os << static_cast<std::int64_t>(project.resources[r].capacity);
  }
  os << '\n';
  for (const Task& t : project.tasks) {
    os << static_cast<std::int64_t>(t.est_avg);
    for (const auto& r : project.resources) {
      auto it = t.demand.find(r.id);
      const double units = it == t.demand.end() ? 0.0 : it->second;
      if (!integral(units)) {
        throw Error(ErrorCode::kInvalidInput,
                    "task " + std::to_string(t.id) + " has fractional demand");
      }
      os << ' ' << static_cast<std::int64_t>(units);
    }
    std::vector<TaskId> succ;
    for (const auto& [a, b] : project.arcs) {
      if (a == t.id) succ.push_back(b);
    }
    os << ' ' << succ.size();
    for (TaskId s : succ) os << ' ' << s;
    os << '\n';
  }
  return os.str();
}

Project project_from_json(const ordered_json& doc) {
  Project project;
  try {
    if (!doc.is_object()) json_error("$", "expected an object");
    if (doc.contains("resources")) {
      const auto& res = doc.at("resources");
      if (!res.is_object()) json_error("$.resources", "expected an object");
      for (const auto& [key, cap] : res.items()) {
        if (!cap.is_number()) {
          json_error("$.resources." + key, "expected a number");
        }
        project.resources.push_back({key, cap.get<double>()});
      }
    }
    const auto& tasks = doc.at("tasks");
    if (!tasks.is_array()) json_error("$.tasks", "expected an array");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& obj = tasks[i];
      const std::string where = "$.tasks[" + std::to_string(i) + "]";
      if (!obj.is_object()) json_error(where, "expected an object");
      Task t;
      if (!obj.at("id").is_number_integer()) {
        json_error(where + ".id", "expected an integer");
      }
      t.id = obj.at("id").get<TaskId>();
      t.name = obj.value("name", "T" + std::to_string(t.id));
      if (obj.contains("avg")) {
        t.est_avg = json_number(obj, "avg", where);
      } else if (obj.contains("duration")) {
        t.est_avg = json_number(obj, "duration", where);
      } else {
        json_error(where, "missing 'avg'");
      }
      t.est_min = obj.contains("min") ? json_number(obj, "min", where)
                                      : t.est_avg;
      t.est_safe = obj.contains("safe") ? json_number(obj, "safe", where)
                                        : t.est_avg;
      t.est_max = obj.contains("max") ? json_number(obj, "max", where)
                                      : t.est_safe;
      if (obj.contains("demand")) {
        for (const auto& [key, units] : obj.at("demand").items()) {
          if (!units.is_number()) {
            json_error(where + ".demand." + key, "expected a number");
          }
          t.demand[key] = units.get<double>();
        }
      }
      project.tasks.push_back(std::move(t));
    }
    if (doc.contains("arcs")) {
      const auto& arcs = doc.at("arcs");
      for (std::size_t i = 0; i < arcs.size(); ++i) {
        const auto& a = arcs[i];
        if (!a.is_array() || a.size() != 2 || !a[0].is_number_integer() ||
            !a[1].is_number_integer()) {
          json_error("$.arcs[" + std::to_string(i) + "]",
                     "expected [pred, succ]");
        }
        project.arcs.emplace_back(a[0].get<TaskId>(), a[1].get<TaskId>());
      }
    }
    if (doc.contains("deadline") && !doc.at("deadline").is_null()) {
      project.deadline = json_number(doc, "deadline", "$");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("project JSON: ") + e.what());
  }
  return project;
}

ordered_json project_to_json(const Project& project) {
  ordered_json doc;
  doc["tasks"] = ordered_json::array();
  for (const Task& t : project.tasks) {
    ordered_json demand = ordered_json::object();
    for (const auto& [res, units] : t.demand) demand[res] = units;
    doc["tasks"].push_back({{"id", t.id},
                            {"name", t.name},
                            {"min", t.est_min},
                            {"avg", t.est_avg},
                            {"safe", t.est_safe},
                            {"max", t.est_max},
                            {"demand", demand}});
  }
  doc["arcs"] = ordered_json::array();
  for (const auto& [a, b] : project.arcs) doc["arcs"].push_back({a, b});
  doc["resources"] = ordered_json::object();
  for (const auto& r : project.resources) doc["resources"][r.id] = r.capacity;
  if (project.deadline) doc["deadline"] = *project.deadline;
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Project load_project(const std::filesystem::path& path) {
  const std::string body = read_file(path);
  if (path.extension() == ".json") {
    ordered_json doc;
    try {
      doc = ordered_json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kMalformed, path.string() + ": " + e.what());
    }
    return project_from_json(doc);
  }
  try {
    return parse_patterson_string(body);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void apply_estimates(Project& project, std::istream& in) {
  auto rows = text::read_csv(in);
  if (rows.empty()) return;
  const std::vector<std::string> header = {"task_id", "min", "avg", "safe",
                                           "max"};
  std::vector<std::string> got;
  for (const auto& f : rows.front().fields) got.emplace_back(text::trim(f));
  if (got != header) {
    throw Error(ErrorCode::kMalformed,
                "estimates line 1: expected header task_id,min,avg,safe,max");
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "estimates line " + std::to_string(row.line);
    if (row.fields.size() != header.size()) {
      throw Error(ErrorCode::kMalformed, where + ": expected 5 fields");
    }
    auto id = text::parse_int(row.fields[0]);
    if (!id) throw Error(ErrorCode::kMalformed, where + ": bad task id");
    auto idx = project.index_of(static_cast<TaskId>(*id));
    if (!idx) {
      throw Error(ErrorCode::kUnknownTask,
                  where + ": unknown task " + std::to_string(*id));
    }
    double v[4];
    for (int k = 0; k < 4; ++k) {
      auto x = text::parse_double(row.fields[k + 1]);
      if (!x) {
        throw Error(ErrorCode::kMalformed,
                    where + ": column " + header[k + 1] + " is not a number");
      }
      v[k] = *x;
    }
    Task& t = project.tasks[*idx];
    t.est_min = v[0];
    t.est_avg = v[1];
    t.est_safe = v[2];
    t.est_max = v[3];
  }
}

RiskRegister parse_risk_register(std::istream& in, const Project* project) {
  auto rows = text::read_csv(in);
  if (rows.empty()) {
    throw Error(ErrorCode::kMalformed, "risk register: missing header");
  }
  const auto& head = rows.front().fields;
  const std::vector<std::string> expect = {"risk_id", "description", "p", "ic",
                                           "ti",      "iq",          "d"};
  if (head.size() < expect.size()) {
    throw Error(ErrorCode::kMalformed,
                "risk register line 1: header needs " +
                    std::to_string(expect.size()) + " leading columns");
  }
  for (std::size_t c = 0; c < expect.size(); ++c) {
    if (text::trim(head[c]) != expect[c]) {
      throw Error(ErrorCode::kMalformed,
                  "risk register line 1, column " + std::to_string(c + 1) +
                      ": expected '" + expect[c] + "'");
    }
  }
  std::vector<TaskId> rf_tasks;
  for (std::size_t c = expect.size(); c < head.size(); ++c) {
    const auto name = text::trim(head[c]);
    const std::string where =
        "risk register line 1, column " + std::to_string(c + 1);
    if (name.substr(0, 3) != "rf:") {
      throw Error(ErrorCode::kMalformed, where + ": expected rf:<task-id>");
    }
    auto id = text::parse_int(name.substr(3));
    if (!id) throw Error(ErrorCode::kMalformed, where + ": bad task id");
    if (project && !project->index_of(static_cast<TaskId>(*id))) {
      throw Error(ErrorCode::kUnknownTask,
                  where + ": unknown task " + std::to_string(*id));
    }
    rf_tasks.push_back(static_cast<TaskId>(*id));
  }

  RiskRegister reg;
  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "risk register row " + std::to_string(row.line);
    if (row.fields.size() != head.size()) {
      throw Error(ErrorCode::kMalformed,
                  where + ": expected " + std::to_string(head.size()) +
                      " fields, got " + std::to_string(row.fields.size()));
    }
    RiskEvent ev;
    ev.id = std::string(text::trim(row.fields[0]));
    if (ev.id.empty()) throw Error(ErrorCode::kMalformed, where + ": empty risk_id");
    if (!ids.insert(ev.id).second) {
      throw Error(ErrorCode::kMalformed, where + ": duplicate risk_id " + ev.id);
    }
    ev.description = row.fields[1];
    double* scores[] = {&ev.p, &ev.impact_cost, &ev.impact_time,
                        &ev.impact_quality, &ev.d};
    for (int k = 0; k < 5; ++k) {
      const std::string col = expect[k + 2];
      auto v = text::parse_double(row.fields[k + 2]);
      if (!v) {
        throw Error(ErrorCode::kMalformed,
                    where + ", column " + col + ": not a number");
      }
      if (!(*v >= 1.0 && *v <= 10.0)) {
        throw Error(ErrorCode::kRange,
                    where + ", column " + col + ": score outside [1,10]");
      }
      *scores[k] = *v;
    }
    for (std::size_t c = 0; c < rf_tasks.size(); ++c) {
      const auto& cell = row.fields[expect.size() + c];
      if (text::trim(cell).empty()) continue;
      const std::string col = "rf:" + std::to_string(rf_tasks[c]);
      auto v = text::parse_double(cell);
      if (!v) {
        throw Error(ErrorCode::kMalformed,
                    where + ", column " + col + ": not a number");
      }
      if (!(*v >= 0.0 && *v <= 1.0)) {
        throw Error(ErrorCode::kRange,
                    where + ", column " + col + ": rf outside [0,1]");
      }
      reg.matrix.entries[{rf_tasks[c], ev.id}] = *v;
    }
    reg.risks.push_back(std::move(ev));
  }
  return reg;
}

}  // namespace chainrisk
