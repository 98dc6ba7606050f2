#include "scb/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "scb/errors.hpp"

namespace scb {

using nlohmann::json;

bool Report::pass() const {
  for (const auto& r : records) {
    if (!r.pass) return false;
  }
  return true;
}

CheckRecord& Report::add(const std::string& id, double residual, double tolerance) {
  CheckRecord r;
  r.check_id = id;
  r.residual = residual;
  r.tolerance = tolerance;
  r.pass = std::isfinite(residual) && residual <= tolerance;
  records.push_back(std::move(r));
  return records.back();
}

CheckRecord& Report::add_failure(const std::string& id, double tolerance, const std::string& error) {
  CheckRecord& r = add(id, std::numeric_limits<double>::quiet_NaN(), tolerance);
  r.error = error;
  return r;
}

AnchorTable load_anchors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read anchor table " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed anchor table " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("anchor table must be an object");
  AnchorTable table;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_string()) throw ConfigError("anchor for " + key + " must be a string");
    table[key] = value.get<std::string>();
  }
  return table;
}

void annotate(Report& report, const AnchorTable& anchors) {
  for (auto& r : report.records) {
    const auto it = anchors.find(r.check_id);
    r.paper_anchor = it == anchors.end() ? "unmapped" : it->second;
  }
}

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

namespace {

// nlohmann's own number formatting is shortest-roundtrip; reports need a
// fixed format, so the tree is walked here. Objects are std::map backed and
// therefore already in sorted key order.
void emit(const json& j, int indent, std::string& out) {
  const std::string pad(indent * 2, ' ');
  const std::string inner((indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + json(it.key()).dump() + ": ";
        emit(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        emit(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_float(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

std::string dump(const json& j) {
  std::string out;
  emit(j, 0, out);
  out += "\n";
  return out;
}

json record_json(const CheckRecord& r) {
  json j;
  j["check_id"] = r.check_id;
  j["paper_anchor"] = r.paper_anchor;
  j["residual"] = r.residual;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  if (!r.parameters.empty()) j["parameters"] = r.parameters;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_float(double v) { return std::isfinite(v) ? format_float(v) : "nan"; }

}  // namespace

std::string to_json(const Report& report) {
  json j;
  j["scenario"] = report.scenario;
  j["pass"] = report.pass();
  j["environment"] = {{"dt", report.dt}, {"tau", report.tau}, {"ncut", report.ncut}, {"seed", report.seed}};
  j["records"] = json::array();
  for (const auto& r : report.records) j["records"].push_back(record_json(r));
  return dump(j);
}

std::string to_csv(const Report& report) {
  std::string out = "check_id,paper_anchor,residual,tolerance,pass\n";
  for (const auto& r : report.records) {
    out += csv_field(r.check_id) + "," + csv_field(r.paper_anchor) + "," + csv_float(r.residual) + "," +
           csv_float(r.tolerance) + "," + (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::string to_gauge_json(const Report& report) {
  json j;
  j["scenario"] = report.scenario;
  j["relations"] = json::array();
  bool pass = true;
  for (const auto& r : report.records) {
    if (r.check_id.rfind("gauge-", 0) != 0) continue;
    // Anchors read "Eq.<label>"; the relation field carries the bare label.
    std::string relation = r.paper_anchor;
    if (relation.rfind("Eq.", 0) == 0) relation = relation.substr(3);
    json e;
    e["check_id"] = r.check_id;
    e["relation"] = relation;
    e["residual"] = r.residual;
    e["compensator_parameters"] = r.parameters;
    e["pass"] = r.pass;
    if (!r.error.empty()) e["error"] = r.error;
    j["relations"].push_back(e);
    pass = pass && r.pass;
  }
  j["pass"] = pass;
  return dump(j);
}

std::string to_json(const ConvergenceTable& table) {
  json j;
  j["scenario"] = table.scenario;
  j["strictly_decreasing"] = table.strictly_decreasing;
  j["rows"] = json::array();
  for (const auto& r : table.rows) j["rows"].push_back({{"eps", r.eps}, {"ansatz_error", r.error}});
  return dump(j);
}

std::string to_csv(const ConvergenceTable& table) {
  std::string out = "eps,ansatz_error\n";
  for (const auto& r : table.rows) out += csv_float(r.eps) + "," + csv_float(r.error) + "\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace scb
