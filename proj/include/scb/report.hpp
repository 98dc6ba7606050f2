#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace scb {

struct CheckRecord {
  std::string check_id;
  std::string paper_anchor;
  /// NaN when the check raised an error.
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  /// Compensator values for gauge relations; empty otherwise.
  std::vector<double> parameters;
  /// Error message when the check could not run.
  std::string error;
};

struct Report {
  std::string scenario;
  std::vector<CheckRecord> records;
  double dt = 0.0;
  double tau = 0.0;
  int ncut = 0;
  std::uint64_t seed = 0;

  /// True iff every record passes (an empty report passes).
  bool pass() const;
  /// pass = residual <= tolerance, with NaN failing.
  CheckRecord& add(const std::string& id, double residual, double tolerance);
  CheckRecord& add_failure(const std::string& id, double tolerance, const std::string& error);
};

/// check_id -> reference anchor label, loaded from a JSON object file.
using AnchorTable = std::map<std::string, std::string>;
AnchorTable load_anchors(const std::string& path);
/// Fills paper_anchor from the table; ids missing from it get "unmapped".
void annotate(Report& report, const AnchorTable& anchors);

/// Sorted keys, floats as %.12e, non-finite numbers as null.
std::string to_json(const Report& report);
/// Header "check_id,paper_anchor,residual,tolerance,pass".
std::string to_csv(const Report& report);
/// Gauge relation records only: relation, residual, compensator_parameters, pass.
std::string to_gauge_json(const Report& report);

struct ConvergenceRow {
  double eps = 0.0;
  double error = 0.0;
};
struct ConvergenceTable {
  std::string scenario;
  std::vector<ConvergenceRow> rows;
  bool strictly_decreasing = true;
};
std::string to_json(const ConvergenceTable& table);
std::string to_csv(const ConvergenceTable& table);

/// %.12e
std::string format_float(double v);

/// Throws IoError when the file cannot be written.
void write_text(const std::string& path, const std::string& text);

}  // namespace scb
