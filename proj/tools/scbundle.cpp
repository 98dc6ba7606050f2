// Command-line driver. Exit codes: 0 pass, 1 check failure, 2 config error,
// 3 I/O error.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "scb/errors.hpp"
#include "scb/report.hpp"
#include "scb/scenario.hpp"
#include "scb/verify.hpp"

namespace {

enum Exit { kPass = 0, kFail = 1, kConfig = 2, kIo = 3 };

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw scb::IoError("write to stdout failed");
  } else {
    scb::write_text(path, text);
  }
}

scb::Scenario load(const std::string& path) {
  scb::Scenario s = scb::load_scenario(path);
  scb::apply_seed_override(s);
  scb::validate(s);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical bundle verification harness"};
  app.require_subcommand(1);

  std::string config, out, format = "json", anchors = std::string(SCB_SCENARIO_DIR) + "/anchors.json";
  std::string out_dir = ".";
  std::vector<double> eps;
  double t = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "scenario JSON file")->required();
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", out, "output file (stdout when absent)");
  };
  CLI::App* verify = app.add_subcommand("verify", "run every residual suite of the scenario");
  add_common(verify);
  verify->add_option("--anchors", anchors, "check_id to reference anchor table");
  CLI::App* gauge = app.add_subcommand("gauge", "gauge suite only");
  add_common(gauge);
  gauge->add_option("--anchors", anchors, "check_id to reference anchor table");
  CLI::App* convergence = app.add_subcommand("convergence", "ansatz error against the reference solver");
  add_common(convergence);
  CLI::Option* eps_opt =
      convergence->add_option("--eps", eps, "eps values (scenario list when absent)")->expected(0, -1);
  CLI::App* propagate = app.add_subcommand("propagate", "classical trajectory and ansatz wavefunction CSVs");
  propagate->add_option("config", config, "scenario JSON file")->required();
  propagate->add_option("--t", t, "final time")->required();
  propagate->add_option("--out-dir", out_dir, "directory for trajectory.csv and wavefunction.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    const scb::Scenario s = load(config);
    if (verify->parsed() || gauge->parsed()) {
      scb::Report report = verify->parsed() ? scb::run_verify(s) : scb::run_gauge(s);
      scb::annotate(report, scb::load_anchors(anchors));
      if (gauge->parsed() && format == "json") {
        emit(scb::to_gauge_json(report), out);
      } else {
        emit(format == "json" ? scb::to_json(report) : scb::to_csv(report), out);
      }
      return report.pass() ? kPass : kFail;
    }
    if (convergence->parsed()) {
      // A bare --eps asks for an empty table; CLI11 would otherwise store a
      // default-constructed value for it.
      std::vector<double> list = s.convergence_eps;
      if (eps_opt->count() > 0) {
        list.clear();
        for (const std::string& r : eps_opt->results()) {
          if (!r.empty()) list.push_back(std::stod(r));
        }
      }
      const scb::ConvergenceTable table = scb::run_convergence(s, list);
      emit(format == "json" ? scb::to_json(table) : scb::to_csv(table), out);
      return table.strictly_decreasing ? kPass : kFail;
    }
    const scb::PropagateOutput p = scb::run_propagate(s, t);
    scb::write_text(out_dir + "/trajectory.csv", p.trajectory_csv);
    scb::write_text(out_dir + "/wavefunction.csv", p.wavefunction_csv);
    return kPass;
  } catch (const scb::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const scb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const scb::InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const scb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
}
