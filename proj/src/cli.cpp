#include "blockdyn/cli.hpp"

#include "blockdyn/build_system.hpp"
#include "blockdyn/scenario.hpp"
#include "blockdyn/simulate.hpp"
#include "blockdyn/system.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

namespace blockdyn {

namespace {

std::string number_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct RunArgs {
  std::string scenario;
  std::optional<double> dt;
  std::optional<double> t_final;
  std::optional<std::string> scheme;
  std::string out_path;
  std::string format = "csv";
  bool audit_energy = false;
  std::optional<long long> seed;
};

/// Writes samples as they are produced so a halted run keeps its prefix.
class ResultWriter {
 public:
  virtual ~ResultWriter() = default;
  virtual void header(const std::vector<std::string>& columns) = 0;
  virtual void row(const std::vector<double>& values) = 0;
  virtual void finish(bool completed, const std::string& message) = 0;
};

class CsvWriter final : public ResultWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void header(const std::vector<std::string>& columns) override {
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << '\n';
  }
  void row(const std::vector<double>& values) override {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << number_text(values[i]);
    os_ << '\n';
  }
  void finish(bool, const std::string&) override { os_.flush(); }

 private:
  std::ostream& os_;
};

class JsonWriter final : public ResultWriter {
 public:
  JsonWriter(std::ostream& os, nlohmann::json meta) : os_(os), doc_(std::move(meta)) {
    doc_["rows"] = nlohmann::json::array();
  }
  void header(const std::vector<std::string>& columns) override { doc_["columns"] = columns; }
  void row(const std::vector<double>& values) override { doc_["rows"].push_back(values); }
  void finish(bool completed, const std::string& message) override {
    doc_["completed"] = completed;
    if (!message.empty()) doc_["message"] = message;
    os_ << doc_.dump(1) << '\n';
    os_.flush();
  }

 private:
  std::ostream& os_;
  nlohmann::json doc_;
};

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  ScenarioConfig config;
  try {
    config = load_scenario(path);
  } catch (const ScenarioFileError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ScenarioError& e) {
    for (const auto& issue : e.issues()) err << path << ": " << issue.to_string() << '\n';
    return kExitInvalid;
  }
  try {
    const System system(build_system(config));
    out << path << ": ok (" << system.block_count() << " blocks, " << system.state_size()
        << " states, " << system.dof_names().size() << " DOFs)\n";
  } catch (const std::exception& e) {
    err << path << ": " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitOk;
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  ScenarioConfig config;
  try {
    config = load_scenario(a.scenario);
  } catch (const ScenarioFileError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ScenarioError& e) {
    for (const auto& issue : e.issues()) err << a.scenario << ": " << issue.to_string() << '\n';
    return kExitInvalid;
  }

  IntegrationOptions opts;
  opts.dt = a.dt.value_or(config.integration.dt);
  opts.t_final = a.t_final.value_or(config.integration.t_final);
  opts.every = config.outputs.every;
  try {
    opts.scheme = parse_scheme(a.scheme.value_or(config.integration.scheme));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!(opts.dt > 0.0)) {
    err << "error: --dt must be positive\n";
    return kExitUsage;
  }
  if (!(opts.t_final >= 0.0)) {
    err << "error: --t-final must be non-negative\n";
    return kExitUsage;
  }

  std::unique_ptr<System> system;
  try {
    system = std::make_unique<System>(build_system(config));
  } catch (const std::exception& e) {
    err << a.scenario << ": " << e.what() << '\n';
    return kExitInvalid;
  }

  // Output columns.
  const std::vector<std::string>& all = system->dof_names();
  std::vector<std::string> names = config.outputs.dofs.empty() ? all : config.outputs.dofs;
  std::vector<int> pick;
  for (const auto& n : names) {
    pick.push_back(static_cast<int>(std::find(all.begin(), all.end(), n) - all.begin()));
  }
  std::vector<std::string> columns{"t"};
  columns.insert(columns.end(), names.begin(), names.end());
  if (a.audit_energy) {
    for (const char* c : {"kinetic", "potential", "dissipated", "work", "total", "residual"}) {
      columns.push_back(std::string("energy.") + c);
    }
  }

  std::ofstream file;
  if (!a.out_path.empty()) {
    file.open(a.out_path, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write output file '" << a.out_path << "'\n";
      return kExitUsage;
    }
  }
  std::ostream& sink = a.out_path.empty() ? out : file;
  std::ostream& report = a.out_path.empty() ? err : out;

  std::unique_ptr<ResultWriter> writer;
  if (a.format == "csv") {
    writer = std::make_unique<CsvWriter>(sink);
  } else {
    nlohmann::json meta;
    meta["scenario"] = config.name;
    meta["dt"] = opts.dt;
    meta["t_final"] = opts.t_final;
    meta["scheme"] = to_string(opts.scheme);
    meta["euler_sequence"] = to_string(config.sequence);
    if (a.seed) meta["seed"] = *a.seed;
    writer = std::make_unique<JsonWriter>(sink, std::move(meta));
  }
  writer->header(columns);

  double e0 = 0.0;
  double last_residual = 0.0;
  bool first = true;
  auto on_sample = [&](const SimState& s) {
    const Eigen::VectorXd dofs = system->dofs(s.x);
    std::vector<double> row{s.t};
    for (int k : pick) row.push_back(dofs(k));
    if (a.audit_energy) {
      const EnergyTerms e = system->energy(s.t, s.x);
      if (first) e0 = e.total();
      last_residual = e.total() - e0 + s.dissipated - s.work;
      for (double v : {e.kinetic, e.potential(), s.dissipated, s.work, e.total(), last_residual}) {
        row.push_back(v);
      }
    }
    first = false;
    writer->row(row);
  };

  Trajectory traj;
  try {
    traj = integrate(*system, initial_sim_state(*system), opts, on_sample);
  } catch (const std::exception& e) {
    writer->finish(false, e.what());
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  writer->finish(traj.completed, traj.message);
  if (!traj.completed) {
    err << "error: " << traj.message << '\n';
    return kExitRuntime;
  }
  if (a.audit_energy) {
    report << "energy residual at t = " << number_text(opts.t_final) << ": "
           << number_text(last_residual) << " (relative "
           << number_text(last_residual / std::max(std::abs(e0), 1e-300)) << ")\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"blockdyn: block-diagram rigid multibody simulator", "blockdyn"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate a scenario and write the DOF table");
  run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
  run_cmd->add_option("--dt", run.dt, "Time step [s] (overrides the scenario)");
  run_cmd->add_option("--t-final", run.t_final, "Final time [s] (overrides the scenario)");
  run_cmd->add_option("--scheme", run.scheme, "rk4 or semi-implicit-euler");
  run_cmd->add_option("--out", run.out_path, "Output file (default: standard output)");
  run_cmd->add_option("--format", run.format, "csv or structured (JSON)")
      ->check(CLI::IsMember({"csv", "structured"}));
  run_cmd->add_flag("--audit-energy", run.audit_energy, "Append energy ledger columns");
  run_cmd->add_option("--seed", run.seed, "Seed recorded with the run metadata");

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a scenario and exit");
  validate_cmd->add_option("scenario", validate_path, "Scenario file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'blockdyn --help' for usage\n";
    return kExitUsage;
  }

  if (validate_cmd->parsed()) return cmd_validate(validate_path, out, err);
  return cmd_run(run, out, err);
}

}  // namespace blockdyn
