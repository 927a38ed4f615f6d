#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "carnot/cli.hpp"
#include "carnot/serialize.hpp"
#include "carnot/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"H-type deviation of step-two Carnot groups: minimax deviation, "
               "quasinorm defect functionals, and fundamental-solution checks"};
  app.set_version_flag("--version", carnot::kVersion);
  app.require_subcommand(1);

  carnot::RunSpec spec;
  std::string solver_file;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--solver-file", solver_file, "JSON file with solver configuration");
    cmd->add_option("--restarts", spec.solver.restarts, "seeded optimizer starts");
    cmd->add_option("--max-iters", spec.solver.max_iters, "iteration cap per start");
    cmd->add_option("--tol", spec.solver.tol, "relative stopping tolerance");
    cmd->add_option("--seed", spec.solver.seed, "RNG seed");
    cmd->add_option("--grid-density", spec.solver.grid_density, "sphere grid size");
    cmd->add_option("--threads", spec.solver.threads, "worker thread cap");
    cmd->add_option("--output", spec.output, "output path (stdout when omitted)");
    cmd->add_option("--format", spec.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* validate = app.add_subcommand("validate", "check a group's structural invariants");
  validate->add_option("--group", spec.group, "catalog name or JSON path")->required();
  add_common(validate);

  auto* deviation = app.add_subcommand("deviation", "H-type deviation of a group");
  deviation->add_option("--group", spec.group, "catalog name or JSON path")->required();
  deviation->add_option("--metric", spec.metric,
                        "identity, optimal, or a JSON path (default optimal)");
  add_common(deviation);

  auto* defects = app.add_subcommand("defects", "suprema of the quasinorm defect functionals");
  defects->add_option("--group", spec.group, "catalog name or JSON path")->required();
  defects->add_option("--metric", spec.metric, "identity, optimal, or a JSON path");
  defects->add_option("--samples", spec.samples, "sample count");
  add_common(defects);

  auto* verify = app.add_subcommand("verify-fundamental",
                                    "closed-form fundamental-solution residuals");
  verify->add_option("--n", spec.n_range, "index or range, e.g. 3 or 2..5")->required();
  verify->add_option("--samples", spec.samples, "seeded points per index");
  add_common(verify);

  auto* conjecture = app.add_subcommand("conjecture",
                                        "scan sup |N L_inf N| over the horizontal unit sphere");
  conjecture->add_option("--n", spec.n_range, "index or range, e.g. 2..8")->required();
  conjecture->add_option("--samples", spec.samples, "scan sample count");
  add_common(conjecture);

  auto* catalog = app.add_subcommand("catalog", "list built-in group constructors");
  add_common(catalog);

  // default metric differs per command: deviation minimizes over metrics
  // unless told otherwise, the defect scans default to the identity metric
  spec.metric = "";

  CLI11_PARSE(app, argc, argv);

  if (!solver_file.empty()) {
    try {
      const std::string text = carnot::read_text_file(solver_file);
      spec.solver = carnot::solver_from_json(carnot::Json::parse(text, nullptr, true));
    } catch (const std::exception& e) {
      std::cerr << "error: cannot load solver file: " << e.what() << "\n";
      return 2;
    }
  }

  for (auto* cmd : {validate, deviation, defects, verify, conjecture, catalog}) {
    if (cmd->parsed()) spec.command = cmd->get_name();
  }
  if (spec.metric.empty()) spec.metric = (spec.command == "deviation") ? "optimal" : "identity";

  return carnot::run(spec);
}
