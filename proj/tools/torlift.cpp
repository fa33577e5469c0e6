// torlift: scenario-driven checks for local torus actions and the lifting
// obstruction of principal bundles over them.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "torlift/commands.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw torlift::InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw torlift::InputError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks local torus actions and decides the lifting obstruction on a finite model"};
  app.require_subcommand(1);
  app.fallthrough();

  torlift::RunOptions opt;
  std::string report_path, emit_path, s_text;
  std::int64_t max_den = 1000000;
  std::int64_t window = 0, torus_order = 0, fiber_order = 0;

  auto* w = app.add_option("--window", window, "deck-translation window (overrides the scenario)");
  auto* m = app.add_option("--torus-order", torus_order, "order m of the torus sample grid (Z/m)^n");
  auto* m2 = app.add_option("--fiber-order", fiber_order, "order m' of the fiber group Z/m'");
  auto* sopt = app.add_option("--s", s_text, "cylinder lifting parameter s, as p/q");
  app.add_option("--report", report_path, "also write the report to this file");
  app.add_option("--max-denominator", max_den, "largest denominator accepted in scenario files")
      ->check(CLI::PositiveNumber);
  for (auto* o : {w, m, m2, sopt}) o->configurable(false);

  std::string scenario_path;
  for (const auto& name : torlift::command_names()) {
    if (name == "cylinder") {
      auto* sub = app.add_subcommand(name, "build the cylinder scenario and run the obstruction pipeline");
      sub->add_option("--emit", emit_path, "write the generated scenario file here");
      continue;
    }
    auto* sub = app.add_subcommand(name, "run '" + name + "' on a scenario file");
    sub->add_option("scenario", scenario_path, "scenario file")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : torlift::kInputError;
  }

  if (*w) opt.window = window;
  if (*m) opt.torus_order = torus_order;
  if (*m2) opt.fiber_order = fiber_order;

  const std::string command = app.get_subcommands().front()->get_name();
  torlift::RunResult res;
  try {
    if (*sopt) opt.s = torlift::Angle::parse(s_text);
    torlift::Scenario scenario;
    if (command == "cylinder") {
      scenario = torlift::cylinder_scenario(opt);
      if (!emit_path.empty()) write_file(emit_path, torlift::emit_scenario(scenario));
      opt.window.reset();
      opt.torus_order.reset();
      opt.fiber_order.reset();
    } else {
      if (*sopt) throw torlift::InputError("--s only applies to the cylinder command");
      scenario = torlift::parse_scenario(read_file(scenario_path), {max_den});
    }
    res = torlift::run(command, scenario, opt);
  } catch (const torlift::Error& e) {
    res = {"command: " + command + "\nerror: " + e.what() + "\n", torlift::kInputError};
  }

  std::cout << res.report;
  if (!report_path.empty()) {
    try {
      write_file(report_path, res.report);
    } catch (const torlift::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return torlift::kInputError;
    }
  }
  return res.exit_code;
}
