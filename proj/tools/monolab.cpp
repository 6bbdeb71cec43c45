#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "monolab/green.hpp"
#include "monolab/scenario.hpp"

using namespace monolab;

namespace {

int cmd_run(const std::string& path, const std::string& out_dir, bool serial) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "monolab: cannot read " << path << "\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();
  ParseResult pr = parse_config(text.str());
  if (!pr.ok()) {
    for (const auto& e : pr.errors) std::cerr << path << ":" << e.line << ": " << e.message << "\n";
    return 2;
  }
  if (const char* env = std::getenv("MONOLAB_OUTPUT_DIR"); env && *env) pr.config.output_dir = env;
  if (!out_dir.empty()) pr.config.output_dir = out_dir;
  const SuiteSummary s = run_scenario(pr.config, serial ? Exec::serial : Exec::parallel);
  std::size_t pass = 0;
  for (const auto& r : s.records) pass += r.pass;
  std::cout << pass << "/" << s.records.size() << " checks passed; reports in " << pr.config.output_dir << "\n";
  if (s.passed()) return 0;
  std::cerr << "failing checks:\n";
  for (const auto& id : s.failing()) std::cerr << "  " << id << "\n";
  return 1;
}

int cmd_dump_green(const std::string& model, const std::string& csv) {
  const GreenData g = solve_green(parse_model(model));
  std::ofstream out(csv, std::ios::binary);
  if (!out) {
    std::cerr << "monolab: cannot write " << csv << "\n";
    return 2;
  }
  write_green_csv(g, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monolab: monotone quantities on rotationally symmetric manifolds"};
  app.require_subcommand(1);
  app.footer("Environment:\n  MONOLAB_OUTPUT_DIR  overrides output_dir from the config (the -o flag wins over both)");

  std::string config, out_dir, model, csv;
  bool serial = false;
  auto* run = app.add_subcommand("run", "Run every suite in a scenario config and write CSV reports");
  run->add_option("config", config, "Scenario file (INI: [scenario] and [tolerances])")->required();
  run->add_option("-o,--output-dir", out_dir, "Directory for the reports");
  run->add_flag("--serial", serial, "Run cells one at a time");

  auto* list = app.add_subcommand("list-checks", "Print every check id with its anchor and default tolerance");

  auto* dump = app.add_subcommand("dump-green", "Write the Green's function table of one model as CSV");
  dump->add_option("model", model, "Model such as 'exp_cone:0.5, 4'")->required();
  dump->add_option("csv", csv, "Output file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out_dir, serial);
    if (*list) {
      std::cout << list_checks();
      return 0;
    }
    if (*dump) return cmd_dump_green(model, csv);
  } catch (const std::exception& e) {
    std::cerr << "monolab: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
