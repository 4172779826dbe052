// Command-line front end: analyze, predict, dot, dump-graph.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "chainposet/analysis.hpp"

namespace {

void emit(const chainposet::Json& j, const std::string& json_path) {
  const std::string text = j.dump(2) + "\n";
  if (json_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(json_path);
  if (!os) throw std::runtime_error("cannot write " + json_path);
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-component posets of interval maps"};
  app.require_subcommand(1);

  std::string config_path;
  std::string json_path;
  std::string out_dir;
  bool seedless = false;

  auto* analyze = app.add_subcommand("analyze", "run the configured tasks and print a JSON report");
  analyze->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  analyze->add_option("--json", json_path, "write the report here instead of stdout");
  analyze->add_flag("--seedless", seedless, "omit the timing block so reports are byte-identical");

  auto* predict = app.add_subcommand("predict", "print the expected order type and representatives");
  predict->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  predict->add_option("--json", json_path, "write the prediction here instead of stdout");

  auto* dot = app.add_subcommand("dot", "write one Hasse diagram per resolution");
  dot->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  dot->add_option("-o,--out", out_dir, "output directory")->required();

  auto* dump = app.add_subcommand("dump-graph", "print the chain graph at the first resolution");
  dump->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    chainposet::AnalysisConfig cfg = chainposet::load_config(config_path);
    if (analyze->parsed()) {
      const auto report = chainposet::run(cfg, !seedless);
      if (json_path.empty() && cfg.json_path) json_path = *cfg.json_path;
      emit(report.json, json_path);
      if (cfg.dot_dir) chainposet::write_dot_files(report.levels, *cfg.dot_dir);
      return report.passed ? 0 : 1;
    }
    if (predict->parsed()) {
      emit(chainposet::predict_json(cfg), json_path);
      return 0;
    }
    if (dot->parsed()) {
      for (const auto& path : chainposet::write_dot_files(chainposet::build_levels(cfg), out_dir))
        std::cout << path << "\n";
      return 0;
    }
    if (dump->parsed()) {
      cfg.resolutions.resize(1);
      if (!cfg.depths.empty()) cfg.depths.resize(1);
      chainposet::dump_graph(chainposet::build_levels(cfg).front().graph, std::cout);
      return 0;
    }
  } catch (const chainposet::ConfigError& e) {
    std::cerr << config_path << ":" << e.line() << ":" << e.column() << ": error: "
              << std::string(e.what()).substr(std::string(e.what()).find(": ") + 2) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
