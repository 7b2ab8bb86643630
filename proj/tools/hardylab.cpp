// hardylab: configuration-driven runs of the distance, Hardy and spectral pipelines.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "hardylab/config.hpp"
#include "hardylab/errors.hpp"
#include "hardylab/report.hpp"
#include "hardylab/run.hpp"

namespace {

using namespace hardylab;

int report_failure(const std::string& command, const std::string& code, const std::string& message,
                   const std::optional<std::string>& out_dir) {
  std::cerr << "hardylab: " << message << "\n";
  if (out_dir) {
    try {
      auto path = (std::filesystem::path(*out_dir) / (command + ".json")).string();
      report::write_atomic(path, report::error_report(command, code, message).dump(2) + "\n");
    } catch (const Error& e) {
      std::cerr << "hardylab: " << e.what() << "\n";
    }
  }
  return run::kExitError;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for degenerate elliptic forms with distance weights"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> formats;
  bool dry_run = false;

  const char* commands[][2] = {
      {"distance", "Distance to the boundary, its gradient and -Laplacian at a point"},
      {"hardy", "Hardy constants, lambda bound and certification ladder"},
      {"spectrum", "Smallest eigenpairs of a form against a weight"},
      {"persson", "Persson exhaustion sequence over boundary strips"},
      {"criteria", "Pointwise and form-level closability criteria"},
      {"diagnose", "Staged discreteness diagnostic"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run specification (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "Random seed (overrides [numerics] seed)");
    sub->add_option("--format", formats, "Comma-separated output formats: json, csv");
    sub->add_flag("--dry-run", dry_run, "Validate the config and build meshes without solving");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return run::kExitError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const config::Command command = *config::parse_command(name);

  config::RunConfig cfg;
  try {
    cfg = config::load_config(config_path);
    if (out_dir) cfg.output.dir = *out_dir;
    if (seed) cfg.numerics.seed = *seed;
    if (formats) config::set_formats(cfg.output, *formats);
  } catch (const Error& e) {
    return report_failure(name, std::string(to_string(e.code())), e.what(), out_dir);
  }

  try {
    run::Outcome outcome = run::execute(command, cfg, dry_run);
    const auto& rep = outcome.report;
    std::cout << name << ": " << rep.at("status").get<std::string>() << "\n";
    if (rep.contains("error"))
      std::cerr << "hardylab: " << rep["error"]["message"].get<std::string>() << "\n";
    for (const auto& f : outcome.files) std::cout << "  wrote " << f << "\n";
    return outcome.exit_code;
  } catch (const Error& e) {
    return report_failure(name, std::string(to_string(e.code())), e.what(), cfg.output.dir);
  }
}
