#include "hatlab/catalog.hpp"
#include "hatlab/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hatlab;

namespace {

enum ExitCode { ok = 0, usage = 1, numeric = 2, io = 3 };

struct Flags {
  std::string config;
  ConfigValues values;
};

void add_common(CLI::App* cmd, Flags& flags, bool with_experiment) {
  auto opt = [&](const std::string& name, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        name, [&flags, key](const std::string& v) { flags.values[key] = v; }, help);
  };
  if (with_experiment) opt("--experiment", "experiment", "experiment id (EXP-A .. EXP-H)");
  opt("--f", "f", "function spec, see `hatlab catalog`");
  opt("--t", "t", "point: scalar, comma list or a:b:n grid");
  opt("--order", "order", "series order N");
  opt("--bits", "bits", "mantissa bits (default 256)");
  opt("--guard", "guard", "guard bits (default 32)");
  opt("--delta", "delta", "classification band (default 0.1)");
  opt("--format", "format", "csv or json");
  opt("--out", "out", "output path (default stdout)");
  cmd->add_option("--config", flags.config, "flat key = value config file");
}

ExperimentConfig load(const Flags& flags) {
  const ConfigValues file = flags.config.empty() ? ConfigValues{} : read_config_file(flags.config);
  return resolve_config(file, flags.values);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hatlab: high-precision laboratory for the series sum (-1)^n t^n f^(n)(t)/n!"};
  app.require_subcommand(1);
  Flags flags;
  auto* run = app.add_subcommand("run", "run a registered experiment");
  add_common(run, flags, true);
  auto* catalog = app.add_subcommand("catalog", "list function specs and experiments");
  auto* classify = app.add_subcommand("classify", "classify single points");
  add_common(classify, flags, false);
  auto* radius = app.add_subcommand("radius", "estimate the Taylor radius at single points");
  add_common(radius, flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (catalog->parsed()) {
      for (const auto& e : catalog_entries()) std::cout << e.grammar << "\n    " << e.description << "\n";
      std::cout << "\nexperiments:\n";
      for (const auto& e : experiments()) {
        std::cout << "  " << e.id << (e.exploratory ? " [exploratory] " : " ") << e.title << "\n";
      }
      return ok;
    }
    const ExperimentConfig cfg = load(flags);
    ExperimentResult result = run->parsed() ? run_experiment(cfg)
                              : classify->parsed() ? classify_command(cfg)
                                                   : radius_command(cfg);
    emit(result, cfg.format, cfg.out);
    return ok;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return io;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return numeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return numeric;
  }
}
