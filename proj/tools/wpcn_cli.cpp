// wpcn: analytical model, slot simulator and exact oracle for distributed
// WET/WIT scheduling, driven by experiment config files.
//
//   wpcn analyze  --config access-sweep.ini --out access-sweep.csv
//   wpcn simulate --preset eda --out eda.csv --slots 10000000
//   wpcn oracle   --preset small --out small.csv
//   wpcn compare  --preset population --out population.csv
//   wpcn show-config --preset baseline

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "wpcn/config.hpp"
#include "wpcn/errors.hpp"
#include "wpcn/experiments.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParseError = 2,
  kGuardError = 3,
  kConvergenceError = 4,
};

struct Options {
  std::string config_path;
  std::string preset;
  std::string out;
  std::string eda_out;
  std::string extra_out;
  std::string summary_out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> slots;
  std::optional<std::uint64_t> burn_in;
};

wpcn::ExperimentConfig load(const Options& opts) {
  wpcn::ExperimentConfig config = opts.preset.empty()
                                      ? wpcn::load_config(opts.config_path)
                                      : wpcn::parse_config(wpcn::preset_text(opts.preset));
  if (opts.seed) config.seed = *opts.seed;
  if (opts.slots) config.slots = *opts.slots;
  if (opts.burn_in) config.burn_in = *opts.burn_in;
  wpcn::validate(config);
  return config;
}

// "" or "-" means stdout.
void write(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw wpcn::ConfigError(path, "cannot open output file");
  out << text;
}

// results.csv -> results.<tag>.csv
std::string sibling(const std::string& path, const std::string& tag) {
  if (path.empty() || path == "-") return {};
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return path + "." + tag + ".csv";
  }
  return path.substr(0, dot) + "." + tag + path.substr(dot);
}

std::string resolve_out(const Options& opts, const wpcn::ExperimentConfig& config) {
  return opts.out.empty() ? config.output : opts.out;
}

void write_side(const std::string& explicit_path, const std::string& out, const std::string& tag,
                const std::string& text) {
  const std::string path = explicit_path.empty() ? sibling(out, tag) : explicit_path;
  if (!path.empty()) write(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed WET/WIT scheduling: analysis, simulation and exact oracle"};
  app.require_subcommand(1);
  Options opts;

  auto add_source = [&opts](CLI::App* cmd) {
    auto* cfg = cmd->add_option("--config", opts.config_path, "Experiment config file")
                    ->check(CLI::ExistingFile);
    auto* pre = cmd->add_option("--preset", opts.preset,
                                fmt::format("Built-in config ({})", fmt::join(wpcn::preset_names(), ", ")));
    cfg->excludes(pre);
    cmd->add_option("--out", opts.out, "Output CSV path (default: config output, else stdout)");
  };

  auto* analyze = app.add_subcommand("analyze", "Fixed-point throughput model over the config grid");
  add_source(analyze);

  auto* simulate = app.add_subcommand("simulate", "Slot-level protocol simulation");
  add_source(simulate);
  simulate->add_option("--seed", opts.seed, "Override the simulation seed");
  simulate->add_option("--slots", opts.slots, "Override the number of tallied slots");
  simulate->add_option("--burn-in", opts.burn_in, "Override the number of burn-in slots");
  simulate->add_option("--eda-out", opts.eda_out, "Per-state WET observation CSV (default: <out>.eda.csv)");

  auto* oracle = app.add_subcommand("oracle", "Exact joint-chain analysis for small networks");
  add_source(oracle);
  oracle->add_option("--conditionals-out", opts.extra_out,
                     "Exact per-state WET conditionals (default: <out>.conditionals.csv)");

  auto* compare = app.add_subcommand("compare", "Analysis, simulation and oracle side by side");
  add_source(compare);
  compare->add_option("--seed", opts.seed, "Override the simulation seed");
  compare->add_option("--slots", opts.slots, "Override the number of tallied slots");
  compare->add_option("--burn-in", opts.burn_in, "Override the number of burn-in slots");
  compare->add_option("--errors-out", opts.extra_out, "Relative errors CSV (default: <out>.errors.csv)");
  compare->add_option("--summary-out", opts.summary_out, "Argmax summary CSV (default: <out>.summary.csv)");

  auto* show = app.add_subcommand("show-config", "Print a config in canonical form");
  show->add_option("--config", opts.config_path, "Experiment config file")->check(CLI::ExistingFile);
  show->add_option("--preset", opts.preset, "Built-in config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (opts.config_path.empty() && opts.preset.empty()) {
      throw wpcn::ConfigError("", "one of --config or --preset is required");
    }
    const auto config = load(opts);
    const auto out = resolve_out(opts, config);

    if (*analyze) {
      write(out, wpcn::to_csv(wpcn::run_analyze(config).rows));
    } else if (*simulate) {
      const auto result = wpcn::run_simulate(config);
      write(out, wpcn::to_csv(result.rows));
      write_side(opts.eda_out, out, "eda", wpcn::to_csv(result.eda));
      write_side("", out, "flatness", wpcn::to_csv(result.flatness));
      write_side("", out, "tally", wpcn::to_csv(result.tallies));
    } else if (*oracle) {
      const auto result = wpcn::run_oracle(config);
      write(out, wpcn::to_csv(result.rows));
      write_side(opts.extra_out, out, "conditionals", wpcn::to_csv(result.conditionals));
    } else if (*compare) {
      const auto result = wpcn::run_compare(config);
      write(out, wpcn::to_csv(result.rows));
      write_side(opts.extra_out, out, "errors", wpcn::to_csv(result.errors));
      write_side(opts.summary_out, out, "summary", wpcn::to_csv(result.summary));
      for (const auto& s : result.skipped_oracle) {
        std::cerr << "oracle skipped (state space above guard): " << s << "\n";
      }
    } else if (*show) {
      std::cout << wpcn::to_text(config);
    }
  } catch (const wpcn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kParseError;
  } catch (const wpcn::SizeError& e) {
    std::cerr << "size error: " << e.what() << "\n";
    return kGuardError;
  } catch (const wpcn::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kConvergenceError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
