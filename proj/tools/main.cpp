#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"
#include "wskde/capi.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::uint64_t replications = 0;
  unsigned jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory override");
  cmd->add_option("--seed", args.seed, "base seed override");
  cmd->add_option("--replications", args.replications,
                  "replication count override");
  cmd->add_option("--jobs", args.jobs,
                  "worker threads over replications (0 = auto)");
}

wskde_cli::Overrides to_overrides(const CLI::App* cmd, const CommonArgs& args) {
  wskde_cli::Overrides ov;
  ov.out_dir = args.out_dir;
  ov.has_seed = cmd->count("--seed") > 0;
  ov.seed = args.seed;
  ov.has_replications = cmd->count("--replications") > 0;
  ov.replications = args.replications;
  return ov;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wilson-score kernel density estimation experiments"};
  app.set_version_flag("--version", std::string("wskde ") + wskde_version());
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* coverage = app.add_subcommand(
      "coverage", "confidence-interval coverage across sample sizes");
  CLI::App* bo = app.add_subcommand(
      "bo", "confidence-bound-pruning optimization replications");
  CLI::App* estimate =
      app.add_subcommand("estimate", "one-shot estimates over a data file");
  CLI::App* peak_table = app.add_subcommand(
      "peak-table", "tally table from completed bo output directories");
  for (CLI::App* cmd : {coverage, bo, estimate, peak_table})
    add_common(cmd, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  const CLI::App* cmd = app.get_subcommands().front();
  const std::string kind =
      cmd->get_name() == "peak-table" ? "peak-table" : cmd->get_name();

  try {
    const wskde_cli::ExperimentConfig cfg = wskde_cli::load_config(
        args.config_path, kind, to_overrides(cmd, args));
    if (kind == "coverage")
      wskde_cli::run_coverage(cfg, args.jobs);
    else if (kind == "bo")
      wskde_cli::run_bo(cfg, args.jobs);
    else if (kind == "estimate")
      wskde_cli::run_estimate(cfg);
    else
      wskde_cli::emit_peak_table(cfg);
  } catch (const wskde_cli::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const wskde_cli::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
