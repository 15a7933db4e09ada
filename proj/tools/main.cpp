#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "log.hpp"
#include "sdk/errors.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::string> run_dir;
  std::optional<std::uint64_t> seed;
  std::string series;
  std::size_t top_n = 0;
};

sdkcli::RunConfig load_config(const GlobalOptions& opts) {
  sdkcli::RunConfig cfg = sdkcli::RunConfig::load(opts.config_path);
  if (opts.run_dir) {
    cfg.run_dir_override = opts.run_dir;
  }
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.synth.seed = *opts.seed;
  }
  return cfg;
}

void add_common_options(CLI::App* cmd, GlobalOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Path to the JSON run configuration")->required();
  cmd->add_option("--run-dir", opts.run_dir,
                  "Run directory (default: <output_dir>/run-<config hash>)");
  cmd->add_option("--seed", opts.seed, "Override the configured seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sdk - grid-level spectrum demand estimation toolkit"};
  app.require_subcommand(1);

  GlobalOptions opts;

  struct Entry {
    const char* name;
    const char* help;
    void (*run)(const sdkcli::RunConfig&);
  };
  const Entry entries[] = {
      {"synth", "Generate a synthetic city dataset", sdkcli::cmd_synth},
      {"grid", "Build the analysis grid and write grid.json", sdkcli::cmd_grid},
      {"proxy", "Compute the weighted deployed-bandwidth proxy", sdkcli::cmd_proxy},
      {"indicator", "Compute the traffic-derived demand indicator", sdkcli::cmd_indicator},
      {"validate-proxy", "OLS validation of the proxy against the indicator",
       sdkcli::cmd_validate_proxy},
      {"features", "Rasterize feature sources into features.csv", sdkcli::cmd_features},
      {"rank", "Ensemble feature importance ranking", sdkcli::cmd_rank},
      {"split", "Spatially clustered train/test split", sdkcli::cmd_split},
      {"train", "Fit the configured models and write artifacts", sdkcli::cmd_train},
      {"evaluate", "Recompute and report metrics for all artifacts", sdkcli::cmd_evaluate},
  };
  for (const auto& entry : entries) {
    CLI::App* cmd = app.add_subcommand(entry.name, entry.help);
    add_common_options(cmd, opts);
    cmd->callback([&opts, run = entry.run]() { run(load_config(opts)); });
  }
  {
    CLI::App* cmd = app.add_subcommand("reduce", "Re-train on the top-N most important features");
    add_common_options(cmd, opts);
    cmd->add_option("--top-n", opts.top_n, "Feature count (default: config reduce.top_n)");
    cmd->callback([&opts]() { sdkcli::cmd_reduce(load_config(opts), opts.top_n); });
  }
  {
    CLI::App* cmd = app.add_subcommand("heatmap", "Export a per-cell series as GeoJSON polygons");
    add_common_options(cmd, opts);
    cmd->add_option("--series", opts.series, "Series name, e.g. proxy or indicator")->required();
    cmd->callback([&opts]() { sdkcli::cmd_heatmap(load_config(opts), opts.series); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  } catch (const sdk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
