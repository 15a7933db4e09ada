#pragma once

#include <string>

#include "config.hpp"

namespace sdkcli {

// One function per subcommand. Each reads its declared inputs from the
// dataset and run directories, writes its outputs into the run directory,
// and prints a single machine-parsable summary line to stdout.
void cmd_synth(const RunConfig& cfg);
void cmd_grid(const RunConfig& cfg);
void cmd_proxy(const RunConfig& cfg);
void cmd_indicator(const RunConfig& cfg);
void cmd_validate_proxy(const RunConfig& cfg);
void cmd_features(const RunConfig& cfg);
void cmd_rank(const RunConfig& cfg);
void cmd_split(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_reduce(const RunConfig& cfg, std::size_t top_n_override);
void cmd_heatmap(const RunConfig& cfg, const std::string& series);

}  // namespace sdkcli
