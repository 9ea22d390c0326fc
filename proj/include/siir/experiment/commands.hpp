#pragma once

// The five CLI subcommands. Each writes one table through a TableWriter; the
// column sets are fixed per command.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "siir/experiment/config.hpp"
#include "siir/experiment/table.hpp"

namespace siir::experiment {

struct RunOptions {
  std::size_t threads = 1;
};

// --threads, then SPATIAL_IIR_THREADS, then the hardware concurrency.
std::size_t resolve_threads(std::optional<std::size_t> flag);

const std::vector<std::string>& command_names();
const std::vector<std::string>& columns_for(const std::string& command);

void cmd_pattern(const ExperimentConfig& cfg, TableWriter& out);
void cmd_fsll(const ExperimentConfig& cfg, TableWriter& out);
void cmd_estimate(const ExperimentConfig& cfg, TableWriter& out);
void cmd_sweep(const ExperimentConfig& cfg, TableWriter& out, const RunOptions& opt);
void cmd_fim(const ExperimentConfig& cfg, TableWriter& out);

// Builds the writer, runs the command and writes the trailer. On an exception
// the table is closed as incomplete and the exception propagates.
void run_command(const std::string& command, const ExperimentConfig& cfg, std::ostream& out, Format format,
                 const RunOptions& opt);

}  // namespace siir::experiment
