#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stickycir/config.hpp"
#include "stickycir/diagnostics.hpp"
#include "stickycir/resolvent.hpp"

namespace stickycir {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3, kExitPartial = 4 };

struct RunOptions {
  std::optional<std::string> out_dir;  // overrides config.output_dir
  std::optional<std::uint64_t> seed;   // overrides config.master_seed
  std::size_t threads = 0;             // 0: hardware concurrency
  bool no_trace = false;               // skip samples.csv
  bool parallel_cells = false;         // run several cells at once
};

struct Cell {
  std::string potential;
  double mu;
  double alpha;
  Algorithm algorithm;
};

// potentials x mu x alpha x algorithms, outermost first.
std::vector<Cell> expand_grid(const ExperimentConfig& config);

struct CellResult {
  ExperimentRow row;
  std::vector<ChainRecord> chains;
};

// Runs every chain of one cell. Chain c of cell k is seeded with
// derive_seed(master_seed, {k, c}).
CellResult run_cell(const ExperimentConfig& config, const Cell& cell, std::size_t cell_index,
                    std::uint64_t master_seed, std::size_t threads, TableCache& cache);

// Atom mass of the tilted invariant law for the cell's potential and mu.
double theory_atom(const ExperimentConfig& config, const std::string& potential, double mu);

// CSV writers (17 significant digits, header first).
void write_theory_csv(std::ostream& os, const ExperimentConfig& config);
void write_density_csv(std::ostream& os, const ExperimentConfig& config, std::size_t points = 512);
void write_rows_header(std::ostream& os);
void write_row(std::ostream& os, const ExperimentRow& row);
void write_timing_header(std::ostream& os);
void write_timing(std::ostream& os, const ExperimentRow& row);
void write_samples(std::ostream& os, const std::vector<ChainRecord>& chains);
void write_histogram_csv(std::ostream& os, const ExperimentRow& row, const Histogram& h);
std::string format_double(double x);

// Subcommands. Each returns a process exit code and writes into the output
// directory; errors are reported on stderr.
int cmd_invariant(const ExperimentConfig& config, const RunOptions& options);
int cmd_sample(const ExperimentConfig& config, Algorithm algorithm, const RunOptions& options);
int cmd_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace stickycir
