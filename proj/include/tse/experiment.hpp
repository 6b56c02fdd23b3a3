#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tse/config.hpp"
#include "tse/metrics.hpp"
#include "tse/train.hpp"

namespace tse {

/// Ground truth written by cmd_generate into <out_dir>/data.
struct GenerateOutcome {
    Simulation simulation;
    std::filesystem::path dir;
};

/// Simulates the configured scenario and writes velocity.csv, density.csv,
/// their PGM heatmaps, config.txt and manifest.txt.
GenerateOutcome cmd_generate(const ExperimentConfig& config);

struct RunOutcome {
    RunReport report;
    TrainResult result;
    std::filesystem::path dir;
};

/// Trains one estimator. `Mode::dl` forces alpha = 0 and no collocation
/// points, leaving architecture, seed, optimizer and stopping rule as
/// configured. Artifacts go to <out_dir>/<label>.
RunOutcome cmd_train(const ExperimentConfig& config, Mode mode);

struct SweepRun {
    std::size_t sample_size = 0;
    std::uint64_t seed = 0;
    Mode mode = Mode::pidl;
    bool ok = false;
    std::string error;
    RunOutcome outcome;  // meaningful only when ok
};

struct SweepOutcome {
    std::vector<SweepRun> runs;
    ComparisonTable table;
    std::size_t failures = 0;
};

/// Every (sample size, seed, mode) cell of the configured sweep lists.
/// Failing cells are recorded and skipped. Writes runs/<cell>/..., runs.csv,
/// table.txt, table.csv and manifest.txt under out_dir. Throws ConfigError
/// on an empty list, before any run starts.
SweepOutcome cmd_sweep(const ExperimentConfig& config);

/// Reloads a checkpoint, evaluates it on the full grid and writes the dense
/// estimate, heatmaps and a summary to <out_dir>/<label>/evaluation.
RunReport cmd_evaluate(const ExperimentConfig& config);

/// Ground truth for training: simulated when auto_generate is set, else
/// read from the dataset path.
VelocityField load_ground_truth(const ExperimentConfig& config);

}  // namespace tse
