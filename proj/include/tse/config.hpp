#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tse/lwr_sim.hpp"
#include "tse/physics.hpp"
#include "tse/train.hpp"

namespace tse {

enum class Mode { pidl, dl };
const char* to_string(Mode m);

/// Everything one experiment needs. The text form is flat `key = value`
/// lines with dotted section names, for example `grid.n_x = 500`.
struct ExperimentConfig {
    Grid grid;
    FdParams fd;
    InitialCondition ic;
    Boundary boundary = Boundary::closed;
    SensorLayout sensors;
    std::size_t samples = 250;
    double noise_std = 0.0;
    TrainConfig train;
    Mode mode = Mode::pidl;

    std::uint64_t seed = 0;
    std::string label;  // empty: derived from the mode ("PIDL" / "DL")
    std::filesystem::path out_dir = "out";
    std::filesystem::path dataset;  // empty: <out_dir>/data/velocity.csv
    bool auto_generate = true;
    std::filesystem::path checkpoint;  // evaluate input; empty: the train output

    std::vector<std::size_t> sweep_sizes{250};
    std::vector<std::uint64_t> sweep_seeds{0, 1, 2};
    std::vector<Mode> sweep_modes{Mode::pidl, Mode::dl};

    /// Checks ranges and cross-field consistency. Throws ConfigError.
    void validate() const;

    std::string run_label() const;
    std::filesystem::path dataset_path() const;
};

/// Applies one `key = value` assignment. Throws ConfigError naming the key if
/// it is unknown or the value does not parse.
void set_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses config text on top of `base`. Blank lines and `#` comments are
/// ignored; a key given twice is an error.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// `key=value` override as given on the command line.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// Canonical text, every key in a fixed order. parse_config(to_text(c))
/// reproduces c exactly.
std::string to_text(const ExperimentConfig& config);

/// SHA-256 of the canonical text minus the output location, so moving the
/// output directory does not change the hash.
std::string config_hash(const ExperimentConfig& config);

/// All recognised keys in canonical order.
std::vector<std::string> config_keys();

}  // namespace tse
