#pragma once

#include <string>
#include <vector>

#include "tse/lwr_sim.hpp"
#include "tse/mlp.hpp"
#include "tse/normalizer.hpp"

namespace tse {

/// Mean of squared cell differences. Throws ContractError on grid mismatch.
double mse_field(const VelocityField& estimate, const VelocityField& truth);

/// 100 * ||V - V_hat||_F / ||V||_F. Throws DomainError if truth is all zero.
double relative_error(const VelocityField& estimate, const VelocityField& truth);

/// Network evaluated at every cell center (x_i, t_j), converted to m/s and
/// clamped to [0, v_free].
VelocityField evaluate_network(const MlpNetwork& net, const Grid& grid, const FdParams& p);

struct RunReport {
    std::string label;  // "PIDL" or "DL"
    std::size_t sample_size = 0;
    double percent_data = 0.0;
    double j_dl = 0.0;
    double j_phy = 0.0;
    double j_total = 0.0;
    double relative_error = 0.0;  // percent
    double accuracy = 0.0;        // 100 - relative_error
    double wall_seconds = 0.0;
    long epochs_run = 0;
    std::string terminated_by;
    std::uint64_t seed = 0;
};

/// Fills the derived fields. The error is rounded to 1e-6 percent first so
/// accuracy + error == 100 holds exactly in every emitted file.
RunReport make_report(std::string label, std::size_t sample_size, const Grid& grid,
                      double relative_error_percent);

/// 100 * sample_size / (n_x * n_t).
double percent_data(std::size_t sample_size, const Grid& grid);

struct ComparisonTable {
    std::string text;
    std::string csv;
};

/// Plain-text table plus CSV twin. One sample size gives the
/// time/accuracy comparison layout (one row per model), several give the
/// sample size / % data / accuracy-per-model layout. With more than one
/// model, the better value in each comparison is marked with '*'. Reports
/// sharing a (label, sample size) are averaged.
ComparisonTable emit_comparison_table(const std::vector<RunReport>& reports);

/// `key = value` lines.
std::string report_summary(const RunReport& report);

}  // namespace tse
