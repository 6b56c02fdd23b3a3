#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tse/lwr_sim.hpp"
#include "tse/mlp.hpp"
#include "tse/normalizer.hpp"
#include "tse/physics.hpp"

namespace tse {

/// Loop detector positions in meters.
struct SensorLayout {
    std::vector<double> positions{500.0, 1500.0, 2500.0, 3500.0, 4500.0};

    /// n equally spaced interior positions: x_min + (k + 1/2) L / n.
    static SensorLayout equally_spaced(const Grid& grid, int n);

    /// Cell index of each position. Throws ConfigError if a position is not
    /// strictly inside the road, or two positions share a cell or are out of
    /// order.
    std::vector<int> cells(const Grid& grid) const;
};

struct ObservationPoint {
    double x;  // m, a cell center
    double t;  // s, an output time
    double v;  // m/s
};

struct ObservationSet {
    std::vector<ObservationPoint> points;
    std::size_t size() const { return points.size(); }
};

struct CollocationPoint {
    double x;
    double t;
};

struct CollocationSet {
    std::vector<CollocationPoint> points;
    std::size_t size() const { return points.size(); }
};

/// Uniform sampling without replacement from the sensor x time lattice.
/// Points come back ordered by (sensor, time). `noise_std` > 0 adds Gaussian
/// measurement noise (m/s) from a separate random stream.
ObservationSet sample_observations(const VelocityField& field, const SensorLayout& layout,
                                   std::size_t n_samples, std::uint64_t seed,
                                   double noise_std = 0.0);

/// Uniform points on the closed space-time rectangle of `grid`.
CollocationSet sample_collocation(const Grid& grid, std::size_t n_points, std::uint64_t seed);

struct CostBreakdown {
    double j_dl = 0.0;
    double j_phy = 0.0;
    double total = 0.0;
};

/// Mean squared speed error over observations, in (m/s)^2.
double data_cost(const MlpNetwork& net, const ObservationSet& obs, const Normalizer& norm);

/// Mean squared LWR residual over collocation points.
double physics_cost(const MlpNetwork& net, const CollocationSet& coll, const FdParams& p,
                    const Normalizer& norm);

/// J_DL + alpha * J_PHY; the physics term is skipped when coll is empty.
CostBreakdown total_cost(const MlpNetwork& net, const ObservationSet& obs,
                         const CollocationSet& coll, double alpha, const FdParams& p,
                         const Normalizer& norm);

struct TrainConfig {
    double alpha = 1e5;
    std::size_t n_collocation = 2000;
    long max_epochs = 3000;
    double cost_threshold = 1e-4;
    std::uint64_t seed = 0;
    std::vector<int> layer_sizes{2, 20, 20, 20, 20, 1};
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Collocation points per step; 0 uses all of them (full batch).
    std::size_t collocation_batch = 0;
    /// Validation cadence in epochs when a truth field is supplied; 0 disables.
    long eval_every = 50;

    void validate() const;
};

enum class TerminatedBy { threshold, max_epochs };
const char* to_string(TerminatedBy t);

struct HistoryRow {
    long epoch;  // number of optimizer steps taken before these costs
    double j_dl;
    double j_phy;
    double j_total;
    double elapsed_seconds;
};

struct ValidationRow {
    long epoch;
    double relative_error;  // percent, against the truth field
};

struct TrainResult {
    MlpNetwork net;
    std::vector<HistoryRow> history;
    std::vector<ValidationRow> validation;
    CostBreakdown final_cost;
    double wall_seconds = 0.0;
    long epochs_run = 0;
    TerminatedBy terminated_by = TerminatedBy::max_epochs;
};

/// Full-batch Adam on J_DL + alpha J_PHY starting from initialize(layer_sizes,
/// seed). Stops as soon as the total cost drops below the threshold (no step
/// is taken on that epoch) or after max_epochs steps. When `truth` is given,
/// the relative error of the clamped estimate is recorded every eval_every
/// steps. Throws NumericError on a non-finite cost.
TrainResult train(const TrainConfig& config, const ObservationSet& obs,
                  const CollocationSet& coll, const FdParams& p, const Normalizer& norm,
                  const VelocityField* truth = nullptr);

/// First validation epoch at which the error is at or below `level` percent.
std::optional<long> epochs_to_reach(const std::vector<ValidationRow>& validation, double level);

/// `epoch,j_dl,j_phy,j_total,elapsed_seconds`
std::string history_csv(const std::vector<HistoryRow>& history);
/// `epoch,relative_error`
std::string validation_csv(const std::vector<ValidationRow>& validation);

}  // namespace tse
