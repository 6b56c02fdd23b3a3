#include "tse/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "tse/errors.hpp"
#include "tse/io.hpp"
#include "tse/metrics.hpp"
#include "tse/random.hpp"

namespace tse {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct CostNodes {
    NodeId j_dl;
    NodeId j_phy;  // invalid when there are no collocation points
    NodeId total;
};

Eigen::MatrixXd observation_inputs(const ObservationSet& obs, const Normalizer& norm) {
    Eigen::MatrixXd in(2, static_cast<Eigen::Index>(obs.size()));
    for (std::size_t k = 0; k < obs.size(); ++k) {
        in(0, k) = norm.x(obs.points[k].x);
        in(1, k) = norm.t(obs.points[k].t);
    }
    return in;
}

Eigen::MatrixXd observation_targets(const ObservationSet& obs) {
    Eigen::MatrixXd v(1, static_cast<Eigen::Index>(obs.size()));
    for (std::size_t k = 0; k < obs.size(); ++k) v(0, k) = obs.points[k].v;
    return v;
}

Eigen::MatrixXd collocation_inputs(const CollocationSet& coll, std::size_t first,
                                   std::size_t count, const Normalizer& norm) {
    Eigen::MatrixXd in(2, static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) {
        const auto& c = coll.points[(first + k) % coll.size()];
        in(0, k) = norm.x(c.x);
        in(1, k) = norm.t(c.t);
    }
    return in;
}

NodeId record_data_cost(Tape& tape, const MlpNetwork& net, const NetworkNodes& params,
                        const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                        const Normalizer& norm) {
    const NetworkOutput out = record(tape, net, params, inputs, false);
    const NodeId v = tape.scale(out.output, norm.v_free);
    return tape.mean(tape.square(tape.sub(v, tape.constant(targets))));
}

NodeId record_physics_cost(Tape& tape, const MlpNetwork& net, const NetworkNodes& params,
                           const Eigen::MatrixXd& inputs, const FdParams& p,
                           const Normalizer& norm) {
    const NetworkOutput out = record(tape, net, params, inputs, true);
    const NodeId v = tape.scale(out.output, norm.v_free);
    const NodeId v_x = tape.scale(out.d_input0, norm.v_free * norm.x_scale());
    const NodeId v_t = tape.scale(out.d_input1, norm.v_free * norm.t_scale());
    // rho_max (1 - 2 v / v_free) v_x - (rho_max / v_free) v_t
    const NodeId coeff = tape.add_scalar(tape.scale(v, -2.0 * p.rho_max / p.v_free), p.rho_max);
    const NodeId r = tape.sub(tape.mul(coeff, v_x), tape.scale(v_t, p.rho_max / p.v_free));
    return tape.mean(tape.square(r));
}

CostNodes record_costs(Tape& tape, const MlpNetwork& net, const Eigen::MatrixXd& obs_in,
                       const Eigen::MatrixXd& obs_v, const Eigen::MatrixXd& coll_in,
                       double alpha, const FdParams& p, const Normalizer& norm) {
    const NetworkNodes params = bind_parameters(tape, net);
    CostNodes c;
    c.j_dl = record_data_cost(tape, net, params, obs_in, obs_v, norm);
    c.total = c.j_dl;
    if (coll_in.cols() > 0) {
        c.j_phy = record_physics_cost(tape, net, params, coll_in, p, norm);
        if (alpha != 0.0) c.total = tape.add(c.j_dl, tape.scale(c.j_phy, alpha));
    }
    return c;
}

CostBreakdown read_costs(const Tape& tape, const CostNodes& c) {
    CostBreakdown b;
    b.j_dl = tape.scalar(c.j_dl);
    b.j_phy = c.j_phy.valid() ? tape.scalar(c.j_phy) : 0.0;
    b.total = tape.scalar(c.total);
    return b;
}

std::string describe(const CostBreakdown& c) {
    return "j_dl=" + format_double17(c.j_dl) + " j_phy=" + format_double17(c.j_phy) +
           " j_total=" + format_double17(c.total);
}

}  // namespace

SensorLayout SensorLayout::equally_spaced(const Grid& grid, int n) {
    if (n < 1) throw ConfigError("sensors: count must be at least 1");
    SensorLayout layout;
    layout.positions.clear();
    const double length = grid.x_max - grid.x_min;
    for (int k = 0; k < n; ++k) layout.positions.push_back(grid.x_min + (k + 0.5) * length / n);
    return layout;
}

std::vector<int> SensorLayout::cells(const Grid& grid) const {
    if (positions.empty()) throw ConfigError("sensors: no positions given");
    std::vector<int> out;
    out.reserve(positions.size());
    for (double x : positions) {
        if (!(x > grid.x_min && x < grid.x_max)) {
            throw ConfigError("sensors: position " + format_double(x) + " is not inside the road");
        }
        const int cell = grid.cell_of(x);
        if (!out.empty() && cell <= out.back()) {
            throw ConfigError("sensors: positions must be increasing and in distinct cells (at " +
                              format_double(x) + ")");
        }
        out.push_back(cell);
    }
    return out;
}

ObservationSet sample_observations(const VelocityField& field, const SensorLayout& layout,
                                   std::size_t n_samples, std::uint64_t seed, double noise_std) {
    const Grid& grid = field.grid;
    const std::vector<int> cells = layout.cells(grid);
    const std::size_t n_t = static_cast<std::size_t>(grid.n_t);
    const std::size_t lattice = cells.size() * n_t;
    if (n_samples > lattice) {
        throw ConfigError("observations: " + std::to_string(n_samples) +
                          " samples requested but the sensor lattice has " +
                          std::to_string(lattice) + " points");
    }
    if (!(noise_std >= 0.0)) throw ConfigError("observations: noise std must be non-negative");

    // Partial Fisher-Yates over lattice indices k = sensor * n_t + time.
    std::vector<std::size_t> index(lattice);
    std::iota(index.begin(), index.end(), std::size_t{0});
    Rng rng(seed, Stream::observations);
    for (std::size_t i = 0; i < n_samples; ++i) {
        std::swap(index[i], index[i + rng.index(lattice - i)]);
    }
    index.resize(n_samples);
    std::sort(index.begin(), index.end());

    Rng noise(seed, Stream::noise);
    ObservationSet obs;
    obs.points.reserve(n_samples);
    for (std::size_t k : index) {
        const int cell = cells[k / n_t];
        const int j = static_cast<int>(k % n_t);
        double v = field.values(cell, j);
        if (noise_std > 0.0) v += noise_std * noise.normal();
        obs.points.push_back({grid.x_center(cell), grid.t_at(j), v});
    }
    return obs;
}

CollocationSet sample_collocation(const Grid& grid, std::size_t n_points, std::uint64_t seed) {
    Rng rng(seed, Stream::collocation);
    CollocationSet coll;
    coll.points.reserve(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double x = rng.uniform(grid.x_min, grid.x_max);
        const double t = rng.uniform(grid.t_min, grid.t_max);
        coll.points.push_back({x, t});
    }
    return coll;
}

double data_cost(const MlpNetwork& net, const ObservationSet& obs, const Normalizer& norm) {
    if (obs.size() == 0) throw ContractError("data_cost: no observations");
    Tape tape;
    const NetworkNodes params = bind_parameters(tape, net);
    return tape.scalar(record_data_cost(tape, net, params, observation_inputs(obs, norm),
                                        observation_targets(obs), norm));
}

double physics_cost(const MlpNetwork& net, const CollocationSet& coll, const FdParams& p,
                    const Normalizer& norm) {
    if (coll.size() == 0) throw ContractError("physics_cost: no collocation points");
    Tape tape;
    const NetworkNodes params = bind_parameters(tape, net);
    return tape.scalar(record_physics_cost(
        tape, net, params, collocation_inputs(coll, 0, coll.size(), norm), p, norm));
}

CostBreakdown total_cost(const MlpNetwork& net, const ObservationSet& obs,
                         const CollocationSet& coll, double alpha, const FdParams& p,
                         const Normalizer& norm) {
    if (obs.size() == 0) throw ContractError("total_cost: no observations");
    Tape tape;
    const CostNodes c = record_costs(tape, net, observation_inputs(obs, norm),
                                     observation_targets(obs),
                                     collocation_inputs(coll, 0, coll.size(), norm), alpha, p, norm);
    return read_costs(tape, c);
}

void TrainConfig::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("train.alpha must be >= 0");
    if (!(cost_threshold > 0.0)) throw ConfigError("train.cost_threshold must be > 0");
    if (max_epochs < 0) throw ConfigError("train.max_epochs must be >= 0");
    if (layer_sizes.size() < 2 || layer_sizes.front() != 2 || layer_sizes.back() != 1) {
        throw ConfigError("train.layers must start with 2 inputs and end with 1 output");
    }
    for (int s : layer_sizes) {
        if (s < 1) throw ConfigError("train.layers: every layer needs at least one unit");
    }
    if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("train.beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("train.beta2 must be in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("train.epsilon must be > 0");
    if (eval_every < 0) throw ConfigError("train.eval_every must be >= 0");
}

const char* to_string(TerminatedBy t) {
    return t == TerminatedBy::threshold ? "threshold" : "max_epochs";
}

TrainResult train(const TrainConfig& config, const ObservationSet& obs,
                  const CollocationSet& coll, const FdParams& p, const Normalizer& norm,
                  const VelocityField* truth) {
    config.validate();
    if (obs.size() == 0) throw ContractError("train: no observations");

    const Eigen::MatrixXd obs_in = observation_inputs(obs, norm);
    const Eigen::MatrixXd obs_v = observation_targets(obs);
    const std::size_t n_c = coll.size();
    const bool batched = config.collocation_batch > 0 && config.collocation_batch < n_c;
    const std::size_t batch = batched ? config.collocation_batch : n_c;
    const Eigen::MatrixXd full_coll = batched ? Eigen::MatrixXd() : collocation_inputs(coll, 0, n_c, norm);

    TrainResult result;
    result.net = initialize(config.layer_sizes, config.seed);
    AdamState adam = make_adam(result.net, config.learning_rate, config.beta1, config.beta2,
                               config.epsilon);

    const Clock::time_point start = Clock::now();
    double excluded = 0.0;  // time spent on validation, not counted as training
    const auto elapsed = [&] { return seconds_since(start) - excluded; };
    const auto validate_at = [&](long epoch) {
        if (!truth) return;
        const Clock::time_point t0 = Clock::now();
        const double e = relative_error(evaluate_network(result.net, truth->grid, p), *truth);
        result.validation.push_back({epoch, e});
        excluded += seconds_since(t0);
    };

    const auto costs_at = [&](long epoch, Tape& tape) {
        const Eigen::MatrixXd coll_in =
            batched ? collocation_inputs(coll, static_cast<std::size_t>(epoch) * batch, batch, norm)
                    : full_coll;
        CostNodes nodes;
        try {
            nodes = record_costs(tape, result.net, obs_in, obs_v, coll_in, config.alpha, p, norm);
        } catch (const NumericError& e) {
            throw NumericError("epoch " + std::to_string(epoch) + ": " + e.what());
        }
        const CostBreakdown c = read_costs(tape, nodes);
        if (!std::isfinite(c.total) || !std::isfinite(c.j_dl) || !std::isfinite(c.j_phy)) {
            throw NumericError("non-finite cost at epoch " + std::to_string(epoch) + ": " +
                               describe(c));
        }
        return std::make_pair(c, nodes.total);
    };

    bool stopped = false;
    for (long epoch = 0; epoch < config.max_epochs; ++epoch) {
        if (config.eval_every > 0 && epoch % config.eval_every == 0) validate_at(epoch);
        Tape tape;
        const auto [c, root] = costs_at(epoch, tape);
        result.history.push_back({epoch, c.j_dl, c.j_phy, c.total, elapsed()});
        if (c.total < config.cost_threshold) {
            result.final_cost = c;
            result.epochs_run = epoch;
            result.terminated_by = TerminatedBy::threshold;
            stopped = true;
            break;
        }
        const ParameterSet grads = parameter_gradient(tape, root, result.net);
        adam_step(adam, result.net.layers, grads);
    }
    if (!stopped) {
        Tape tape;
        result.final_cost = costs_at(config.max_epochs, tape).first;
        result.epochs_run = config.max_epochs;
        result.terminated_by = TerminatedBy::max_epochs;
    }
    result.wall_seconds = elapsed();
    if (truth && (result.validation.empty() || result.validation.back().epoch != result.epochs_run)) {
        validate_at(result.epochs_run);
    }
    return result;
}

std::optional<long> epochs_to_reach(const std::vector<ValidationRow>& validation, double level) {
    for (const auto& row : validation) {
        if (row.relative_error <= level) return row.epoch;
    }
    return std::nullopt;
}

std::string history_csv(const std::vector<HistoryRow>& history) {
    std::ostringstream os;
    os << "epoch,j_dl,j_phy,j_total,elapsed_seconds\n";
    for (const auto& h : history) {
        os << h.epoch << ',' << format_double17(h.j_dl) << ',' << format_double17(h.j_phy) << ','
           << format_double17(h.j_total) << ',' << format_double(h.elapsed_seconds) << '\n';
    }
    return os.str();
}

std::string validation_csv(const std::vector<ValidationRow>& validation) {
    std::ostringstream os;
    os << "epoch,relative_error\n";
    for (const auto& v : validation) os << v.epoch << ',' << format_double17(v.relative_error) << '\n';
    return os.str();
}

}  // namespace tse
