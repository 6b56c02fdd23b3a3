#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tse/tape.hpp"

namespace tse {

struct LayerParams {
    Eigen::MatrixXd weight;  // fan_out x fan_in
    Eigen::VectorXd bias;    // fan_out
};

/// Per-layer tensors; used for parameters, gradients, and Adam moments alike.
using ParameterSet = std::vector<LayerParams>;

/// Feed-forward tanh network mapping normalized (x, t) to a normalized speed.
/// Hidden layers use tanh, the output layer is affine.
struct MlpNetwork {
    std::vector<int> layer_sizes;  // {2, hidden..., 1}
    ParameterSet layers;

    /// Throws ContractError on bad sizes or shapes, NumericError on
    /// non-finite parameters.
    void validate() const;
    std::size_t parameter_count() const;
    std::vector<double> flatten() const;
    void assign(const std::vector<double>& flat);

    bool operator==(const MlpNetwork& other) const;
};

/// Glorot-uniform weights, zero biases. Reproducible from `seed`.
MlpNetwork initialize(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Tape slots are 2*layer for the weight and 2*layer + 1 for the bias.
int weight_slot(int layer);
int bias_slot(int layer);

/// Parameter leaves of one network on one tape.
struct NetworkNodes {
    std::vector<NodeId> weights;
    std::vector<NodeId> biases;
};

NetworkNodes bind_parameters(Tape& tape, const MlpNetwork& net);

/// Output nodes of a batched evaluation. `d_input0` and `d_input1` are the
/// derivatives of `output` with respect to the two inputs; they are only set
/// when tangents were requested.
struct NetworkOutput {
    NodeId output;
    NodeId d_input0;
    NodeId d_input1;
};

/// Records the network applied to `inputs` (2 x N) on `tape`. With
/// `with_input_tangents`, forward-mode tangents along both input directions
/// are recorded next to the primal values, so they can be differentiated
/// with respect to the parameters by Tape::gradient. Throws NumericError
/// naming the layer if any intermediate value is non-finite.
NetworkOutput record(Tape& tape, const MlpNetwork& net, const NetworkNodes& params,
                     const Eigen::MatrixXd& inputs, bool with_input_tangents);

struct ForwardResult {
    double value;
    Tape tape;
    NodeId output;
};

struct InputGradientResult {
    double d_x;
    double d_t;
    Tape tape;
    NodeId d_x_node;
    NodeId d_t_node;
};

/// Single-point evaluation on normalized inputs.
ForwardResult forward(const MlpNetwork& net, double x_norm, double t_norm);

/// Exact derivatives of the output with respect to both normalized inputs.
InputGradientResult input_gradients(const MlpNetwork& net, double x_norm, double t_norm);

/// d(root)/d(theta) for every parameter, shaped like `net.layers`. Slots
/// not reached by the root get zeros.
ParameterSet parameter_gradient(const Tape& tape, NodeId root, const MlpNetwork& net);

/// Convenience overload: the root is the last node on the tape.
ParameterSet parameter_gradient(const Tape& tape, const MlpNetwork& net);

/// Tape-free batched evaluation, row vector of outputs for `inputs` (2 x N).
Eigen::RowVectorXd predict(const MlpNetwork& net, const Eigen::MatrixXd& inputs);

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    ParameterSet first_moment;
    ParameterSet second_moment;
};

AdamState make_adam(const MlpNetwork& net, double learning_rate = 1e-3, double beta1 = 0.9,
                    double beta2 = 0.999, double epsilon = 1e-8);

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads);

// Checkpoint text format, version 1:
//
//   tse-mlp-checkpoint 1
//   layers <n> <size_0> ... <size_n-1>
//   activation tanh
//   weight <layer> <rows> <cols>
//   <row-major values, one row per line>
//   bias <layer> <rows>
//   <values>
//   ...
//   end
//
// Values are printed with 17 significant digits and reload bit-exactly.
void save_checkpoint(std::ostream& out, const MlpNetwork& net);
MlpNetwork load_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const MlpNetwork& net);
MlpNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace tse
