#include "tse/mlp.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tse/errors.hpp"
#include "tse/io.hpp"
#include "tse/random.hpp"

namespace tse {

namespace {

void require_finite(const Eigen::MatrixXd& m, int layer) {
    if (!m.allFinite()) {
        throw NumericError("non-finite value at layer " + std::to_string(layer));
    }
}

Eigen::MatrixXd unit_direction(int which, Eigen::Index batch) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, batch);
    d.row(which).setOnes();
    return d;
}

}  // namespace

void MlpNetwork::validate() const {
    if (layer_sizes.size() < 2) throw ContractError("mlp: need at least input and output sizes");
    if (layer_sizes.front() != 2) throw ContractError("mlp: input dimension must be 2");
    if (layer_sizes.back() != 1) throw ContractError("mlp: output dimension must be 1");
    if (layers.size() + 1 != layer_sizes.size()) throw ContractError("mlp: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        if (L.weight.rows() != layer_sizes[l + 1] || L.weight.cols() != layer_sizes[l] ||
            L.bias.size() != layer_sizes[l + 1]) {
            throw ContractError("mlp: parameter shape mismatch at layer " + std::to_string(l));
        }
        if (!L.weight.allFinite() || !L.bias.allFinite()) {
            throw NumericError("mlp: non-finite parameter at layer " + std::to_string(l));
        }
    }
}

std::size_t MlpNetwork::parameter_count() const {
    std::size_t n = 0;
    for (const auto& L : layers) n += L.weight.size() + L.bias.size();
    return n;
}

std::vector<double> MlpNetwork::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& L : layers) {
        for (Eigen::Index r = 0; r < L.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < L.weight.cols(); ++c) flat.push_back(L.weight(r, c));
        }
        for (Eigen::Index r = 0; r < L.bias.size(); ++r) flat.push_back(L.bias(r));
    }
    return flat;
}

void MlpNetwork::assign(const std::vector<double>& flat) {
    if (flat.size() != parameter_count()) throw ContractError("mlp: flat parameter size mismatch");
    std::size_t k = 0;
    for (auto& L : layers) {
        for (Eigen::Index r = 0; r < L.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < L.weight.cols(); ++c) L.weight(r, c) = flat[k++];
        }
        for (Eigen::Index r = 0; r < L.bias.size(); ++r) L.bias(r) = flat[k++];
    }
}

bool MlpNetwork::operator==(const MlpNetwork& other) const {
    if (layer_sizes != other.layer_sizes || layers.size() != other.layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].weight != other.layers[l].weight || layers[l].bias != other.layers[l].bias) {
            return false;
        }
    }
    return true;
}

MlpNetwork initialize(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    MlpNetwork net;
    net.layer_sizes = layer_sizes;
    if (layer_sizes.size() < 2) throw ContractError("mlp: need at least input and output sizes");
    for (int s : layer_sizes) {
        if (s < 1) throw ContractError("mlp: layer sizes must be positive");
    }
    Rng rng(seed, Stream::init);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        LayerParams L{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) L.weight(r, c) = rng.uniform(-bound, bound);
        }
        net.layers.push_back(std::move(L));
    }
    net.validate();
    return net;
}

int weight_slot(int layer) { return 2 * layer; }
int bias_slot(int layer) { return 2 * layer + 1; }

NetworkNodes bind_parameters(Tape& tape, const MlpNetwork& net) {
    NetworkNodes nodes;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const int li = static_cast<int>(l);
        nodes.weights.push_back(tape.parameter(net.layers[l].weight, weight_slot(li)));
        nodes.biases.push_back(tape.parameter(net.layers[l].bias, bias_slot(li)));
    }
    return nodes;
}

NetworkOutput record(Tape& tape, const MlpNetwork& net, const NetworkNodes& params,
                     const Eigen::MatrixXd& inputs, bool with_input_tangents) {
    if (inputs.rows() != 2) throw ContractError("mlp: inputs must be 2 x N");
    if (!inputs.allFinite()) throw NumericError("non-finite value at layer 0 (inputs)");
    const int n_layers = static_cast<int>(net.layers.size());

    NodeId h = tape.constant(inputs);
    NodeId dh0, dh1;
    if (with_input_tangents) {
        dh0 = tape.constant(unit_direction(0, inputs.cols()));
        dh1 = tape.constant(unit_direction(1, inputs.cols()));
    }
    for (int l = 0; l < n_layers; ++l) {
        const NodeId W = params.weights[l];
        NodeId a = tape.affine(W, h, params.biases[l]);
        require_finite(tape.value(a), l + 1);
        NodeId da0, da1;
        if (with_input_tangents) {
            da0 = tape.matmul(W, dh0);
            da1 = tape.matmul(W, dh1);
        }
        if (l + 1 == n_layers) {
            return NetworkOutput{a, da0, da1};
        }
        h = tape.tanh(a);
        if (with_input_tangents) {
            const NodeId slope = tape.tanh_slope(h);
            dh0 = tape.mul(slope, da0);
            dh1 = tape.mul(slope, da1);
            require_finite(tape.value(dh0), l + 1);
            require_finite(tape.value(dh1), l + 1);
        }
    }
    throw ContractError("mlp: network has no layers");
}

ForwardResult forward(const MlpNetwork& net, double x_norm, double t_norm) {
    net.validate();
    Tape tape;
    const auto params = bind_parameters(tape, net);
    Eigen::MatrixXd in(2, 1);
    in << x_norm, t_norm;
    const auto out = record(tape, net, params, in, false);
    const double v = tape.value(out.output)(0, 0);
    return ForwardResult{v, std::move(tape), out.output};
}

InputGradientResult input_gradients(const MlpNetwork& net, double x_norm, double t_norm) {
    net.validate();
    Tape tape;
    const auto params = bind_parameters(tape, net);
    Eigen::MatrixXd in(2, 1);
    in << x_norm, t_norm;
    const auto out = record(tape, net, params, in, true);
    const double dx = tape.value(out.d_input0)(0, 0);
    const double dt = tape.value(out.d_input1)(0, 0);
    return InputGradientResult{dx, dt, std::move(tape), out.d_input0, out.d_input1};
}

ParameterSet parameter_gradient(const Tape& tape, NodeId root, const MlpNetwork& net) {
    const int n_layers = static_cast<int>(net.layers.size());
    auto raw = tape.gradient(root, 2 * n_layers);
    ParameterSet grads(net.layers.size());
    for (int l = 0; l < n_layers; ++l) {
        const auto& L = net.layers[l];
        auto& w = raw[weight_slot(l)];
        auto& b = raw[bias_slot(l)];
        grads[l].weight = w.size() ? std::move(w) : Eigen::MatrixXd::Zero(L.weight.rows(), L.weight.cols());
        grads[l].bias = b.size() ? Eigen::VectorXd(b.col(0)) : Eigen::VectorXd::Zero(L.bias.size());
    }
    return grads;
}

ParameterSet parameter_gradient(const Tape& tape, const MlpNetwork& net) {
    if (tape.size() == 0) throw ContractError("parameter_gradient: empty tape");
    return parameter_gradient(tape, tape.last(), net);
}

Eigen::RowVectorXd predict(const MlpNetwork& net, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != 2) throw ContractError("mlp: inputs must be 2 x N");
    Eigen::MatrixXd h = inputs;
    const std::size_t n_layers = net.layers.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd a = net.layers[l].weight * h;
        a.colwise() += net.layers[l].bias;
        h = (l + 1 == n_layers) ? std::move(a) : Eigen::MatrixXd(a.array().tanh().matrix());
    }
    return h.row(0);
}

AdamState make_adam(const MlpNetwork& net, double learning_rate, double beta1, double beta2,
                    double epsilon) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.epsilon = epsilon;
    for (const auto& L : net.layers) {
        LayerParams zero{Eigen::MatrixXd::Zero(L.weight.rows(), L.weight.cols()),
                         Eigen::VectorXd::Zero(L.bias.size())};
        s.first_moment.push_back(zero);
        s.second_moment.push_back(std::move(zero));
    }
    return s;
}

void adam_step(AdamState& state, ParameterSet& params, const ParameterSet& grads) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw ContractError("adam: layer count mismatch");
    }
    for (std::size_t l = 0; l < params.size(); ++l) {
        const auto same = [](const auto& a, const auto& b) {
            return a.rows() == b.rows() && a.cols() == b.cols();
        };
        if (!same(params[l].weight, grads[l].weight) || !same(params[l].bias, grads[l].bias) ||
            !same(params[l].weight, state.first_moment[l].weight) ||
            !same(params[l].bias, state.second_moment[l].bias)) {
            throw ContractError("adam: shape mismatch at layer " + std::to_string(l));
        }
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
        p.array() -= state.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + state.epsilon);
    };
    for (std::size_t l = 0; l < params.size(); ++l) {
        update(params[l].weight, grads[l].weight, state.first_moment[l].weight,
               state.second_moment[l].weight);
        update(params[l].bias, grads[l].bias, state.first_moment[l].bias,
               state.second_moment[l].bias);
    }
}

void save_checkpoint(std::ostream& out, const MlpNetwork& net) {
    net.validate();
    out << "tse-mlp-checkpoint 1\n";
    out << "layers " << net.layer_sizes.size();
    for (int s : net.layer_sizes) out << ' ' << s;
    out << "\nactivation tanh\n";
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& L = net.layers[l];
        out << "weight " << l << ' ' << L.weight.rows() << ' ' << L.weight.cols() << '\n';
        for (Eigen::Index r = 0; r < L.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < L.weight.cols(); ++c) {
                out << (c ? " " : "") << format_double17(L.weight(r, c));
            }
            out << '\n';
        }
        out << "bias " << l << ' ' << L.bias.size() << '\n';
        for (Eigen::Index r = 0; r < L.bias.size(); ++r) {
            out << (r ? " " : "") << format_double17(L.bias(r));
        }
        out << '\n';
    }
    out << "end\n";
}

namespace {

void expect_word(std::istream& in, const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) {
        throw ConfigError("checkpoint: expected '" + word + "', found '" + got + "'");
    }
}

double read_value(std::istream& in) {
    std::string tok;
    if (!(in >> tok)) throw ConfigError("checkpoint: truncated value list");
    return parse_double(tok);
}

}  // namespace

MlpNetwork load_checkpoint(std::istream& in) {
    expect_word(in, "tse-mlp-checkpoint");
    int version = 0;
    if (!(in >> version) || version != 1) {
        throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    }
    expect_word(in, "layers");
    std::size_t n = 0;
    if (!(in >> n) || n < 2 || n > 1024) throw ConfigError("checkpoint: bad layer count");
    MlpNetwork net;
    net.layer_sizes.resize(n);
    for (auto& s : net.layer_sizes) {
        if (!(in >> s) || s < 1) throw ConfigError("checkpoint: bad layer size");
    }
    expect_word(in, "activation");
    expect_word(in, "tanh");
    for (std::size_t l = 0; l + 1 < n; ++l) {
        expect_word(in, "weight");
        std::size_t idx = 0;
        Eigen::Index rows = 0, cols = 0;
        in >> idx >> rows >> cols;
        if (!in || idx != l || rows != net.layer_sizes[l + 1] || cols != net.layer_sizes[l]) {
            throw ConfigError("checkpoint: weight header mismatch at layer " + std::to_string(l));
        }
        LayerParams L{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) L.weight(r, c) = read_value(in);
        }
        expect_word(in, "bias");
        in >> idx >> rows;
        if (!in || idx != l || rows != net.layer_sizes[l + 1]) {
            throw ConfigError("checkpoint: bias header mismatch at layer " + std::to_string(l));
        }
        for (Eigen::Index r = 0; r < rows; ++r) L.bias(r) = read_value(in);
        net.layers.push_back(std::move(L));
    }
    expect_word(in, "end");
    net.validate();
    return net;
}

void save_checkpoint(const std::filesystem::path& path, const MlpNetwork& net) {
    std::ostringstream os;
    save_checkpoint(os, net);
    write_file_atomic(path, os.str());
}

MlpNetwork load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint " + path.string());
    return load_checkpoint(in);
}

}  // namespace tse
