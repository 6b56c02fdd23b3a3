#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gradient_oracle.hpp"
#include "tse/errors.hpp"
#include "tse/mlp.hpp"
#include "tse/tape.hpp"

using namespace tse;

namespace {

MlpNetwork zero_net(const std::vector<int>& sizes, double bias = 0.0) {
    MlpNetwork net = initialize(sizes, 1);
    for (auto& L : net.layers) {
        L.weight.setZero();
        L.bias.setConstant(bias);
    }
    return net;
}

MlpNetwork linear_net(double wx, double wt, double b) {
    MlpNetwork net = initialize({2, 1}, 1);
    net.layers[0].weight << wx, wt;
    net.layers[0].bias << b;
    return net;
}

MlpNetwork random_net(const std::vector<int>& sizes, std::uint64_t seed) {
    MlpNetwork net = initialize(sizes, seed);
    std::mt19937_64 gen(seed + 99);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto& L : net.layers) {
        for (Eigen::Index i = 0; i < L.bias.size(); ++i) L.bias(i) = u(gen);
    }
    return net;
}

// Straight-line re-implementation of the forward pass.
double naive_forward(const MlpNetwork& net, double x, double t) {
    std::vector<double> h{x, t};
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& L = net.layers[l];
        std::vector<double> next(L.weight.rows());
        for (Eigen::Index r = 0; r < L.weight.rows(); ++r) {
            double a = L.bias(r);
            for (Eigen::Index c = 0; c < L.weight.cols(); ++c) a += L.weight(r, c) * h[c];
            next[r] = (l + 1 == net.layers.size()) ? a : std::tanh(a);
        }
        h = std::move(next);
    }
    return h[0];
}

bool close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

}  // namespace

TEST_CASE("forward examples") {
    CHECK(forward(zero_net({2, 5, 1}), 0.3, -0.7).value == 0.0);
    CHECK(forward(linear_net(2.0, 3.0, 1.0), 1.0, 1.0).value == 6.0);
    const auto net = random_net({2, 16, 1}, 5);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const double x = u(gen), t = u(gen);
        CHECK(std::abs(forward(net, x, t).value - naive_forward(net, x, t)) <= 1e-15);
    }
}

TEST_CASE("forward rejects non-finite values with the layer index") {
    auto net = random_net({2, 4, 1}, 3);
    CHECK_THROWS_AS(forward(net, NAN, 0.0), NumericError);
    net.layers[0].weight(0, 0) = 1e308;
    net.layers[0].weight(0, 1) = 1e308;
    try {
        Tape tape;
        const auto params = bind_parameters(tape, net);
        Eigen::MatrixXd in(2, 1);
        in << 10.0, 10.0;
        record(tape, net, params, in, false);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("input_gradients examples") {
    const auto z = input_gradients(zero_net({2, 6, 6, 1}, 0.4), 0.1, 0.2);
    CHECK(z.d_x == 0.0);
    CHECK(z.d_t == 0.0);
    for (double x : {-1.0, 0.0, 0.37}) {
        const auto g = input_gradients(linear_net(2.0, 3.0, -4.0), x, 0.5);
        CHECK(g.d_x == 2.0);
        CHECK(g.d_t == 3.0);
    }
    const auto net = random_net({2, 8, 8, 1}, 17);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-5;
    for (int k = 0; k < 40; ++k) {
        const double x = u(gen), t = u(gen);
        const auto g = input_gradients(net, x, t);
        const double fx = (naive_forward(net, x + h, t) - naive_forward(net, x - h, t)) / (2 * h);
        const double ft = (naive_forward(net, x, t + h) - naive_forward(net, x, t - h)) / (2 * h);
        CHECK(close(g.d_x, fx, 1e-6, 1e-10));
        CHECK(close(g.d_t, ft, 1e-6, 1e-10));
    }
}

TEST_CASE("parameter_gradient of the output of a single affine layer") {
    const auto net = linear_net(0.3, -0.2, 0.1);
    const auto f = forward(net, 0.7, -0.4);
    const auto g = parameter_gradient(f.tape, net);
    CHECK(g[0].weight(0, 0) == 0.7);
    CHECK(g[0].weight(0, 1) == -0.4);
    CHECK(g[0].bias(0) == 1.0);
}

TEST_CASE("parameter_gradient of a squared error matches 2(v - y) dv/dtheta") {
    const auto net = random_net({2, 6, 1}, 8);
    const double x = 0.2, t = -0.5, y = 0.9;
    Tape tape;
    const auto params = bind_parameters(tape, net);
    Eigen::MatrixXd in(2, 1);
    in << x, t;
    const auto out = record(tape, net, params, in, false);
    const auto loss = tape.square(tape.add_scalar(out.output, -y));
    const auto g = parameter_gradient(tape, loss, net);
    const auto dv = parameter_gradient(forward(net, x, t).tape, net);
    const double v = forward(net, x, t).value;
    for (std::size_t l = 0; l < g.size(); ++l) {
        CHECK(g[l].weight.isApprox(2.0 * (v - y) * dv[l].weight, 1e-14));
        CHECK(g[l].bias.isApprox(2.0 * (v - y) * dv[l].bias, 1e-14));
    }
    std::mt19937_64 gen(2);
    testing::LossProblem p = testing::random_problem(testing::LossKind::data, gen, 1, 1);
    p.data_inputs << x, t;
    p.data_targets << y;
    const auto check = testing::check_gradient(net, p, 1e-6, 1e-9);
    CHECK(check.failures == 0);
}

TEST_CASE("nested gradient: loss containing dv/dx on a 2-8-1 net") {
    const auto net = random_net({2, 8, 1}, 21);
    std::mt19937_64 gen(9);
    const auto p = testing::random_problem(testing::LossKind::physics, gen);
    const auto check = testing::check_gradient(net, p, 1e-5, 1e-7);
    CHECK(check.parameters == 33);
    CHECK(check.failures == 0);
}

TEST_CASE("gradient correctness on randomized nets and losses") {
    std::mt19937_64 gen(12345);
    for (int trial = 0; trial < 12; ++trial) {
        const auto sizes = testing::random_architecture(gen);
        const auto net = random_net(sizes, 1000 + trial);
        const auto kind = static_cast<testing::LossKind>(trial % 3);
        const auto p = testing::random_problem(kind, gen);
        const auto check = testing::check_gradient(net, p, 1e-5, 1e-7);
        CAPTURE(trial);
        CAPTURE(testing::to_string(kind));
        CHECK(check.failures == 0);
    }
}

TEST_CASE("nested symmetry: d/dx of parameter gradient equals parameter gradient of dv/dx") {
    const auto net = random_net({2, 7, 5, 1}, 31);
    const double x = 0.15, t = -0.35, h = 1e-5;
    const auto ig = input_gradients(net, x, t);
    const auto mixed = parameter_gradient(ig.tape, ig.d_x_node, net);
    const auto gp = parameter_gradient(forward(net, x + h, t).tape, net);
    const auto gm = parameter_gradient(forward(net, x - h, t).tape, net);
    for (std::size_t l = 0; l < mixed.size(); ++l) {
        for (Eigen::Index k = 0; k < mixed[l].weight.size(); ++k) {
            const double fd = (gp[l].weight.data()[k] - gm[l].weight.data()[k]) / (2 * h);
            CHECK(close(mixed[l].weight.data()[k], fd, 1e-5, 1e-8));
        }
        for (Eigen::Index k = 0; k < mixed[l].bias.size(); ++k) {
            const double fd = (gp[l].bias(k) - gm[l].bias(k)) / (2 * h);
            CHECK(close(mixed[l].bias(k), fd, 1e-5, 1e-8));
        }
    }
}

TEST_CASE("tape invariants") {
    const auto net = random_net({2, 5, 5, 1}, 2);
    auto ig = input_gradients(net, 0.3, 0.4);
    CHECK(ig.tape.replay_matches());
    CHECK(ig.tape.saturated_entries() == 0);
    // Not rooted at a scalar.
    Tape tape;
    const auto m = tape.parameter(Eigen::MatrixXd::Ones(2, 2), 0);
    tape.tanh(m);
    CHECK_THROWS_AS(tape.gradient(tape.last(), 1), ContractError);
    CHECK_THROWS_AS(tape.add(m, tape.constant(Eigen::MatrixXd::Ones(3, 1))), ContractError);
    CHECK_THROWS_AS(parameter_gradient(Tape{}, net), ContractError);

    Tape sat;
    sat.tanh(sat.constant(Eigen::MatrixXd::Constant(3, 2, 31.0)));
    CHECK(sat.saturated_entries() == 6);
}

TEST_CASE("adam_step examples") {
    auto net = random_net({2, 3, 1}, 4);
    auto state = make_adam(net, 1e-3);
    ParameterSet zero = net.layers;
    for (auto& L : zero) {
        L.weight.setZero();
        L.bias.setZero();
    }
    const auto before = net;
    adam_step(state, net.layers, zero);
    CHECK(net == before);
    CHECK(state.step == 1);

    // One step with g = 1 from a fresh state moves by lr / (1 + eps).
    MlpNetwork scalar = linear_net(0.5, 0.0, 0.0);
    auto s1 = make_adam(scalar, 1e-3);
    ParameterSet ones = scalar.layers;
    ones[0].weight << 1.0, -2.0;
    ones[0].bias << 0.0;
    adam_step(s1, scalar.layers, ones);
    CHECK(std::abs((0.5 - scalar.layers[0].weight(0, 0)) - 1e-3) <= 1e-6);
    CHECK(scalar.layers[0].weight(0, 1) > 0.0);

    // Constant gradient: parameter moves opposite to its sign.
    for (int k = 0; k < 100; ++k) adam_step(s1, scalar.layers, ones);
    CHECK(scalar.layers[0].weight(0, 0) < 0.5 - 0.09);
    CHECK(scalar.layers[0].weight(0, 1) > 0.09);

    ParameterSet wrong = ones;
    wrong[0].weight.resize(2, 2);
    CHECK_THROWS_AS(adam_step(s1, scalar.layers, wrong), ContractError);
}

TEST_CASE("initialize examples") {
    const std::vector<int> sizes{2, 20, 20, 1};
    const auto a = initialize(sizes, 77);
    const auto b = initialize(sizes, 77);
    const auto c = initialize(sizes, 78);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const double bound = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
        CHECK(a.layers[l].weight.cwiseAbs().maxCoeff() <= bound);
        CHECK(a.layers[l].bias.isZero(0.0));
    }
    CHECK(a.parameter_count() == 2 * 20 + 20 + 20 * 20 + 20 + 20 + 1);
    CHECK_THROWS_AS(initialize({3, 4, 1}, 1), ContractError);
    CHECK_THROWS_AS(initialize({2, 0, 1}, 1), ContractError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    const auto net = random_net({2, 9, 4, 1}, 55);
    std::stringstream ss;
    save_checkpoint(ss, net);
    const std::string text = ss.str();
    CHECK(text.rfind("tse-mlp-checkpoint 1\nlayers 4 2 9 4 1\n", 0) == 0);
    const auto back = load_checkpoint(ss);
    CHECK(back == net);
    std::stringstream again;
    save_checkpoint(again, back);
    CHECK(again.str() == text);

    std::stringstream bad(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(bad), ConfigError);
    std::stringstream wrong_version("tse-mlp-checkpoint 9\n");
    CHECK_THROWS_AS(load_checkpoint(wrong_version), ConfigError);
}

TEST_CASE("batched record matches single-point evaluation") {
    const auto net = random_net({2, 6, 6, 1}, 8);
    Eigen::MatrixXd in(2, 3);
    in << 0.1, -0.2, 0.9, 0.5, 0.3, -0.8;
    Tape tape;
    const auto params = bind_parameters(tape, net);
    const auto out = record(tape, net, params, in, true);
    const auto pred = predict(net, in);
    for (int k = 0; k < 3; ++k) {
        const auto g = input_gradients(net, in(0, k), in(1, k));
        CHECK(tape.value(out.output)(0, k) == doctest::Approx(pred(k)).epsilon(1e-15));
        CHECK(tape.value(out.d_input0)(0, k) == doctest::Approx(g.d_x).epsilon(1e-14));
        CHECK(tape.value(out.d_input1)(0, k) == doctest::Approx(g.d_t).epsilon(1e-14));
    }
}
