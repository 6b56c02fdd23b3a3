#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "tse/errors.hpp"
#include "tse/metrics.hpp"
#include "tse/train.hpp"

using namespace tse;

namespace {

VelocityField field(int n_x, int n_t, std::initializer_list<double> values) {
    Grid g;
    g.n_x = n_x;
    g.n_t = n_t;
    VelocityField v{g, Eigen::MatrixXd(n_x, n_t)};
    auto it = values.begin();
    for (int i = 0; i < n_x; ++i) {
        for (int j = 0; j < n_t; ++j) v.values(i, j) = *it++;
    }
    return v;
}

VelocityField random_field(std::uint64_t seed) {
    Grid g;
    g.n_x = 30;
    g.n_t = 17;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 25.0);
    VelocityField v{g, Eigen::MatrixXd(g.n_x, g.n_t)};
    for (Eigen::Index k = 0; k < v.values.size(); ++k) v.values.data()[k] = u(gen);
    return v;
}

RunReport report(const std::string& label, std::size_t size, double error, double wall) {
    RunReport r = make_report(label, size, Grid{}, error);
    r.wall_seconds = wall;
    return r;
}

int count(const std::string& s, char c) { return static_cast<int>(std::count(s.begin(), s.end(), c)); }

}  // namespace

TEST_CASE("mse_field examples") {
    CHECK(mse_field(field(1, 2, {1, 2}), field(1, 2, {1, 2})) == 0.0);
    CHECK(mse_field(field(2, 2, {0, 0, 0, 0}), field(2, 2, {1, 1, 1, 1})) == 1.0);
    CHECK(mse_field(field(1, 2, {2, 4}), field(1, 2, {1, 2})) == 2.5);
    CHECK_THROWS_AS(mse_field(field(1, 2, {1, 2}), field(2, 1, {1, 2})), ContractError);
}

TEST_CASE("relative_error examples") {
    CHECK(relative_error(field(1, 2, {3, 4}), field(1, 2, {3, 4})) == 0.0);
    CHECK(relative_error(field(1, 2, {0, 0}), field(1, 2, {3, 4})) ==
          doctest::Approx(100.0).epsilon(1e-12));
    CHECK(relative_error(field(1, 2, {3, 0}), field(1, 2, {3, 4})) ==
          doctest::Approx(80.0).epsilon(1e-12));
    CHECK_THROWS_AS(relative_error(field(1, 2, {1, 1}), field(1, 2, {0, 0})), DomainError);
    CHECK_THROWS_AS(relative_error(field(1, 2, {1, 1}), field(2, 1, {1, 1})), ContractError);
}

TEST_CASE("relative_error is scale consistent and matches the mse form") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const VelocityField truth = random_field(seed);
        const VelocityField est = random_field(seed + 1000);
        const double e = relative_error(est, truth);
        for (double c : {-3.0, 1e-3, 7.5, 1e4}) {
            VelocityField ts = truth, es = est;
            ts.values *= c;
            es.values *= c;
            CHECK(relative_error(es, ts) == doctest::Approx(e).epsilon(1e-12));
        }
        const double cells = static_cast<double>(truth.values.size());
        const double via_mse = 100.0 * std::sqrt(mse_field(est, truth) * cells) / truth.values.norm();
        CHECK(via_mse == doctest::Approx(e).epsilon(1e-12));
    }
}

TEST_CASE("evaluate_network") {
    Grid g;
    g.n_x = 20;
    g.n_t = 10;
    const FdParams p;

    MlpNetwork flat = initialize({2, 5, 1}, 2);
    for (auto& L : flat.layers) L.weight.setZero();
    flat.layers.back().bias << 0.48;
    const VelocityField v = evaluate_network(flat, g, p);
    CHECK(v.grid == g);
    CHECK(v.values.rows() == 20);
    CHECK(v.values.cols() == 10);
    CHECK((v.values.array() == 12.0).all());

    flat.layers.back().bias << 2.0;
    CHECK((evaluate_network(flat, g, p).values.array() == p.v_free).all());
    flat.layers.back().bias << -1.0;
    CHECK((evaluate_network(flat, g, p).values.array() == 0.0).all());

    // Each cell matches a single-point evaluation at its own center.
    const MlpNetwork net = initialize({2, 7, 7, 1}, 5);
    const Normalizer norm = Normalizer::from(g, p);
    const VelocityField dense = evaluate_network(net, g, p);
    for (int i : {0, 7, 19}) {
        for (int j : {0, 4, 9}) {
            const double raw = forward(net, norm.x(g.x_center(i)), norm.t(g.t_at(j))).value;
            CHECK(dense.values(i, j) ==
                  doctest::Approx(std::clamp(norm.speed(raw), 0.0, p.v_free)).epsilon(1e-14));
        }
    }
}

TEST_CASE("fitting the full lattice gives a small error") {
    Grid g;
    g.n_x = 50;
    g.n_t = 24;
    const FdParams p;
    std::vector<double> profile(g.n_x);
    for (int i = 0; i < g.n_x; ++i) {
        profile[i] = 0.02 + 0.01 * std::sin(2.0 * M_PI * g.x_center(i) / 5000.0);
    }
    const VelocityField truth =
        simulate(InitialCondition::custom(profile), g, p, Boundary::transmissive).velocity;

    SensorLayout every_cell;
    every_cell.positions.clear();
    for (int i = 0; i < g.n_x; ++i) every_cell.positions.push_back(g.x_center(i));
    const ObservationSet obs =
        sample_observations(truth, every_cell, static_cast<std::size_t>(g.cells()), 1);

    TrainConfig c;
    c.layer_sizes = {2, 16, 16, 1};
    c.alpha = 0.0;
    c.max_epochs = 3000;
    c.learning_rate = 5e-3;
    c.cost_threshold = 1e-3;
    const TrainResult r = train(c, obs, CollocationSet{}, p, Normalizer::from(g, p));
    CHECK(relative_error(evaluate_network(r.net, g, p), truth) <= 3.0);
}

TEST_CASE("reports") {
    const Grid g;
    CHECK(percent_data(250, g) == doctest::Approx(0.208333).epsilon(1e-5));
    CHECK(percent_data(500, g) == doctest::Approx(0.416667).epsilon(1e-5));
    CHECK(percent_data(750, g) == 0.625);
    CHECK(percent_data(1000, g) == doctest::Approx(0.833333).epsilon(1e-5));

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 150.0);
    for (int k = 0; k < 1000; ++k) {
        const RunReport r = make_report("PIDL", 250, g, u(gen));
        CHECK(r.accuracy + r.relative_error == 100.0);
        CHECK(std::round(r.relative_error * 1e6) / 1e6 == r.relative_error);
    }
    const RunReport over = make_report("DL", 250, g, 120.0);
    CHECK(over.accuracy == -20.0);

    const std::string summary = report_summary(make_report("DL", 500, g, 12.5));
    CHECK(summary.find("label = DL\n") != std::string::npos);
    CHECK(summary.find("relative_error = 12.500000\n") != std::string::npos);
    CHECK(summary.find("accuracy = 87.500000\n") != std::string::npos);
    CHECK(summary.find("terminated_by = ") != std::string::npos);
}

TEST_CASE("comparison tables") {
    SUBCASE("single report has no flags") {
        const ComparisonTable t = emit_comparison_table({report("PIDL", 250, 20.0, 3.0)});
        CHECK(count(t.text, '\n') == 2);
        CHECK(t.text.find('*') == std::string::npos);
        CHECK(t.text.find("Computation Time (s)") != std::string::npos);
        CHECK(t.text.find("80.00") != std::string::npos);
        CHECK(count(t.csv, '\n') == 2);
    }
    SUBCASE("PIDL and DL: the more accurate row is flagged") {
        const ComparisonTable t = emit_comparison_table(
            {report("PIDL", 250, 24.8, 8.0), report("DL", 250, 75.7, 40.0)});
        std::istringstream lines(t.text);
        std::string header, pidl, dl;
        std::getline(lines, header);
        std::getline(lines, pidl);
        std::getline(lines, dl);
        CHECK(pidl.find("75.20*") != std::string::npos);
        CHECK(pidl.find("8.00*") != std::string::npos);
        CHECK(dl.find('*') == std::string::npos);
        CHECK(t.csv.find("250,0.20833333333333334,PIDL,1,8,75.2,75.2,75.2,24.8,0,1\n") !=
              std::string::npos);
    }
    SUBCASE("sample-size sweep gives one row per size") {
        std::vector<RunReport> reports;
        for (std::size_t size : {250, 500, 750, 1000}) {
            for (int seed = 0; seed < 3; ++seed) {
                reports.push_back(report("PIDL", size, 18.0 + seed, 10.0));
                reports.push_back(report("DL", size, 60.0 + seed, 2.0));
            }
        }
        const ComparisonTable t = emit_comparison_table(reports);
        CHECK(count(t.text, '\n') == 5);
        CHECK(t.text.find("% Data") != std::string::npos);
        for (const char* pct : {"0.2083", "0.4167", "0.6250", "0.8333"}) {
            CHECK(t.text.find(pct) != std::string::npos);
        }
        CHECK(count(t.text, '*') == 4);
        CHECK(t.text.find("81.00*") != std::string::npos);  // mean of 82, 81, 80
        CHECK(t.text.find("39.00") != std::string::npos);
        CHECK(count(t.csv, '\n') == 9);
        CHECK(t.csv.find("500,0.4166666666666667,DL,3,2,39,38,40,61,0,0\n") != std::string::npos);
    }
}
