#include "tse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "tse/errors.hpp"
#include "tse/io.hpp"

namespace tse {

namespace {

void require_same_grid(const VelocityField& a, const VelocityField& b) {
    if (!(a.grid == b.grid) || a.values.rows() != b.values.rows() ||
        a.values.cols() != b.values.cols()) {
        throw ContractError("fields are defined on different grids");
    }
}

struct Group {
    std::size_t sample_size = 0;
    std::string label;
    double percent_data = 0.0;
    int runs = 0;
    double wall = 0.0;
    double accuracy = 0.0;
    double error = 0.0;
    double epochs = 0.0;
    double min_accuracy = 0.0;
    double max_accuracy = 0.0;
};

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

double mse_field(const VelocityField& estimate, const VelocityField& truth) {
    require_same_grid(estimate, truth);
    return (estimate.values - truth.values).squaredNorm() / static_cast<double>(truth.values.size());
}

double relative_error(const VelocityField& estimate, const VelocityField& truth) {
    require_same_grid(estimate, truth);
    const double denom = truth.values.norm();
    if (!(denom > 0.0)) throw DomainError("relative_error: truth field has zero norm");
    return 100.0 * (truth.values - estimate.values).norm() / denom;
}

VelocityField evaluate_network(const MlpNetwork& net, const Grid& grid, const FdParams& p) {
    const Normalizer norm = Normalizer::from(grid, p);
    Eigen::MatrixXd inputs(2, grid.cells());
    for (int j = 0; j < grid.n_t; ++j) {
        for (int i = 0; i < grid.n_x; ++i) {
            const Eigen::Index k = static_cast<Eigen::Index>(j) * grid.n_x + i;
            inputs(0, k) = norm.x(grid.x_center(i));
            inputs(1, k) = norm.t(grid.t_at(j));
        }
    }
    const Eigen::RowVectorXd raw = predict(net, inputs);
    VelocityField out{grid, Eigen::MatrixXd(grid.n_x, grid.n_t)};
    for (int j = 0; j < grid.n_t; ++j) {
        for (int i = 0; i < grid.n_x; ++i) {
            const double v = norm.speed(raw(static_cast<Eigen::Index>(j) * grid.n_x + i));
            out.values(i, j) = std::clamp(v, 0.0, p.v_free);
        }
    }
    return out;
}

double percent_data(std::size_t sample_size, const Grid& grid) {
    return 100.0 * static_cast<double>(sample_size) / static_cast<double>(grid.cells());
}

RunReport make_report(std::string label, std::size_t sample_size, const Grid& grid,
                      double relative_error_percent) {
    RunReport r;
    r.label = std::move(label);
    r.sample_size = sample_size;
    r.percent_data = percent_data(sample_size, grid);
    r.relative_error = std::round(relative_error_percent * 1e6) / 1e6;
    r.accuracy = 100.0 - r.relative_error;
    return r;
}

ComparisonTable emit_comparison_table(const std::vector<RunReport>& reports) {
    // Group by sample size, then by label in order of first appearance.
    std::vector<std::string> labels;
    std::map<std::size_t, std::map<std::string, Group>> groups;
    for (const auto& r : reports) {
        if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) {
            labels.push_back(r.label);
        }
        Group& g = groups[r.sample_size][r.label];
        if (g.runs == 0) {
            g.sample_size = r.sample_size;
            g.label = r.label;
            g.percent_data = r.percent_data;
            g.min_accuracy = g.max_accuracy = r.accuracy;
        }
        ++g.runs;
        g.wall += r.wall_seconds;
        g.accuracy += r.accuracy;
        g.error += r.relative_error;
        g.epochs += static_cast<double>(r.epochs_run);
        g.min_accuracy = std::min(g.min_accuracy, r.accuracy);
        g.max_accuracy = std::max(g.max_accuracy, r.accuracy);
    }
    for (auto& [size, by_label] : groups) {
        for (auto& [label, g] : by_label) {
            g.wall /= g.runs;
            g.accuracy /= g.runs;
            g.error /= g.runs;
            g.epochs /= g.runs;
        }
    }
    const bool compare = labels.size() > 1;

    // Best accuracy / time per sample size.
    std::map<std::size_t, std::pair<std::string, std::string>> best;  // accuracy, time
    for (const auto& [size, by_label] : groups) {
        const Group* acc = nullptr;
        const Group* fast = nullptr;
        for (const auto& [label, g] : by_label) {
            if (!acc || g.accuracy > acc->accuracy) acc = &g;
            if (!fast || g.wall < fast->wall) fast = &g;
        }
        best[size] = {acc->label, fast->label};
    }
    const auto flag = [&](bool is_best) { return (compare && is_best) ? "*" : ""; };

    std::ostringstream text;
    if (groups.size() <= 1) {
        text << pad("Model", 10) << pad("Computation Time (s)", 24) << pad("Accuracy (%)", 16)
             << pad("Epochs", 10) << "Runs\n";
        for (const auto& [size, by_label] : groups) {
            for (const auto& label : labels) {
                const auto it = by_label.find(label);
                if (it == by_label.end()) continue;
                const Group& g = it->second;
                text << pad(label, 10)
                     << pad(format_fixed(g.wall, 2) + flag(best[size].second == label), 24)
                     << pad(format_fixed(g.accuracy, 2) + flag(best[size].first == label), 16)
                     << pad(format_fixed(g.epochs, 0), 10) << g.runs << '\n';
            }
        }
    } else {
        text << pad("Sample Size", 14) << pad("% Data", 10);
        for (const auto& label : labels) text << pad(label + " Accuracy (%)", 22);
        text << '\n';
        for (const auto& [size, by_label] : groups) {
            text << pad(std::to_string(size), 14)
                 << pad(format_fixed(by_label.begin()->second.percent_data, 4), 10);
            for (const auto& label : labels) {
                const auto it = by_label.find(label);
                const std::string cell =
                    it == by_label.end() ? "-"
                                         : format_fixed(it->second.accuracy, 2) + flag(best[size].first == label);
                text << pad(cell, 22);
            }
            text << '\n';
        }
    }

    std::ostringstream csv;
    csv << "sample_size,percent_data,label,runs,mean_wall_seconds,mean_accuracy,min_accuracy,"
           "max_accuracy,mean_relative_error,mean_epochs,best_accuracy\n";
    for (const auto& [size, by_label] : groups) {
        for (const auto& label : labels) {
            const auto it = by_label.find(label);
            if (it == by_label.end()) continue;
            const Group& g = it->second;
            csv << size << ',' << format_double(g.percent_data) << ',' << label << ',' << g.runs
                << ',' << format_double(g.wall) << ',' << format_double(g.accuracy) << ','
                << format_double(g.min_accuracy) << ',' << format_double(g.max_accuracy) << ','
                << format_double(g.error) << ',' << format_double(g.epochs) << ','
                << (compare && best[size].first == label ? 1 : 0) << '\n';
        }
    }
    return ComparisonTable{text.str(), csv.str()};
}

std::string report_summary(const RunReport& r) {
    std::ostringstream os;
    os << "label = " << r.label << '\n'
       << "seed = " << r.seed << '\n'
       << "sample_size = " << r.sample_size << '\n'
       << "percent_data = " << format_double(r.percent_data) << '\n'
       << "j_dl = " << format_double17(r.j_dl) << '\n'
       << "j_phy = " << format_double17(r.j_phy) << '\n'
       << "j_total = " << format_double17(r.j_total) << '\n'
       << "relative_error = " << format_fixed(r.relative_error, 6) << '\n'
       << "accuracy = " << format_fixed(r.accuracy, 6) << '\n'
       << "wall_seconds = " << format_fixed(r.wall_seconds, 3) << '\n'
       << "epochs_run = " << r.epochs_run << '\n'
       << "terminated_by = " << r.terminated_by << '\n';
    return os.str();
}

}  // namespace tse
