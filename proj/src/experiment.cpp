#include "tse/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "tse/errors.hpp"
#include "tse/io.hpp"

namespace tse {

namespace fs = std::filesystem;

namespace {

const char* const kManifestHeader = "tse-manifest 1\n";

// Records written files; paths are stored relative to the manifest's directory.
class Manifest {
public:
    explicit Manifest(fs::path root) : root_(std::move(root)) {}

    void line(const std::string& text) { body_ << text << '\n'; }

    void tracked(const fs::path& path, std::string_view contents) {
        write_file_atomic(path, contents);
        body_ << "file " << fs::relative(path, root_).generic_string() << ' '
              << sha256_hex(contents) << '\n';
    }

    // Files whose contents include wall-clock timings.
    void untracked(const fs::path& path, std::string_view contents) {
        write_file_atomic(path, contents);
        body_ << "untracked " << fs::relative(path, root_).generic_string() << '\n';
    }

    void write() const { write_file_atomic(root_ / "manifest.txt", kManifestHeader + body_.str()); }

private:
    fs::path root_;
    std::ostringstream body_;
};

std::string run_dir_name(std::size_t size, std::uint64_t seed, Mode mode) {
    return "n" + std::to_string(size) + "_seed" + std::to_string(seed) + "_" + to_string(mode);
}

std::string label_of(Mode mode) { return mode == Mode::pidl ? "PIDL" : "DL"; }

// Config text for humans; the output directory is left out so copies of a
// run elsewhere stay byte-identical.
std::string portable_config_text(const ExperimentConfig& config) {
    ExperimentConfig copy = config;
    copy.out_dir.clear();
    return to_text(copy);
}

void write_data(const ExperimentConfig& config, const Simulation& sim, const fs::path& dir,
                Manifest& manifest) {
    manifest.tracked(dir / "velocity.csv", field_csv(config.grid, sim.velocity.values, "v"));
    manifest.tracked(dir / "density.csv", field_csv(config.grid, sim.density.values, "rho"));
    manifest.tracked(dir / "velocity.pgm", field_pgm(sim.velocity.values, config.fd.v_free));
    manifest.tracked(dir / "density.pgm", field_pgm(sim.density.values, config.fd.rho_max));
}

// One training run on a prepared truth field. `manifest_root` receives the
// tracked/untracked file records; the run's deterministic results are
// appended as a `result` line.
RunOutcome train_run(const ExperimentConfig& config, Mode mode, std::size_t samples,
                     std::uint64_t seed, const std::string& label, const VelocityField& truth,
                     const fs::path& dir, Manifest& manifest) {
    TrainConfig tc = config.train;
    tc.seed = seed;
    if (mode == Mode::dl) {
        tc.alpha = 0.0;
        tc.n_collocation = 0;
    }
    const ObservationSet obs =
        sample_observations(truth, config.sensors, samples, seed, config.noise_std);
    const CollocationSet coll = sample_collocation(config.grid, tc.n_collocation, seed);
    const Normalizer norm = Normalizer::from(config.grid, config.fd);

    std::ostringstream init;
    save_checkpoint(init, initialize(tc.layer_sizes, tc.seed));
    manifest.tracked(dir / "checkpoint_init.txt", init.str());

    RunOutcome out;
    out.dir = dir;
    out.result = train(tc, obs, coll, config.fd, norm, &truth);
    const VelocityField estimate = evaluate_network(out.result.net, config.grid, config.fd);

    RunReport& r = out.report;
    r = make_report(label, samples, config.grid, relative_error(estimate, truth));
    r.j_dl = out.result.final_cost.j_dl;
    r.j_phy = out.result.final_cost.j_phy;
    r.j_total = out.result.final_cost.total;
    r.wall_seconds = out.result.wall_seconds;
    r.epochs_run = out.result.epochs_run;
    r.terminated_by = to_string(out.result.terminated_by);
    r.seed = seed;

    std::ostringstream ckpt;
    save_checkpoint(ckpt, out.result.net);
    manifest.tracked(dir / "checkpoint.txt", ckpt.str());
    manifest.tracked(dir / "validation.csv", validation_csv(out.result.validation));
    manifest.tracked(dir / "estimate.pgm", field_pgm(estimate.values, config.fd.v_free));
    manifest.untracked(dir / "history.csv", history_csv(out.result.history));
    manifest.untracked(dir / "summary.txt", report_summary(r));
    manifest.line("result " + fs::relative(dir, dir.parent_path()).generic_string() +
                  " relative_error=" + format_double17(r.relative_error) +
                  " accuracy=" + format_double17(r.accuracy) + " j_total=" +
                  format_double17(r.j_total) + " epochs_run=" + std::to_string(r.epochs_run) +
                  " terminated_by=" + r.terminated_by);
    return out;
}

std::string runs_csv(const std::vector<SweepRun>& runs) {
    std::ostringstream os;
    os << "sample_size,seed,mode,status,j_dl,j_phy,j_total,relative_error,accuracy,"
          "wall_seconds,epochs_run,terminated_by\n";
    for (const auto& run : runs) {
        os << run.sample_size << ',' << run.seed << ',' << to_string(run.mode) << ','
           << (run.ok ? "ok" : "failed");
        if (run.ok) {
            const RunReport& r = run.outcome.report;
            os << ',' << format_double17(r.j_dl) << ',' << format_double17(r.j_phy) << ','
               << format_double17(r.j_total) << ',' << format_double17(r.relative_error) << ','
               << format_double17(r.accuracy) << ',' << format_double(r.wall_seconds) << ','
               << r.epochs_run << ',' << r.terminated_by;
        } else {
            os << ",,,,,,,,";
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace

VelocityField load_ground_truth(const ExperimentConfig& config) {
    if (config.auto_generate) {
        return simulate(config.ic, config.grid, config.fd, config.boundary).velocity;
    }
    const fs::path path = config.dataset_path();
    if (!fs::exists(path)) {
        throw ConfigError("dataset " + path.string() +
                          " does not exist (run generate or set run.auto_generate = true)");
    }
    return read_velocity_csv(path, config.grid);
}

GenerateOutcome cmd_generate(const ExperimentConfig& config) {
    config.validate();
    GenerateOutcome out;
    out.dir = config.out_dir / "data";
    out.simulation = simulate(config.ic, config.grid, config.fd, config.boundary);
    Manifest manifest(out.dir);
    manifest.line("command = generate");
    manifest.line("config_hash = " + config_hash(config));
    manifest.line("seed = " + std::to_string(config.seed));
    write_data(config, out.simulation, out.dir, manifest);
    manifest.tracked(out.dir / "config.txt", portable_config_text(config));
    manifest.write();
    return out;
}

RunOutcome cmd_train(const ExperimentConfig& config, Mode mode) {
    config.validate();
    const VelocityField truth = config.auto_generate ? cmd_generate(config).simulation.velocity
                                                     : load_ground_truth(config);
    const std::string label = config.label.empty() ? label_of(mode) : config.label;
    const fs::path dir = config.out_dir / label;
    Manifest manifest(dir);
    manifest.line("command = train");
    manifest.line("config_hash = " + config_hash(config));
    manifest.line("seed = " + std::to_string(config.seed));
    manifest.line(std::string("mode = ") + to_string(mode));
    manifest.tracked(dir / "config.txt", portable_config_text(config));
    RunOutcome out =
        train_run(config, mode, config.samples, config.seed, label, truth, dir, manifest);
    const ComparisonTable table = emit_comparison_table({out.report});
    manifest.untracked(dir / "table.txt", table.text);
    manifest.untracked(dir / "table.csv", table.csv);
    manifest.write();
    return out;
}

SweepOutcome cmd_sweep(const ExperimentConfig& config) {
    if (config.sweep_sizes.empty()) throw ConfigError("sweep.sample_sizes is empty");
    if (config.sweep_seeds.empty()) throw ConfigError("sweep.seeds is empty");
    if (config.sweep_modes.empty()) throw ConfigError("sweep.modes is empty");
    config.validate();
    const std::size_t lattice =
        config.sensors.positions.size() * static_cast<std::size_t>(config.grid.n_t);
    for (std::size_t n : config.sweep_sizes) {
        if (n < 1 || n > lattice) {
            throw ConfigError("sweep.sample_sizes: " + std::to_string(n) + " is outside [1, " +
                              std::to_string(lattice) + "]");
        }
    }

    const fs::path root = config.out_dir;
    Manifest manifest(root);
    manifest.line("command = sweep");
    manifest.line("config_hash = " + config_hash(config));
    manifest.line("sample_sizes = " + [&] {
        std::string s;
        for (auto n : config.sweep_sizes) s += (s.empty() ? "" : ", ") + std::to_string(n);
        return s;
    }());
    manifest.line("seeds = " + [&] {
        std::string s;
        for (auto n : config.sweep_seeds) s += (s.empty() ? "" : ", ") + std::to_string(n);
        return s;
    }());
    manifest.tracked(root / "config.txt", portable_config_text(config));

    const Simulation sim = simulate(config.ic, config.grid, config.fd, config.boundary);
    write_data(config, sim, root / "data", manifest);

    SweepOutcome out;
    std::vector<RunReport> reports;
    for (std::size_t size : config.sweep_sizes) {
        for (std::uint64_t seed : config.sweep_seeds) {
            for (Mode mode : config.sweep_modes) {
                SweepRun run;
                run.sample_size = size;
                run.seed = seed;
                run.mode = mode;
                const fs::path dir = root / "runs" / run_dir_name(size, seed, mode);
                try {
                    run.outcome = train_run(config, mode, size, seed, label_of(mode),
                                            sim.velocity, dir, manifest);
                    run.ok = true;
                    reports.push_back(run.outcome.report);
                } catch (const std::exception& e) {
                    run.error = e.what();
                    ++out.failures;
                    manifest.line("failed runs/" + run_dir_name(size, seed, mode) + ": " + run.error);
                }
                out.runs.push_back(std::move(run));
            }
        }
    }

    manifest.untracked(root / "runs.csv", runs_csv(out.runs));
    if (!reports.empty()) {
        out.table = emit_comparison_table(reports);
        manifest.untracked(root / "table.txt", out.table.text);
        manifest.untracked(root / "table.csv", out.table.csv);
    }
    manifest.line("failures = " + std::to_string(out.failures));
    manifest.write();
    return out;
}

RunReport cmd_evaluate(const ExperimentConfig& config) {
    config.validate();
    const std::string label = config.run_label();
    const fs::path ckpt =
        config.checkpoint.empty() ? config.out_dir / label / "checkpoint.txt" : config.checkpoint;
    if (!fs::exists(ckpt)) throw ConfigError("checkpoint " + ckpt.string() + " does not exist");
    const MlpNetwork net = load_checkpoint(ckpt);
    if (net.layer_sizes.front() != 2 || net.layer_sizes.back() != 1) {
        throw ConfigError("checkpoint " + ckpt.string() + " is not a (x, t) -> v network");
    }
    const VelocityField truth = load_ground_truth(config);
    const VelocityField estimate = evaluate_network(net, config.grid, config.fd);

    RunReport r = make_report(label, config.samples, config.grid, relative_error(estimate, truth));
    r.seed = config.seed;
    r.terminated_by = "n/a";

    Eigen::MatrixXd abs_error = (truth.values - estimate.values).cwiseAbs();
    const fs::path dir = config.out_dir / label / "evaluation";
    Manifest manifest(dir);
    manifest.line("command = evaluate");
    manifest.line("config_hash = " + config_hash(config));
    manifest.line("checkpoint_sha256 = " + sha256_hex(read_file(ckpt)));
    manifest.tracked(dir / "estimate.csv", field_csv(config.grid, estimate.values, "v"));
    manifest.tracked(dir / "estimate.pgm", field_pgm(estimate.values, config.fd.v_free));
    manifest.tracked(dir / "abs_error.pgm", field_pgm(abs_error, config.fd.v_free));
    std::ostringstream summary;
    summary << "label = " << r.label << '\n'
            << "checkpoint = " << ckpt.filename().string() << '\n'
            << "mse = " << format_double17(mse_field(estimate, truth)) << '\n'
            << "relative_error = " << format_fixed(r.relative_error, 6) << '\n'
            << "accuracy = " << format_fixed(r.accuracy, 6) << '\n';
    manifest.tracked(dir / "summary.txt", summary.str());
    manifest.write();
    return r;
}

}  // namespace tse
