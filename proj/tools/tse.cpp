// tse: traffic state estimation pipeline.
//
//   tse generate|train|sweep|evaluate --config FILE [--set key=value]...
//       [--seed N] [--out DIR] [--mode pidl|dl]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime or numeric error,
// 4 sweep finished with failed cells.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tse/config.hpp"
#include "tse/errors.hpp"
#include "tse/experiment.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kRuntime = 3, kPartial = 4 };

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> mode;
};

tse::ExperimentConfig resolve(const Options& o) {
    tse::ExperimentConfig c = tse::load_config(o.config_path);
    for (const auto& s : o.overrides) tse::apply_override(c, s);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.out_dir = *o.out;
    if (o.mode) tse::set_value(c, "train.mode", *o.mode);
    return c;
}

void print_report(const tse::RunReport& r) {
    std::printf("%s: relative error %.4f%%, accuracy %.4f%%", r.label.c_str(), r.relative_error,
                r.accuracy);
    if (r.epochs_run > 0 || r.wall_seconds > 0) {
        std::printf(", %ld epochs (%s), %.2f s", r.epochs_run, r.terminated_by.c_str(),
                    r.wall_seconds);
    }
    std::printf("\n");
}

int run(const std::string& command, const Options& o) {
    const tse::ExperimentConfig c = resolve(o);
    if (command == "generate") {
        const auto g = tse::cmd_generate(c);
        std::printf("wrote %s\n", g.dir.string().c_str());
        return kOk;
    }
    if (command == "train") {
        const auto r = tse::cmd_train(c, c.mode);
        print_report(r.report);
        std::printf("wrote %s\n", r.dir.string().c_str());
        return kOk;
    }
    if (command == "sweep") {
        const auto s = tse::cmd_sweep(c);
        std::fputs(s.table.text.c_str(), stdout);
        for (const auto& run : s.runs) {
            if (!run.ok) {
                std::fprintf(stderr, "failed: n=%zu seed=%llu %s: %s\n", run.sample_size,
                             static_cast<unsigned long long>(run.seed), tse::to_string(run.mode),
                             run.error.c_str());
            }
        }
        std::printf("wrote %s\n", c.out_dir.string().c_str());
        return s.failures == 0 ? kOk : kPartial;
    }
    const auto r = tse::cmd_evaluate(c);
    print_report(r);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic state estimation with physics-informed networks"};
    app.require_subcommand(1, 1);
    Options o;
    std::string command;
    for (const char* name : {"generate", "train", "sweep", "evaluate"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", o.config_path, "config file (key = value lines)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--set", o.overrides, "override one key, key=value (repeatable)");
        sub->add_option("--seed", o.seed, "root random seed (run.seed)");
        sub->add_option("--out", o.out, "output directory (run.out_dir)");
        if (std::string(name) == "train") {
            sub->add_option("--mode", o.mode, "pidl or dl (train.mode)")
                ->check(CLI::IsMember({"pidl", "dl"}));
        }
        sub->callback([&command, name] { command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        return run(command, o);
    } catch (const tse::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
