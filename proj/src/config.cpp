#include "tse/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

#include "tse/errors.hpp"
#include "tse/io.hpp"

namespace tse {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view why) {
    throw ConfigError("config key '" + std::string(key) + "': cannot use value '" +
                      std::string(value) + "' (" + std::string(why) + ")");
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
    Int out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty()) bad_value(key, value, "expected an integer");
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    try {
        return parse_double(value);
    } catch (const ConfigError&) {
        bad_value(key, value, "expected a number");
    }
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true") return true;
    if (value == "false") return false;
    bad_value(key, value, "expected true or false");
}

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> items;
    if (trim(value).empty()) return items;
    std::size_t start = 0;
    while (true) {
        const auto comma = value.find(',', start);
        items.push_back(trim(value.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

template <typename T, typename F>
std::vector<T> parse_list(std::string_view key, std::string_view value, F parse_one) {
    std::vector<T> out;
    for (auto item : split_list(value)) {
        if (item.empty()) bad_value(key, value, "empty list entry");
        out.push_back(parse_one(key, item));
    }
    return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F format_one) {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k) out += ", ";
        out += format_one(items[k]);
    }
    return out;
}

Mode parse_mode(std::string_view key, std::string_view value) {
    if (value == "pidl") return Mode::pidl;
    if (value == "dl") return Mode::dl;
    bad_value(key, value, "expected pidl or dl");
}

const char* ic_kind_name(InitialCondition::Kind k) {
    switch (k) {
        case InitialCondition::Kind::uniform: return "uniform";
        case InitialCondition::Kind::jam_block: return "jam_block";
        case InitialCondition::Kind::custom_profile: return "custom";
    }
    return "?";
}

std::string fmt(double v) { return format_double(v); }
template <typename Int>
std::string fmt_int(Int v) { return std::to_string(v); }

struct Field {
    const char* key;
    std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define TSE_REAL(KEY, MEMBER)                                                                   \
    Field {                                                                                     \
        KEY, [](ExperimentConfig& c, std::string_view k, std::string_view v) {                  \
            c.MEMBER = parse_real(k, v);                                                        \
        },                                                                                      \
            [](const ExperimentConfig& c) { return fmt(c.MEMBER); }                             \
    }
#define TSE_INT(KEY, MEMBER, TYPE)                                                              \
    Field {                                                                                     \
        KEY, [](ExperimentConfig& c, std::string_view k, std::string_view v) {                  \
            c.MEMBER = parse_int<TYPE>(k, v);                                                   \
        },                                                                                      \
            [](const ExperimentConfig& c) { return fmt_int(c.MEMBER); }                         \
    }
#define TSE_PATH(KEY, MEMBER)                                                                   \
    Field {                                                                                     \
        KEY, [](ExperimentConfig& c, std::string_view, std::string_view v) { c.MEMBER = v; },  \
            [](const ExperimentConfig& c) { return c.MEMBER.string(); }                         \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table{
        TSE_REAL("grid.x_min", grid.x_min),
        TSE_REAL("grid.x_max", grid.x_max),
        TSE_INT("grid.n_x", grid.n_x, int),
        TSE_REAL("grid.t_min", grid.t_min),
        TSE_REAL("grid.t_max", grid.t_max),
        TSE_INT("grid.n_t", grid.n_t, int),
        TSE_REAL("fd.v_free", fd.v_free),
        TSE_REAL("fd.rho_max", fd.rho_max),
        Field{"ic.kind",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  if (v == "uniform") c.ic.kind = InitialCondition::Kind::uniform;
                  else if (v == "jam_block") c.ic.kind = InitialCondition::Kind::jam_block;
                  else if (v == "custom") c.ic.kind = InitialCondition::Kind::custom_profile;
                  else bad_value(k, v, "expected uniform, jam_block or custom");
              },
              [](const ExperimentConfig& c) { return std::string(ic_kind_name(c.ic.kind)); }},
        TSE_REAL("ic.density", ic.density),
        TSE_REAL("ic.block_density", ic.block_density),
        TSE_REAL("ic.block_start", ic.block_start),
        TSE_REAL("ic.block_end", ic.block_end),
        Field{"ic.profile",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  c.ic.profile = parse_list<double>(k, v, parse_real);
              },
              [](const ExperimentConfig& c) { return join(c.ic.profile, fmt); }},
        Field{"sim.boundary",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  if (v == "closed") c.boundary = Boundary::closed;
                  else if (v == "transmissive") c.boundary = Boundary::transmissive;
                  else bad_value(k, v, "expected closed or transmissive");
              },
              [](const ExperimentConfig& c) {
                  return std::string(c.boundary == Boundary::closed ? "closed" : "transmissive");
              }},
        Field{"sensors.positions",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  c.sensors.positions = parse_list<double>(k, v, parse_real);
              },
              [](const ExperimentConfig& c) { return join(c.sensors.positions, fmt); }},
        TSE_INT("sensors.samples", samples, std::size_t),
        TSE_REAL("sensors.noise_std", noise_std),
        Field{"train.mode",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  c.mode = parse_mode(k, v);
              },
              [](const ExperimentConfig& c) { return std::string(to_string(c.mode)); }},
        TSE_REAL("train.alpha", train.alpha),
        TSE_INT("train.n_collocation", train.n_collocation, std::size_t),
        TSE_INT("train.max_epochs", train.max_epochs, long),
        TSE_REAL("train.cost_threshold", train.cost_threshold),
        Field{"train.layers",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  c.train.layer_sizes = parse_list<int>(k, v, parse_int<int>);
              },
              [](const ExperimentConfig& c) { return join(c.train.layer_sizes, fmt_int<int>); }},
        TSE_REAL("train.learning_rate", train.learning_rate),
        TSE_REAL("train.beta1", train.beta1),
        TSE_REAL("train.beta2", train.beta2),
        TSE_REAL("train.epsilon", train.epsilon),
        TSE_INT("train.collocation_batch", train.collocation_batch, std::size_t),
        TSE_INT("train.eval_every", train.eval_every, long),
        TSE_INT("run.seed", seed, std::uint64_t),
        Field{"run.label",
              [](ExperimentConfig& c, std::string_view, std::string_view v) { c.label = v; },
              [](const ExperimentConfig& c) { return c.label; }},
        TSE_PATH("run.out_dir", out_dir),
        TSE_PATH("run.dataset", dataset),
        Field{"run.auto_generate",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  c.auto_generate = parse_bool(k, v);
              },
              [](const ExperimentConfig& c) { return std::string(c.auto_generate ? "true" : "false"); }},
        TSE_PATH("run.checkpoint", checkpoint),
        Field{"sweep.sample_sizes",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  c.sweep_sizes = parse_list<std::size_t>(k, v, parse_int<std::size_t>);
              },
              [](const ExperimentConfig& c) { return join(c.sweep_sizes, fmt_int<std::size_t>); }},
        Field{"sweep.seeds",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  c.sweep_seeds = parse_list<std::uint64_t>(k, v, parse_int<std::uint64_t>);
              },
              [](const ExperimentConfig& c) { return join(c.sweep_seeds, fmt_int<std::uint64_t>); }},
        Field{"sweep.modes",
              [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                  c.sweep_modes = parse_list<Mode>(k, v, parse_mode);
              },
              [](const ExperimentConfig& c) {
                  return join(c.sweep_modes, [](Mode m) { return std::string(to_string(m)); });
              }},
    };
    return table;
}

#undef TSE_REAL
#undef TSE_INT
#undef TSE_PATH

const Field* find_field(std::string_view key) {
    for (const auto& f : fields()) {
        if (key == f.key) return &f;
    }
    return nullptr;
}

}  // namespace

const char* to_string(Mode m) { return m == Mode::pidl ? "pidl" : "dl"; }

void ExperimentConfig::validate() const {
    grid.validate();
    try {
        fd.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("fd: ") + e.what());
    }
    try {
        (void)ic.sample(grid, fd);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("ic: ") + e.what());
    }
    (void)sensors.cells(grid);
    const std::size_t lattice = sensors.positions.size() * static_cast<std::size_t>(grid.n_t);
    if (samples < 1 || samples > lattice) {
        throw ConfigError("sensors.samples must be between 1 and " + std::to_string(lattice));
    }
    if (!(noise_std >= 0.0)) throw ConfigError("sensors.noise_std must be >= 0");
    train.validate();
}

std::string ExperimentConfig::run_label() const {
    if (!label.empty()) return label;
    return mode == Mode::pidl ? "PIDL" : "DL";
}

std::filesystem::path ExperimentConfig::dataset_path() const {
    return dataset.empty() ? out_dir / "data" / "velocity.csv" : dataset;
}

void set_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError("unknown config key '" + std::string(key) + "'");
    f->set(config, key, value);
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        if (!seen.insert(std::string(key)).second) {
            throw ConfigError("config key '" + std::string(key) + "' given twice");
        }
        set_value(base, key, trim(line.substr(eq + 1)));
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("cannot read config " + path.string() + ": " + e.what());
    }
    return parse_config(text);
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    }
    set_value(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string to_text(const ExperimentConfig& config) {
    std::ostringstream os;
    for (const auto& f : fields()) {
        const std::string value = f.get(config);
        os << f.key << (value.empty() ? " =" : " = ") << value << '\n';
    }
    return os.str();
}

std::string config_hash(const ExperimentConfig& config) {
    ExperimentConfig copy = config;
    copy.out_dir.clear();
    return sha256_hex(to_text(copy));
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : fields()) keys.emplace_back(f.key);
    return keys;
}

}  // namespace tse
