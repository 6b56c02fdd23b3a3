#include "tse/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "tse/errors.hpp"

namespace tse {

std::string format_double17(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw ConfigError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    const auto parent = path.parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string field_csv(const Grid& grid, const Eigen::MatrixXd& values,
                      std::string_view value_name) {
    std::string out = "x,t,";
    out += value_name;
    out += '\n';
    out.reserve(out.size() + static_cast<std::size_t>(values.size()) * 32);
    for (int j = 0; j < grid.n_t; ++j) {
        const std::string t = format_double(grid.t_at(j));
        for (int i = 0; i < grid.n_x; ++i) {
            out += format_double(grid.x_center(i));
            out += ',';
            out += t;
            out += ',';
            out += format_double(values(i, j));
            out += '\n';
        }
    }
    return out;
}

VelocityField read_velocity_csv(const std::filesystem::path& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read dataset " + path.string());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,t,v") throw ConfigError("dataset " + path.string() + ": expected header x,t,v");
    VelocityField f{grid, Eigen::MatrixXd(grid.n_x, grid.n_t)};
    long row = 0;
    const double tol = 1e-9;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row >= grid.cells()) throw ConfigError("dataset has more rows than the grid");
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw ConfigError("dataset: malformed row " + std::to_string(row + 2));
        }
        const double x = parse_double(std::string_view(line).substr(0, c1));
        const double t = parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1));
        const double v = parse_double(std::string_view(line).substr(c2 + 1));
        const int j = static_cast<int>(row / grid.n_x);
        const int i = static_cast<int>(row % grid.n_x);
        if (std::abs(x - grid.x_center(i)) > tol * std::max(1.0, std::abs(x)) ||
            std::abs(t - grid.t_at(j)) > tol * std::max(1.0, std::abs(t))) {
            throw ConfigError("dataset: coordinates do not match the configured grid at row " +
                              std::to_string(row + 2));
        }
        f.values(i, j) = v;
        ++row;
    }
    if (row != grid.cells()) {
        throw ConfigError("dataset has " + std::to_string(row) + " rows, grid needs " +
                          std::to_string(grid.cells()));
    }
    return f;
}

std::string field_pgm(const Eigen::MatrixXd& values, double full_scale) {
    std::ostringstream os;
    const auto rows = values.rows();
    const auto cols = values.cols();
    os << "P2\n" << cols << ' ' << rows << "\n255\n";
    for (Eigen::Index r = rows - 1; r >= 0; --r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double px = std::round(255.0 * values(r, c) / full_scale);
            os << (c ? " " : "") << static_cast<int>(std::clamp(px, 0.0, 255.0));
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace tse
