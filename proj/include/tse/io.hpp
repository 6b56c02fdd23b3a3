#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <string_view>

#include "tse/lwr_sim.hpp"

namespace tse {

/// "%.17g": enough digits to reload any double bit-exactly.
std::string format_double17(double v);
/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);
/// Fixed-point with `decimals` places.
std::string format_fixed(double v, int decimals);
/// Strict full-string parse; throws ConfigError.
double parse_double(std::string_view s);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// CSV with header `x,t,<value_name>`, t outermost, x innermost.
std::string field_csv(const Grid& grid, const Eigen::MatrixXd& values,
                      std::string_view value_name);

/// Reads a `x,t,v` CSV produced by field_csv back onto `grid`. Throws
/// ConfigError on a header, size, or coordinate mismatch.
VelocityField read_velocity_csv(const std::filesystem::path& path, const Grid& grid);

/// Plain-text (P2) 8-bit PGM. Time runs left to right, x increases upward;
/// pixel = round(255 * value / full_scale), clipped to [0, 255].
std::string field_pgm(const Eigen::MatrixXd& values, double full_scale);

}  // namespace tse
