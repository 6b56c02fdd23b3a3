#include "tse/lwr_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tse/errors.hpp"

namespace tse {

namespace {

// Roundoff slack when checking that an updated density stayed in range.
constexpr double kRangeSlack = 1e-14;

}  // namespace

void Grid::validate() const {
    if (!(x_max > x_min)) throw ConfigError("grid: x_max must exceed x_min");
    if (!(t_max > t_min)) throw ConfigError("grid: t_max must exceed t_min");
    if (n_x < 2) throw ConfigError("grid: n_x must be at least 2");
    if (n_t < 2) throw ConfigError("grid: n_t must be at least 2");
}

int Grid::cell_of(double x) const {
    const int i = static_cast<int>(std::floor((x - x_min) / dx()));
    return std::clamp(i, 0, n_x - 1);
}

InitialCondition InitialCondition::uniform(double rho) {
    InitialCondition ic;
    ic.kind = Kind::uniform;
    ic.density = rho;
    return ic;
}

InitialCondition InitialCondition::jam_block(double background, double block, double start,
                                             double end) {
    InitialCondition ic;
    ic.kind = Kind::jam_block;
    ic.density = background;
    ic.block_density = block;
    ic.block_start = start;
    ic.block_end = end;
    return ic;
}

InitialCondition InitialCondition::custom(std::vector<double> densities) {
    InitialCondition ic;
    ic.kind = Kind::custom_profile;
    ic.profile = std::move(densities);
    return ic;
}

std::vector<double> InitialCondition::sample(const Grid& grid, const FdParams& p) const {
    std::vector<double> rho(grid.n_x);
    switch (kind) {
        case Kind::uniform:
            std::fill(rho.begin(), rho.end(), density);
            break;
        case Kind::jam_block:
            for (int i = 0; i < grid.n_x; ++i) {
                const double x = grid.x_center(i);
                rho[i] = (x >= block_start && x <= block_end) ? block_density : density;
            }
            break;
        case Kind::custom_profile:
            if (static_cast<int>(profile.size()) != grid.n_x) {
                throw ConfigError("custom initial profile has " + std::to_string(profile.size()) +
                                  " values, grid has " + std::to_string(grid.n_x) + " cells");
            }
            rho = profile;
            break;
    }
    for (double r : rho) {
        if (!(r >= 0.0 && r <= p.rho_max)) {
            throw DomainError("initial density " + std::to_string(r) + " outside [0, rho_max]");
        }
    }
    return rho;
}

double godunov_flux(double rho_left, double rho_right, const FdParams& p) {
    if (!(rho_left >= 0.0 && rho_left <= p.rho_max) ||
        !(rho_right >= 0.0 && rho_right <= p.rho_max)) {
        throw DomainError("godunov_flux: density outside [0, rho_max]");
    }
    const double rc = p.critical_density();
    const double demand = flow_of_density(std::min(rho_left, rc), p);
    const double supply = flow_of_density(std::max(rho_right, rc), p);
    return std::min(demand, supply);
}

std::vector<double> step(std::span<const double> column, double dx, double dt_sub,
                         const FdParams& p, Boundary boundary) {
    if (!(dx > 0.0) || !(dt_sub > 0.0)) {
        throw ConfigError("step: dx and dt_sub must be positive");
    }
    const double cfl_limit = dx / p.v_free;
    if (dt_sub > cfl_limit * (1.0 + 1e-12)) {
        throw ConfigError("CFL violated: dt_sub " + std::to_string(dt_sub) + " > dx/v_free " +
                          std::to_string(cfl_limit));
    }
    const std::size_t n = column.size();
    std::vector<double> flux(n + 1, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
        flux[k] = godunov_flux(column[k - 1], column[k], p);
    }
    if (boundary == Boundary::transmissive && n > 0) {
        flux[0] = godunov_flux(column[0], column[0], p);
        flux[n] = godunov_flux(column[n - 1], column[n - 1], p);
    }
    const double ratio = dt_sub / dx;
    std::vector<double> next(n);
    const double slack = kRangeSlack * p.rho_max;
    for (std::size_t k = 0; k < n; ++k) {
        double r = column[k] - ratio * (flux[k + 1] - flux[k]);
        if (r < -slack || r > p.rho_max + slack || !std::isfinite(r)) {
            throw NumericError("step: density left [0, rho_max] at cell " + std::to_string(k));
        }
        next[k] = std::clamp(r, 0.0, p.rho_max);  // absorbs last-bit roundoff only
    }
    return next;
}

int substeps_per_frame(const Grid& grid, const FdParams& p) {
    return static_cast<int>(std::ceil(grid.dt() * p.v_free / grid.dx()));
}

Simulation simulate(const InitialCondition& ic, const Grid& grid, const FdParams& p,
                    Boundary boundary) {
    grid.validate();
    p.validate();
    std::vector<double> column = ic.sample(grid, p);
    const int substeps = substeps_per_frame(grid, p);
    const double dt_sub = grid.dt() / substeps;
    const double dx = grid.dx();

    Simulation out;
    out.density.grid = grid;
    out.density.values.resize(grid.n_x, grid.n_t);
    for (int i = 0; i < grid.n_x; ++i) out.density.values(i, 0) = column[i];
    for (int j = 1; j < grid.n_t; ++j) {
        for (int s = 0; s < substeps; ++s) column = step(column, dx, dt_sub, p, boundary);
        for (int i = 0; i < grid.n_x; ++i) out.density.values(i, j) = column[i];
    }
    out.velocity = velocity_of(out.density, p);
    return out;
}

VelocityField velocity_of(const DensityField& density, const FdParams& p) {
    VelocityField v{density.grid, Eigen::MatrixXd(density.values.rows(), density.values.cols())};
    for (Eigen::Index j = 0; j < v.values.cols(); ++j) {
        for (Eigen::Index i = 0; i < v.values.rows(); ++i) {
            v.values(i, j) = velocity_of_density(density.values(i, j), p);
        }
    }
    return v;
}

}  // namespace tse
