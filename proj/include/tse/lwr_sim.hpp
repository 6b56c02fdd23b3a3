#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "tse/physics.hpp"

namespace tse {

/// Space-time discretization. Spatial values are cell-centered; column j of
/// a field holds the snapshot at t_min + j*dt.
struct Grid {
    double x_min = 0.0;
    double x_max = 5000.0;
    int n_x = 500;
    double t_min = 0.0;
    double t_max = 240.0;
    int n_t = 240;

    void validate() const;

    double dx() const { return (x_max - x_min) / n_x; }
    double dt() const { return (t_max - t_min) / n_t; }
    double x_center(int i) const { return x_min + (i + 0.5) * dx(); }
    double t_at(int j) const { return t_min + j * dt(); }
    long cells() const { return static_cast<long>(n_x) * n_t; }

    /// Index of the cell whose extent contains x (clamped to the grid).
    int cell_of(double x) const;

    bool operator==(const Grid&) const = default;
};

/// Density in veh/m, n_x rows by n_t columns.
struct DensityField {
    Grid grid;
    Eigen::MatrixXd values;
};

/// Speed in m/s, n_x rows by n_t columns.
struct VelocityField {
    Grid grid;
    Eigen::MatrixXd values;
};

struct InitialCondition {
    enum class Kind { uniform, jam_block, custom_profile };

    Kind kind = Kind::jam_block;
    double density = 0.01;          // uniform value, or background for jam_block
    double block_density = 0.05;
    double block_start = 3000.0;    // m
    double block_end = 4000.0;      // m
    std::vector<double> profile;    // custom_profile, one value per cell

    static InitialCondition uniform(double rho);
    static InitialCondition jam_block(double background, double block, double start,
                                      double end);
    static InitialCondition custom(std::vector<double> densities);

    /// Cell-centered densities on `grid`. Throws DomainError if any value is
    /// outside [0, rho_max], ConfigError if a custom profile has the wrong
    /// length.
    std::vector<double> sample(const Grid& grid, const FdParams& p) const;
};

/// Treatment of the two road ends. `closed` is zero flux in and out, which
/// conserves the vehicle count. `transmissive` copies the end cell into a
/// ghost cell (free outflow, inflow equal to the first cell's demand), under
/// which constant states are steady.
enum class Boundary { closed, transmissive };

/// Godunov (cell transmission) interface flux: min(demand(left), supply(right)).
double godunov_flux(double rho_left, double rho_right, const FdParams& p);

/// One conservative update. Refuses to run when dt_sub > dx / v_free.
std::vector<double> step(std::span<const double> column, double dx, double dt_sub,
                         const FdParams& p, Boundary boundary = Boundary::closed);

struct Simulation {
    DensityField density;
    VelocityField velocity;
};

/// Integrates from the initial condition, substepping internally so every
/// output column is exactly grid.dt() apart.
Simulation simulate(const InitialCondition& ic, const Grid& grid, const FdParams& p,
                    Boundary boundary = Boundary::closed);

/// Number of substeps per output frame used by simulate().
int substeps_per_frame(const Grid& grid, const FdParams& p);

VelocityField velocity_of(const DensityField& density, const FdParams& p);

}  // namespace tse
