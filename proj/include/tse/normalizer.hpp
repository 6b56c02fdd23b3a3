#pragma once

#include "tse/lwr_sim.hpp"
#include "tse/physics.hpp"

namespace tse {

/// Maps physical coordinates onto the network's [-1, 1] inputs and its raw
/// output onto m/s. Derivatives taken with respect to normalized inputs must
/// be multiplied by x_scale() / t_scale() to get per-meter / per-second rates.
struct Normalizer {
    double x_min = 0.0, x_max = 5000.0;
    double t_min = 0.0, t_max = 240.0;
    double v_free = 25.0;

    static Normalizer from(const Grid& grid, const FdParams& p);

    double x(double x_phys) const { return 2.0 * (x_phys - x_min) / (x_max - x_min) - 1.0; }
    double t(double t_phys) const { return 2.0 * (t_phys - t_min) / (t_max - t_min) - 1.0; }
    double x_scale() const { return 2.0 / (x_max - x_min); }
    double t_scale() const { return 2.0 / (t_max - t_min); }
    double speed(double raw) const { return v_free * raw; }
};

}  // namespace tse
