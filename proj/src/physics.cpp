#include "tse/physics.hpp"

#include <cmath>
#include <string>

#include "tse/errors.hpp"

namespace tse {

namespace {

void require_density(double rho, const FdParams& p) {
    if (!(rho >= 0.0 && rho <= p.rho_max)) {
        throw DomainError("density " + std::to_string(rho) + " outside [0, " +
                          std::to_string(p.rho_max) + "]");
    }
}

}  // namespace

void FdParams::validate() const {
    if (!(v_free > 0.0 && std::isfinite(v_free))) {
        throw DomainError("v_free must be positive and finite");
    }
    if (!(rho_max > 0.0 && std::isfinite(rho_max))) {
        throw DomainError("rho_max must be positive and finite");
    }
}

double velocity_of_density(double rho, const FdParams& p) {
    require_density(rho, p);
    return p.v_free * (1.0 - rho / p.rho_max);
}

double flow_of_density(double rho, const FdParams& p) {
    return rho * velocity_of_density(rho, p);
}

double density_of_velocity(double v, const FdParams& p) {
    if (!(v >= 0.0 && v <= p.v_free)) {
        throw DomainError("speed " + std::to_string(v) + " outside [0, " +
                          std::to_string(p.v_free) + "]");
    }
    return p.rho_max * (1.0 - v / p.v_free);
}

double lwr_residual(const ResidualInput& in, const FdParams& p) {
    if (!std::isfinite(in.v) || !std::isfinite(in.dv_dx) || !std::isfinite(in.dv_dt)) {
        throw NumericError("lwr_residual: non-finite input");
    }
    return p.rho_max * (1.0 - 2.0 * in.v / p.v_free) * in.dv_dx -
           (p.rho_max / p.v_free) * in.dv_dt;
}

double wave_speed(double rho, const FdParams& p) {
    return p.v_free * (1.0 - 2.0 * rho / p.rho_max);
}

}  // namespace tse
