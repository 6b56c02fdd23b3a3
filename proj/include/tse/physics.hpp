#pragma once

// Greenshields fundamental diagram and the velocity form of the LWR
// conservation law. SI units: meters, seconds, vehicles.

namespace tse {

struct FdParams {
    double v_free = 25.0;   // m/s
    double rho_max = 0.05;  // veh/m

    /// Throws DomainError unless both constants are positive and finite.
    void validate() const;

    double critical_density() const { return 0.5 * rho_max; }
    double max_flow() const { return 0.25 * v_free * rho_max; }
};

struct ResidualInput {
    double v = 0.0;      // m/s
    double dv_dx = 0.0;  // 1/s
    double dv_dt = 0.0;  // m/s^2
};

/// v(rho) = v_free (1 - rho/rho_max). Throws DomainError for rho outside
/// [0, rho_max].
double velocity_of_density(double rho, const FdParams& p);

/// q(rho) = rho v(rho), veh/s.
double flow_of_density(double rho, const FdParams& p);

/// Inverse of velocity_of_density on [0, v_free].
double density_of_velocity(double v, const FdParams& p);

/// rho_max (1 - 2v/v_free) dv/dx - (rho_max/v_free) dv/dt.
///
/// This is dq/dx + drho/dt with rho and q eliminated through the
/// fundamental diagram, so a zero residual means the velocity field
/// conserves vehicles. Throws NumericError on non-finite input.
double lwr_residual(const ResidualInput& in, const FdParams& p);

/// Characteristic speed q'(rho) = v_free (1 - 2 rho/rho_max).
double wave_speed(double rho, const FdParams& p);

}  // namespace tse
