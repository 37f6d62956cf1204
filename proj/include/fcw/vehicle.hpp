#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "fcw/errors.hpp"

namespace fcw::veh {

using Eigen::Matrix3d;
using Eigen::Vector3d;

inline constexpr double kGravity = 9.81;        // m/s^2, NED +z down
inline constexpr double kTiltAbortRad = 1.45;   // gimbal proximity diagnostic

/// Physical constants and attitude PD gains of the simulated platform.
struct VehicleParams {
    double mass = 3.24;                          // kg
    Vector3d inertia{0.82, 0.82, 1.49};          // kg m^2, diagonal (roll, pitch, yaw)
    Vector3d p_gain{3.0, 3.0, 3.0};              // attitude P per axis
    Vector3d d_gain{1.0, 1.0, 1.0};              // attitude D per axis
    double gravity = kGravity;

    void validate() const {
        if (!(mass > 0.0)) throw std::invalid_argument("VehicleParams: mass must be positive");
        if (!(inertia.minCoeff() > 0.0))
            throw std::invalid_argument("VehicleParams: inertia entries must be positive");
    }
};

/// Rigid-body state in the earth-fixed NED frame; q = (roll, pitch, yaw), ZYX Euler.
struct VehicleState {
    Vector3d position = Vector3d::Zero();
    Vector3d velocity = Vector3d::Zero();
    Vector3d attitude = Vector3d::Zero();        // (phi, theta, psi), rad
    Vector3d body_rate = Vector3d::Zero();       // (p, q, r), rad/s
};

/// Attitude-loop torque command plus total thrust magnitude.
struct ControlInput {
    Vector3d torque = Vector3d::Zero();          // N m, body axes
    double thrust = 0.0;                         // N, T_t >= 0
};

/// Body-z thrust axis resolved at yaw = 0: h = [cos(phi) sin(theta), -sin(phi), cos(phi) cos(theta)].
inline Vector3d thrust_direction(const Vector3d& attitude) {
    const double cf = std::cos(attitude.x()), sf = std::sin(attitude.x());
    const double ct = std::cos(attitude.y()), st = std::sin(attitude.y());
    return {cf * st, -sf, cf * ct};
}

inline Matrix3d yaw_rotation(double psi) {
    const double c = std::cos(psi), s = std::sin(psi);
    Matrix3d r;
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return r;
}

/// Body-to-earth rotation, ZYX convention: R = Rz(psi) Ry(theta) Rx(phi).
inline Matrix3d rotation_matrix(const Vector3d& attitude) {
    const double cf = std::cos(attitude.x()), sf = std::sin(attitude.x());
    const double ct = std::cos(attitude.y()), st = std::sin(attitude.y());
    const double cp = std::cos(attitude.z()), sp = std::sin(attitude.z());
    Matrix3d r;
    r << cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
         sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
         -st,     ct * sf,               ct * cf;
    return r;
}

/// Body rates to ZYX Euler-angle rates (exact kinematics, no small-angle shortcut).
inline Vector3d euler_rates(const Vector3d& attitude, const Vector3d& body_rate) {
    const double cf = std::cos(attitude.x()), sf = std::sin(attitude.x());
    const double ct = std::cos(attitude.y()), tt = std::tan(attitude.y());
    const double p = body_rate.x(), q = body_rate.y(), r = body_rate.z();
    return {p + (q * sf + r * cf) * tt, q * cf - r * sf, (q * sf + r * cf) / ct};
}

struct StateDerivative {
    Vector3d position;
    Vector3d velocity;
    Vector3d attitude;
    Vector3d body_rate;
};

/// Earth-frame translational acceleration for the given state and inputs.
inline Vector3d translational_accel(const VehicleState& s, const ControlInput& u,
                                    const Vector3d& d_force, const VehicleParams& p) {
    const Vector3d thrust_earth =
        -yaw_rotation(s.attitude.z()) * thrust_direction(s.attitude) * u.thrust;
    return (thrust_earth + d_force) / p.mass + Vector3d(0.0, 0.0, p.gravity);
}

/**
 * Full rigid-body derivative: translational dynamics with gravity and external
 * force, rotational dynamics including the Coriolis term Omega x J Omega, and
 * exact Euler-rate kinematics. Aborts near the pitch singularity.
 */
inline StateDerivative dynamics_derivative(const VehicleState& s, const ControlInput& u,
                                           const Vector3d& d_force, const VehicleParams& p) {
    if (std::abs(s.attitude.y()) > kTiltAbortRad || std::abs(s.attitude.x()) > kTiltAbortRad)
        throw VehicleAbort("dynamics_derivative: attitude beyond tilt limit (gimbal proximity)");
    StateDerivative d;
    d.position = s.velocity;
    d.velocity = translational_accel(s, u, d_force, p);
    d.attitude = euler_rates(s.attitude, s.body_rate);
    const Vector3d j_omega = p.inertia.cwiseProduct(s.body_rate);
    d.body_rate =
        (u.torque - s.body_rate.cross(j_omega)).cwiseQuotient(p.inertia);
    return d;
}

/**
 * Attitude PD with the derivative acting on the tracking error, matching the
 * closed-loop response (D s + P)/(J s^2 + D s + P) of the design model. The
 * error rate comes from a backward difference, zero on the first tick.
 */
class AttitudePd {
public:
    Eigen::Vector3d step(const Vector3d& attitude_cmd, const VehicleState& s,
                         const VehicleParams& p, double dt) {
        const Vector3d error = attitude_cmd - s.attitude;
        const Vector3d error_rate = primed_ ? ((error - prev_error_) / dt).eval()
                                            : Vector3d::Zero().eval();
        prev_error_ = error;
        primed_ = true;
        return p.p_gain.cwiseProduct(error) + p.d_gain.cwiseProduct(error_rate);
    }

    void reset() { primed_ = false; }

private:
    Vector3d prev_error_ = Vector3d::Zero();
    bool primed_ = false;
};

/// Classical fixed-step RK4 advance; d_force held constant over the step.
inline VehicleState step_rk4(const VehicleState& s, const ControlInput& u,
                             const Vector3d& d_force, const VehicleParams& p, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be positive");

    auto shifted = [&](const StateDerivative& k, double h) {
        VehicleState n;
        n.position = s.position + h * k.position;
        n.velocity = s.velocity + h * k.velocity;
        n.attitude = s.attitude + h * k.attitude;
        n.body_rate = s.body_rate + h * k.body_rate;
        return n;
    };

    const StateDerivative k1 = dynamics_derivative(s, u, d_force, p);
    const StateDerivative k2 = dynamics_derivative(shifted(k1, dt / 2.0), u, d_force, p);
    const StateDerivative k3 = dynamics_derivative(shifted(k2, dt / 2.0), u, d_force, p);
    const StateDerivative k4 = dynamics_derivative(shifted(k3, dt), u, d_force, p);

    VehicleState out;
    out.position =
        s.position + dt / 6.0 * (k1.position + 2.0 * k2.position + 2.0 * k3.position + k4.position);
    out.velocity =
        s.velocity + dt / 6.0 * (k1.velocity + 2.0 * k2.velocity + 2.0 * k3.velocity + k4.velocity);
    out.attitude =
        s.attitude + dt / 6.0 * (k1.attitude + 2.0 * k2.attitude + 2.0 * k3.attitude + k4.attitude);
    out.body_rate = s.body_rate +
                    dt / 6.0 * (k1.body_rate + 2.0 * k2.body_rate + 2.0 * k3.body_rate + k4.body_rate);
    return out;
}

}  // namespace fcw::veh
