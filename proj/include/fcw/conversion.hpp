#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "fcw/errors.hpp"
#include "fcw/vehicle.hpp"

namespace fcw::conv {

using Eigen::Vector3d;

/// Commands rejected closer to free fall than this (pseudo z-accel floor, m/s^2).
inline constexpr double kFreeFallMargin = 0.5;
inline constexpr double kMinCosProduct = 0.1;

/// Yaw-derotated, gravity-removed acceleration (the frame where the
/// thrust-attitude map is diagonal-friendly).
struct PseudoAccel {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vector3d vec() const { return {x, y, z}; }
    static PseudoAccel from(const Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// Desired pitch, roll and total thrust: everything that fixes translational
/// force at zero yaw.
struct CommandSet {
    double pitch = 0.0;   // theta_d, rad
    double roll = 0.0;    // phi_d, rad
    double thrust = 0.0;  // T_t,d, N (nonnegative magnitude)
};

/// X~dd = R^-1(psi) F / m.
inline PseudoAccel pseudo_accel_from_force(const Vector3d& force, double psi, double mass) {
    if (!(mass > 0.0)) throw std::invalid_argument("pseudo_accel_from_force: mass must be positive");
    return PseudoAccel::from(veh::yaw_rotation(psi).transpose() * force / mass);
}

/// Forward model m X~dd = -h(phi, theta) T_t; the converters' round-trip oracle.
inline PseudoAccel accel_from_r(const CommandSet& r, double mass) {
    if (!(mass > 0.0)) throw std::invalid_argument("accel_from_r: mass must be positive");
    const Vector3d h = veh::thrust_direction({r.roll, r.pitch, 0.0});
    return PseudoAccel::from(-h * r.thrust / mass);
}

inline void check_convertible(const PseudoAccel& a) {
    if (!(a.z <= -kFreeFallMargin))
        throw ConversionError(
            "converter: commanded pseudo z-acceleration within the free-fall margin; "
            "clamp the acceleration command");
}

/**
 * Naive kinematic inversion: attitude and thrust both derived from the
 * commanded acceleration. Thrust is the full commanded-force magnitude, so it
 * anticipates an attitude the vehicle has not reached yet.
 */
inline CommandSet convert_case1(const PseudoAccel& a, double mass) {
    check_convertible(a);
    CommandSet r;
    r.pitch = std::atan(a.x / a.z);
    r.roll = std::atan(-a.y * std::cos(r.pitch) / a.z);
    r.thrust = mass * std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z);
    return r;
}

/**
 * Dynamics-aware inversion: same attitude commands, but thrust compensates the
 * measured attitude, so the vertical channel is realized without waiting for
 * the attitude loop.
 */
inline CommandSet convert_case2(const PseudoAccel& a, double roll_meas, double pitch_meas,
                                double mass) {
    check_convertible(a);
    const double cos_prod = std::cos(roll_meas) * std::cos(pitch_meas);
    if (cos_prod < kMinCosProduct)
        throw ConversionError("convert_case2: measured attitude too far from level");
    CommandSet r;
    r.pitch = std::atan(a.x / a.z);
    r.roll = std::atan(-a.y * std::cos(r.pitch) / a.z);
    r.thrust = -mass * a.z / cos_prod;
    return r;
}

/// F_d = m (Xdd_d - g zhat).
inline Vector3d desired_force(const Vector3d& accel_cmd, double mass, double gravity = veh::kGravity) {
    return mass * (accel_cmd - Vector3d(0.0, 0.0, gravity));
}

struct PositionGains {
    double kp = 0.3;
    double kd = 0.7;
    double accel_limit = 3.0;  // m/s^2 per component
};

/// Outer PD with feedforward, each component clamped to the acceleration limit.
inline Vector3d position_controller(const Vector3d& pos_ref, const Vector3d& vel_ref,
                                    const Vector3d& accel_ref, const veh::VehicleState& s,
                                    const PositionGains& g) {
    Vector3d a = g.kp * (pos_ref - s.position) + g.kd * (vel_ref - s.velocity) + accel_ref;
    return a.cwiseMax(-g.accel_limit).cwiseMin(g.accel_limit);
}

}  // namespace fcw::conv
