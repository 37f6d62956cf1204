#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "fcw/errors.hpp"
#include "fcw/linsys.hpp"
#include "fcw/vehicle.hpp"

namespace fcw::dob {

using Eigen::Vector3d;
using linsys::TransferFunction;

/// 1/G; valid when the numerator is not identically zero.
inline TransferFunction tf_inverse(const TransferFunction& tf) {
    if (tf.num_is_zero()) throw CompositionError("tf_inverse: zero numerator");
    return TransferFunction(tf.den(), tf.num());
}

/// Diagonal nominal model Lambda_n = P_n: X and Y carry the attitude closed
/// loop (D s + P)/(Jbar s^2 + D s + P), Z is unity (rotor dynamics neglected).
struct NominalModel {
    std::array<TransferFunction, 3> channels;
};

inline NominalModel build_nominal(const veh::VehicleParams& nominal) {
    nominal.validate();
    auto attitude_loop = [&](int axis) {
        const double pj = nominal.p_gain[axis], dj = nominal.d_gain[axis];
        const double jj = nominal.inertia[axis];
        if (!(pj > 0.0) || !(dj > 0.0))
            throw std::invalid_argument("build_nominal: attitude gains must be positive");
        return TransferFunction({dj, pj}, {jj, dj, pj});
    };
    // X follows pitch (attitude axis 2), Y follows roll (attitude axis 1).
    return NominalModel{{attitude_loop(1), attitude_loop(0), TransferFunction::constant(1.0)}};
}

/// Second-order Q damping convention. The design text writes zeta*(tau s) with
/// zeta = 0.707, but only the critically damped double pole reproduces the
/// reported stability boundaries; all three are selectable.
enum class QDamping { critical, standard, literal };

inline double q_damping_coefficient(QDamping d, double zeta) {
    switch (d) {
        case QDamping::critical: return 2.0;
        case QDamping::standard: return 2.0 * zeta;
        case QDamping::literal: return zeta;
    }
    return 2.0;
}

struct QFilterConfig {
    double tau1 = 0.15;   // s, horizontal (second order)
    double tau2 = 0.12;   // s, vertical (first order)
    double zeta = 0.707;
    QDamping damping = QDamping::critical;

    void validate() const {
        if (!(tau1 > 0.0) || !(tau2 > 0.0) || !(zeta > 0.0))
            throw std::invalid_argument("QFilterConfig: tau1, tau2, zeta must be positive");
    }
};

inline TransferFunction q_horizontal(double tau1, double zeta, QDamping damping) {
    const double c = q_damping_coefficient(damping, zeta);
    return TransferFunction({1.0}, {tau1 * tau1, c * tau1, 1.0});
}

inline TransferFunction q_vertical(double tau2) {
    return TransferFunction({1.0}, {tau2, 1.0});
}

/// Q1 per channel; Q2 = Q1 (phase matching).
struct QFilters {
    std::array<TransferFunction, 3> q1;
    const std::array<TransferFunction, 3>& q2() const { return q1; }
};

inline QFilters build_q_filters(const QFilterConfig& cfg) {
    cfg.validate();
    const TransferFunction qh = q_horizontal(cfg.tau1, cfg.zeta, cfg.damping);
    return QFilters{{qh, qh, q_vertical(cfg.tau2)}};
}

/**
 * Discrete EID estimator. P_n^-1 is never realized alone: only the proper
 * products Q1 P_n^-1 (kappa path) and Q2 (command path) are discretized. The
 * raw estimate is clamped per axis and ramped in over the warm-up window so
 * engagement is transient-free.
 */
class DobState {
public:
    DobState(const NominalModel& nominal, const QFilters& q, double dt, double clamp_n,
             double warmup_s)
        : dt_(dt), clamp_n_(clamp_n), warmup_s_(warmup_s) {
        for (int i = 0; i < 3; ++i) {
            const TransferFunction kappa_tf =
                linsys::compose(q.q1[i], tf_inverse(nominal.channels[i]), linsys::Compose::series);
            kappa_path_.emplace_back(linsys::discretize_bilinear(kappa_tf, dt));
            cmd_path_.emplace_back(linsys::discretize_bilinear(q.q2()[i], dt));
        }
    }

    double dt() const { return dt_; }
    const Vector3d& last_estimate() const { return dhat_; }

    /**
     * One estimator tick: d_hat = Q1 (P_n^-1 F~) - Q2 F~_d,prev, evaluated in
     * the yaw-derotated frame and rotated back. f_cmd_prev is the previous
     * tick's commanded force, matching the measurement's causality.
     */
    Vector3d estimate(const Vector3d& f_meas, const Vector3d& f_cmd_prev, double psi,
                      double t_now) {
        const Eigen::Matrix3d derot = veh::yaw_rotation(psi).transpose();
        const Vector3d fm = derot * f_meas;
        const Vector3d fc = derot * f_cmd_prev;
        Vector3d raw;
        for (int i = 0; i < 3; ++i)
            raw[i] = kappa_path_[i].step(fm[i]) - cmd_path_[i].step(fc[i]);
        raw = derot.transpose() * raw;
        const double ramp =
            warmup_s_ > 0.0 ? std::min(1.0, std::max(0.0, t_now) / warmup_s_) : 1.0;
        dhat_ = ramp * raw.cwiseMax(-clamp_n_).cwiseMin(clamp_n_);
        return dhat_;
    }

    const std::vector<linsys::DiscreteFilter>& kappa_path() const { return kappa_path_; }
    const std::vector<linsys::DiscreteFilter>& cmd_path() const { return cmd_path_; }

private:
    std::vector<linsys::DiscreteFilter> kappa_path_;
    std::vector<linsys::DiscreteFilter> cmd_path_;
    double dt_;
    double clamp_n_;
    double warmup_s_;
    Vector3d dhat_ = Vector3d::Zero();
};

/// F~_d = F_d - d_hat (Eq. of the disturbance-compensating input).
inline Vector3d compensate(const Vector3d& f_desired, const Vector3d& dhat) {
    return f_desired - dhat;
}

}  // namespace fcw::dob
