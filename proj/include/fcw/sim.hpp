#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fcw/conversion.hpp"
#include "fcw/dob.hpp"
#include "fcw/errors.hpp"
#include "fcw/vehicle.hpp"

namespace fcw::sim {

using Eigen::Vector3d;

inline constexpr double kPhysicsDt = 0.001;   // s, RK4 step
inline constexpr double kControlDt = 0.004;   // s, 250 Hz control tick
inline constexpr int kPhysicsPerTick = 4;

enum class Trajectory { hover, circle, accel_profile };
enum class Converter { case1, case2 };

enum class DisturbanceKind { none, sinusoid, step, pull_release };

/// External force disturbance description. Sinusoid amplitude is specified in
/// acceleration units (m/s^2) and converted with the vehicle mass; step and
/// pull-release are direct forces in newtons.
struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::none;
    double amplitude = 5.5;      // m/s^2, sinusoid per axis
    double amplitude_cap = 5.5;  // m/s^2
    double frequency = 0.15;     // Hz, sinusoid
    double force = 6.0;          // N, step / pull-release
    double start = 5.0;          // s, step onset
    double period = 12.0;        // s, pull-release cycle
    double lag = 0.2;            // s, pull-release edge smoothing
    int axis = 0;                // step / pull-release axis (0=x, 1=y, 2=z)

    void validate() const {
        if (kind == DisturbanceKind::sinusoid && amplitude > amplitude_cap)
            throw std::invalid_argument("DisturbanceSpec: sinusoid amplitude above cap");
        if (axis < 0 || axis > 2) throw std::invalid_argument("DisturbanceSpec: bad axis");
        if (kind == DisturbanceKind::pull_release && !(period > 0.0))
            throw std::invalid_argument("DisturbanceSpec: pull period must be positive");
    }
};

namespace detail {

/// Half-duty pull force smoothed by a first-order lag, evaluated in closed
/// form by walking the completed half-periods.
inline double pull_release_value(double t, double force, double period, double lag) {
    if (t <= 0.0) return 0.0;
    const double half = period / 2.0;
    const auto segments = static_cast<long>(t / half);
    double y = 0.0;
    for (long k = 0; k < segments; ++k) {
        const double target = (k % 2 == 0) ? force : 0.0;
        y = target + (y - target) * std::exp(-half / lag);
    }
    const double target = (segments % 2 == 0) ? force : 0.0;
    const double within = t - static_cast<double>(segments) * half;
    return target + (y - target) * std::exp(-within / lag);
}

}  // namespace detail

inline Vector3d disturbance_force(const DisturbanceSpec& spec, double t, double mass) {
    switch (spec.kind) {
        case DisturbanceKind::none:
            return Vector3d::Zero();
        case DisturbanceKind::sinusoid: {
            const double w = 2.0 * M_PI * spec.frequency;
            Vector3d f;
            for (int i = 0; i < 3; ++i)
                f[i] = mass * spec.amplitude * std::sin(w * t + 2.0 * M_PI * i / 3.0);
            return f;
        }
        case DisturbanceKind::step: {
            Vector3d f = Vector3d::Zero();
            if (t >= spec.start) f[spec.axis] = spec.force;
            return f;
        }
        case DisturbanceKind::pull_release: {
            Vector3d f = Vector3d::Zero();
            f[spec.axis] = detail::pull_release_value(t, spec.force, spec.period, spec.lag);
            return f;
        }
    }
    throw ConfigError("disturbance_force: unknown kind");
}

struct Reference {
    Vector3d position = Vector3d::Zero();
    Vector3d velocity = Vector3d::Zero();
    Vector3d accel = Vector3d::Zero();
};

/// Circular track in NED: starts at (radius, 0, -height), counterclockwise.
inline Reference circle_reference(double t, double radius = 3.0, double height = 5.0,
                                  double period = 12.0) {
    if (!(period > 0.0)) throw std::invalid_argument("circle_reference: period must be positive");
    const double w = 2.0 * M_PI / period;
    Reference r;
    r.position = {radius * std::cos(w * t), radius * std::sin(w * t), -height};
    r.velocity = {-radius * w * std::sin(w * t), radius * w * std::cos(w * t), 0.0};
    r.accel = {-radius * w * w * std::cos(w * t), -radius * w * w * std::sin(w * t), 0.0};
    return r;
}

namespace detail {

inline double segment_gate(double t, double t0, double t1, double rise) {
    if (t < t0 || t > t1) return 0.0;
    if (t < t0 + rise) return 0.5 * (1.0 - std::cos(M_PI * (t - t0) / rise));
    if (t > t1 - rise) return 0.5 * (1.0 - std::cos(M_PI * (t1 - t) / rise));
    return 1.0;
}

}  // namespace detail

/**
 * Bundled open-loop acceleration command: a vertical-maneuver segment followed
 * by a tilt segment, with gentle gates. Keeping the two segments disjoint
 * separates the common command-staleness floor from tilt-induced vertical
 * error, which is what the converter comparison measures.
 */
inline Vector3d accel_profile(double t) {
    const double gz = detail::segment_gate(t, 5.0, 31.0, 5.0);
    const double gx = detail::segment_gate(t, 32.0, 60.0, 5.0);
    return {gx * 2.0 * std::sin(0.17 * (t - 32.0)),
            gx * 1.44 * std::sin(0.17 * (t - 32.0) + M_PI / 2.0),
            gz * 1.5 * std::sin(0.66 * (t - 5.0))};
}

/// Tilt-only variant with a constant vertical pseudo-acceleration command.
inline Vector3d accel_profile_tilt_only(double t) {
    const double gx = detail::segment_gate(t, 5.0, 60.0, 5.0);
    return {gx * 2.5 * std::sin(0.07 * (t - 5.0)),
            gx * 1.8 * std::sin(0.07 * (t - 5.0) + M_PI / 2.0), 0.0};
}

struct ScenarioConfig {
    Converter converter = Converter::case2;
    bool dob_on = false;
    dob::QFilterConfig q_filter{};
    Trajectory trajectory = Trajectory::hover;
    DisturbanceSpec disturbance{};
    double duration = 30.0;          // s
    std::optional<double> j_override;  // plant roll/pitch inertia (controller unchanged)
    bool tilt_only_profile = false;  // accel_profile variant with constant vertical command
    Vector3d initial_body_rate = Vector3d::Zero();  // tumbling start for abort experiments
    double thrust_gain = 1.0;        // actuator gain error K applied to the realized thrust
    double command_delay = 0.0;      // s, plant-side lag on the command set (unknown to the DOB)
    unsigned long seed = 0;

    veh::VehicleParams vehicle{};
    conv::PositionGains outer{};
    double circle_radius = 3.0;
    double circle_height = 5.0;
    double circle_period = 12.0;
    double dhat_limit_accel = 6.0;   // m/s^2 per axis of compensation authority
    double warmup = 0.5;             // s, estimator ramp-in
    double metric_skip = 5.0;        // s, discarded at the head of metrics windows
    double accel_noise_std = 0.0;    // m/s^2, measured-acceleration noise (off by default)

    void validate() const {
        if (!(duration > 0.0)) throw std::invalid_argument("ScenarioConfig: duration must be positive");
        vehicle.validate();
        q_filter.validate();
        disturbance.validate();
        if (j_override && !(*j_override > 0.0))
            throw std::invalid_argument("ScenarioConfig: J override must be positive");
    }
};

/// Per-tick record of every signal in the loop, sampled at the control rate.
struct RunLog {
    std::vector<double> t;
    std::vector<Vector3d> position, position_ref;
    std::vector<Vector3d> accel_meas, accel_cmd;
    std::vector<Vector3d> attitude, attitude_cmd;
    std::vector<double> thrust;
    std::vector<Vector3d> force_desired, force_commanded;
    std::vector<Vector3d> disturbance, dhat;
    bool aborted = false;
    std::string abort_reason;

    std::size_t size() const { return t.size(); }
};

/**
 * Closed-loop scenario: outer loop (or open-loop profile) -> desired force ->
 * DOB compensation -> yaw derotation -> converter -> attitude PD + thrust ->
 * RK4 plant with injected disturbance. The estimator always runs; its output
 * feeds back only when the DOB is on. Deterministic for a fixed config.
 */
inline RunLog run(const ScenarioConfig& cfg) {
    cfg.validate();
    veh::VehicleParams plant = cfg.vehicle;
    if (cfg.j_override) {
        plant.inertia[0] = *cfg.j_override;
        plant.inertia[1] = *cfg.j_override;
    }

    const double mass = plant.mass;
    const double g = plant.gravity;

    veh::VehicleState state;
    state.body_rate = cfg.initial_body_rate;
    if (cfg.trajectory == Trajectory::circle) {
        const Reference r0 = circle_reference(0.0, cfg.circle_radius, cfg.circle_height,
                                              cfg.circle_period);
        state.position = r0.position;
        state.velocity = r0.velocity;
    }

    // Nominal model and filters always use the configured (nominal) vehicle.
    dob::DobState estimator(dob::build_nominal(cfg.vehicle), dob::build_q_filters(cfg.q_filter),
                            kControlDt, cfg.dhat_limit_accel * mass, cfg.warmup);
    veh::AttitudePd attitude_pd;

    std::mt19937_64 noise_rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    veh::ControlInput input_prev{Vector3d::Zero(), mass * g};
    Vector3d force_cmd_prev{0.0, 0.0, -mass * g};
    const int delay_ticks = static_cast<int>(std::llround(cfg.command_delay / kControlDt));
    std::vector<conv::CommandSet> command_queue;

    const auto ticks = static_cast<std::size_t>(std::llround(cfg.duration / kControlDt));
    RunLog log;
    log.t.reserve(ticks);

    for (std::size_t k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) * kControlDt;

        // Ideal IMU: true acceleration under the input currently applied.
        Vector3d accel_meas =
            veh::translational_accel(state, input_prev, disturbance_force(cfg.disturbance, t, mass), plant);
        if (cfg.accel_noise_std > 0.0)
            accel_meas += cfg.accel_noise_std *
                          Vector3d(noise(noise_rng), noise(noise_rng), noise(noise_rng));
        const Vector3d f_meas = mass * (accel_meas - Vector3d(0.0, 0.0, g));

        const Vector3d dhat =
            estimator.estimate(f_meas, force_cmd_prev, state.attitude.z(), t);

        Reference ref;
        Vector3d accel_cmd;
        if (cfg.trajectory == Trajectory::accel_profile) {
            accel_cmd = cfg.tilt_only_profile ? accel_profile_tilt_only(t) : accel_profile(t);
        } else {
            if (cfg.trajectory == Trajectory::circle)
                ref = circle_reference(t, cfg.circle_radius, cfg.circle_height, cfg.circle_period);
            accel_cmd = conv::position_controller(ref.position, ref.velocity, ref.accel, state,
                                                  cfg.outer);
        }
        accel_cmd = accel_cmd.cwiseMax(-cfg.outer.accel_limit).cwiseMin(cfg.outer.accel_limit);

        const Vector3d f_desired = conv::desired_force(accel_cmd, mass, g);
        const Vector3d f_commanded = cfg.dob_on ? dob::compensate(f_desired, dhat) : f_desired;

        const conv::PseudoAccel pseudo =
            conv::pseudo_accel_from_force(f_commanded, state.attitude.z(), mass);
        conv::CommandSet r;
        try {
            r = cfg.converter == Converter::case1
                    ? conv::convert_case1(pseudo, mass)
                    : conv::convert_case2(pseudo, state.attitude.x(), state.attitude.y(), mass);
        } catch (const ConversionError& e) {
            log.aborted = true;
            log.abort_reason = e.what();
            break;
        }

        const Vector3d attitude_cmd{r.roll, r.pitch, 0.0};
        conv::CommandSet r_applied = r;
        if (delay_ticks > 0) {
            command_queue.push_back(r);
            if (command_queue.size() > static_cast<std::size_t>(delay_ticks)) {
                r_applied = command_queue.front();
                command_queue.erase(command_queue.begin());
            } else {
                r_applied = conv::CommandSet{0.0, 0.0, mass * g};  // hover hold until filled
            }
        }
        veh::ControlInput input;
        input.torque =
            attitude_pd.step({r_applied.roll, r_applied.pitch, 0.0}, state, plant, kControlDt);
        input.thrust = cfg.thrust_gain * r_applied.thrust;

        log.t.push_back(t);
        log.position.push_back(state.position);
        log.position_ref.push_back(ref.position);
        log.accel_meas.push_back(accel_meas);
        log.accel_cmd.push_back(accel_cmd);
        log.attitude.push_back(state.attitude);
        log.attitude_cmd.push_back(attitude_cmd);
        log.thrust.push_back(input.thrust);
        log.force_desired.push_back(f_desired);
        log.force_commanded.push_back(f_commanded);
        log.disturbance.push_back(disturbance_force(cfg.disturbance, t, mass));
        log.dhat.push_back(dhat);

        try {
            for (int i = 0; i < kPhysicsPerTick; ++i) {
                const double tp = t + static_cast<double>(i) * kPhysicsDt;
                state = veh::step_rk4(state, input,
                                      disturbance_force(cfg.disturbance, tp, mass), plant,
                                      kPhysicsDt);
            }
        } catch (const VehicleAbort& e) {
            log.aborted = true;
            log.abort_reason = e.what();
            break;
        }

        input_prev = input;
        force_cmd_prev = f_commanded;
    }
    return log;
}

struct Metrics {
    Vector3d rms_position_error = Vector3d::Zero();
    Vector3d rms_accel_error = Vector3d::Zero();
    double max_position_deviation = 0.0;
    double dhat_rms_error = 0.0;      // |dhat - d| vector RMS
    double disturbance_rms = 0.0;     // |d| vector RMS
    std::size_t samples = 0;
};

/// Standard RMS metrics over the analysis window (first `skip` seconds dropped).
inline Metrics metrics(const RunLog& log, double skip = 5.0) {
    if (log.size() == 0) throw std::invalid_argument("metrics: empty log");
    std::size_t start = 0;
    while (start < log.size() && log.t[start] < skip) ++start;
    if (start >= log.size())
        throw std::invalid_argument("metrics: analysis window longer than the log");

    Metrics m;
    Vector3d pos_sq = Vector3d::Zero(), acc_sq = Vector3d::Zero();
    double dhat_sq = 0.0, dist_sq = 0.0;
    for (std::size_t i = start; i < log.size(); ++i) {
        const Vector3d pe = log.position[i] - log.position_ref[i];
        const Vector3d ae = log.accel_meas[i] - log.accel_cmd[i];
        pos_sq += pe.cwiseAbs2();
        acc_sq += ae.cwiseAbs2();
        m.max_position_deviation = std::max(m.max_position_deviation, pe.norm());
        dhat_sq += (log.dhat[i] - log.disturbance[i]).squaredNorm();
        dist_sq += log.disturbance[i].squaredNorm();
    }
    const double n = static_cast<double>(log.size() - start);
    m.rms_position_error = (pos_sq / n).cwiseSqrt();
    m.rms_accel_error = (acc_sq / n).cwiseSqrt();
    m.dhat_rms_error = std::sqrt(dhat_sq / n);
    m.disturbance_rms = std::sqrt(dist_sq / n);
    m.samples = static_cast<std::size_t>(n);
    return m;
}

struct MoiRow {
    Converter converter;
    double j = 0.0;
    Trajectory scenario;
    Metrics metrics;
};

/**
 * Converter matrix {case1, case2} x J values on (a) the bundled acceleration
 * profile and (b) circle position tracking. J overrides change the plant only;
 * gains and the nominal model stay at the configured values.
 */
inline std::vector<MoiRow> moi_comparison(const std::vector<double>& j_values,
                                          const ScenarioConfig& base) {
    std::vector<MoiRow> rows;
    for (Trajectory scenario : {Trajectory::accel_profile, Trajectory::circle}) {
        for (Converter converter : {Converter::case1, Converter::case2}) {
            for (double j : j_values) {
                if (!(j > 0.0)) throw std::invalid_argument("moi_comparison: J must be positive");
                ScenarioConfig cfg = base;
                cfg.trajectory = scenario;
                cfg.converter = converter;
                cfg.j_override = j;
                cfg.dob_on = false;
                cfg.disturbance.kind = DisturbanceKind::none;
                cfg.duration = scenario == Trajectory::accel_profile ? 60.0 : base.duration;
                rows.push_back({converter, j, scenario, metrics(run(cfg), cfg.metric_skip)});
            }
        }
    }
    return rows;
}

}  // namespace fcw::sim
