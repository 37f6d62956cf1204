#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fcw/io.hpp"
#include "fcw/sim.hpp"

using namespace fcw;
using Eigen::Vector3d;

namespace {

sim::ScenarioConfig base_config() {
    sim::ScenarioConfig cfg;
    cfg.duration = 30.0;
    return cfg;
}

std::string serialize(const sim::RunLog& log) {
    std::ostringstream out;
    io::write_runlog_csv(log, out);
    return out.str();
}

/// The same control loop with the estimator physically absent; the dob-off
/// simulator run must match this bit for bit.
sim::RunLog run_without_estimator(const sim::ScenarioConfig& cfg) {
    veh::VehicleParams plant = cfg.vehicle;
    veh::VehicleState state;
    veh::AttitudePd pd;
    veh::ControlInput input_prev{Vector3d::Zero(), plant.mass * plant.gravity};
    sim::RunLog log;
    const auto ticks = static_cast<std::size_t>(std::llround(cfg.duration / sim::kControlDt));
    for (std::size_t k = 0; k < ticks; ++k) {
        const double t = static_cast<double>(k) * sim::kControlDt;
        const Vector3d accel_meas = veh::translational_accel(
            state, input_prev, sim::disturbance_force(cfg.disturbance, t, plant.mass), plant);
        sim::Reference ref;
        Vector3d accel_cmd = conv::position_controller(ref.position, ref.velocity, ref.accel,
                                                       state, cfg.outer);
        accel_cmd = accel_cmd.cwiseMax(-cfg.outer.accel_limit).cwiseMin(cfg.outer.accel_limit);
        const Vector3d f_desired = conv::desired_force(accel_cmd, plant.mass, plant.gravity);
        const auto pseudo = conv::pseudo_accel_from_force(f_desired, state.attitude.z(), plant.mass);
        const auto r = conv::convert_case2(pseudo, state.attitude.x(), state.attitude.y(), plant.mass);
        veh::ControlInput input;
        input.torque = pd.step({r.roll, r.pitch, 0.0}, state, plant, sim::kControlDt);
        input.thrust = r.thrust;
        log.t.push_back(t);
        log.position.push_back(state.position);
        log.accel_meas.push_back(accel_meas);
        for (int i = 0; i < sim::kPhysicsPerTick; ++i) {
            const double tp = t + static_cast<double>(i) * sim::kPhysicsDt;
            state = veh::step_rk4(state, input,
                                  sim::disturbance_force(cfg.disturbance, tp, plant.mass), plant,
                                  sim::kPhysicsDt);
        }
        input_prev = input;
    }
    return log;
}

}  // namespace

TEST_CASE("disturbance_signal") {
    SUBCASE("none is identically zero") {
        sim::DisturbanceSpec d;
        CHECK(sim::disturbance_force(d, 12.3, 3.24).norm() == doctest::Approx(0.0));
    }

    SUBCASE("sinusoid peaks at mass times amplitude per axis") {
        sim::DisturbanceSpec d;
        d.kind = sim::DisturbanceKind::sinusoid;
        d.amplitude = 5.5;
        double peak = 0.0;
        for (double t = 0.0; t < 20.0; t += 0.001)
            peak = std::max(peak, std::abs(sim::disturbance_force(d, t, 3.24).x()));
        CHECK(peak == doctest::Approx(3.24 * 5.5).epsilon(1e-4));  // 17.82 N
    }

    SUBCASE("sinusoid phases are spread across the axes") {
        sim::DisturbanceSpec d;
        d.kind = sim::DisturbanceKind::sinusoid;
        const Vector3d f = sim::disturbance_force(d, 0.0, 1.0);
        CHECK(f.x() == doctest::Approx(0.0));
        CHECK(f.y() == doctest::Approx(d.amplitude * std::sin(2.0 * M_PI / 3.0)));
        CHECK(f.z() == doctest::Approx(d.amplitude * std::sin(4.0 * M_PI / 3.0)));
    }

    SUBCASE("step switches exactly at the onset") {
        sim::DisturbanceSpec d;
        d.kind = sim::DisturbanceKind::step;
        d.force = 6.0;
        d.start = 5.0;
        d.axis = 0;
        CHECK(sim::disturbance_force(d, 4.999, 3.24).x() == doctest::Approx(0.0));
        CHECK(sim::disturbance_force(d, 5.0, 3.24).x() == doctest::Approx(6.0));
        CHECK(sim::disturbance_force(d, 30.0, 3.24).x() == doctest::Approx(6.0));
    }

    SUBCASE("pull-release rises with the smoothing lag and releases") {
        sim::DisturbanceSpec d;
        d.kind = sim::DisturbanceKind::pull_release;
        d.force = 6.0;
        d.period = 12.0;
        d.axis = 2;
        // deep into the first pull: fully risen
        CHECK(sim::disturbance_force(d, 5.9, 3.24).z() == doctest::Approx(6.0).epsilon(1e-6));
        // one lag constant into the pull: 1 - e^-1 of the way up
        CHECK(sim::disturbance_force(d, 0.2, 3.24).z() ==
              doctest::Approx(6.0 * (1.0 - std::exp(-1.0))).epsilon(1e-6));
        // deep into the release: back near zero
        CHECK(sim::disturbance_force(d, 11.9, 3.24).z() == doctest::Approx(0.0).epsilon(1e-6));
    }

    SUBCASE("bad axis rejected") {
        sim::DisturbanceSpec d;
        d.axis = 7;
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
}

TEST_CASE("circle_reference") {
    SUBCASE("starts on the circle at altitude") {
        const auto r = sim::circle_reference(0.0);
        CHECK(r.position.x() == doctest::Approx(3.0));
        CHECK(r.position.y() == doctest::Approx(0.0));
        CHECK(r.position.z() == doctest::Approx(-5.0));
    }

    SUBCASE("centripetal acceleration magnitude") {
        for (double t : {0.0, 1.7, 5.3}) {
            const auto r = sim::circle_reference(t, 3.0, 5.0, 12.0);
            const double w = 2.0 * M_PI / 12.0;
            CHECK(r.accel.norm() == doctest::Approx(3.0 * w * w));
        }
        CHECK(3.0 * std::pow(2.0 * M_PI / 12.0, 2.0) == doctest::Approx(0.823).epsilon(1e-3));
        CHECK(3.0 * std::pow(2.0 * M_PI / 12.0, 2.0) < 3.0);  // inside the command clamp
    }
}

TEST_CASE("run: equilibrium and determinism") {
    SUBCASE("hover holds position to a millimeter over 30 s") {
        auto cfg = base_config();
        const auto log = sim::run(cfg);
        REQUIRE_FALSE(log.aborted);
        double worst = 0.0;
        for (std::size_t i = 0; i < log.size(); ++i)
            worst = std::max(worst, (log.position[i] - log.position_ref[i]).norm());
        CHECK(worst < 1e-3);
    }

    SUBCASE("identical configs give bit-identical logs") {
        auto cfg = base_config();
        cfg.trajectory = sim::Trajectory::circle;
        cfg.disturbance.kind = sim::DisturbanceKind::sinusoid;
        cfg.dob_on = true;
        cfg.duration = 10.0;
        const std::string a = serialize(sim::run(cfg));
        const std::string b = serialize(sim::run(cfg));
        CHECK(a == b);
    }

    SUBCASE("dob-off trajectory is bit-identical to a loop without the estimator") {
        auto cfg = base_config();
        cfg.duration = 8.0;
        cfg.disturbance.kind = sim::DisturbanceKind::step;
        cfg.disturbance.force = 4.0;
        cfg.disturbance.start = 2.0;
        cfg.dob_on = false;
        const auto with_est = sim::run(cfg);
        const auto without = run_without_estimator(cfg);
        REQUIRE(with_est.size() == without.size());
        for (std::size_t i = 0; i < with_est.size(); ++i) {
            CHECK(with_est.position[i] == without.position[i]);
            CHECK(with_est.accel_meas[i] == without.accel_meas[i]);
        }
    }

    SUBCASE("dob-off still logs the internal estimate without feeding it back") {
        auto cfg = base_config();
        cfg.duration = 15.0;
        cfg.disturbance.kind = sim::DisturbanceKind::step;
        cfg.disturbance.force = 6.0;
        cfg.dob_on = false;
        const auto log = sim::run(cfg);
        CHECK(log.dhat.back().x() == doctest::Approx(6.0).epsilon(0.02));
        for (std::size_t i = 0; i < log.size(); ++i)
            CHECK(log.force_commanded[i] == log.force_desired[i]);
    }
}

TEST_CASE("run: constant-disturbance rejection") {
    auto cfg = base_config();
    cfg.duration = 40.0;
    cfg.disturbance.kind = sim::DisturbanceKind::step;
    cfg.disturbance.force = 6.0;
    cfg.disturbance.start = 5.0;
    cfg.disturbance.axis = 0;

    cfg.dob_on = false;
    const auto off = sim::run(cfg);
    cfg.dob_on = true;
    const auto on = sim::run(cfg);

    auto steady_x = [](const sim::RunLog& log) {
        double acc = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < log.size(); ++i)
            if (log.t[i] >= 35.0) {
                acc += std::abs(log.position[i].x());
                ++n;
            }
        return acc / n;
    };

    SUBCASE("dob-off offset follows the outer-loop stiffness") {
        // a_dist / kp = (6 / 3.24) / 0.3
        CHECK(steady_x(off) == doctest::Approx(6.0 / 3.24 / 0.3).epsilon(1e-3));
    }

    SUBCASE("dob-on removes at least 90 percent of the offset") {
        CHECK(steady_x(on) < 0.1 * steady_x(off));
    }

    SUBCASE("steady estimate within 2 percent of the injected constant") {
        double dhat = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < on.size(); ++i)
            if (on.t[i] >= 35.0) {
                dhat += on.dhat[i].x();
                ++n;
            }
        CHECK(dhat / n == doctest::Approx(6.0).epsilon(0.02));
    }

    SUBCASE("compensated command equals desired minus estimate, per log") {
        for (std::size_t i = 0; i < on.size(); ++i)
            CHECK((on.force_commanded[i] - (on.force_desired[i] - on.dhat[i])).norm() == 0.0);
    }
}

TEST_CASE("run: dob neutrality on the nominal plant") {
    auto cfg = base_config();
    cfg.trajectory = sim::Trajectory::circle;
    cfg.duration = 40.0;

    cfg.dob_on = false;
    const auto m_off = sim::metrics(sim::run(cfg), cfg.metric_skip);
    cfg.dob_on = true;
    const auto m_on = sim::metrics(sim::run(cfg), cfg.metric_skip);

    const double off = m_off.rms_position_error.norm();
    const double on = m_on.rms_position_error.norm();
    CHECK(std::abs(on - off) / off < 0.05);
}

TEST_CASE("run: vertical-channel delay compensation with constant pseudo z command") {
    // Tilt-only maneuvering: case 2's vertical error must not grow with the
    // plant inertia while case 1's strictly does.
    std::vector<double> case1, case2;
    for (double j : {0.1, 0.5, 1.0}) {
        for (auto conv : {sim::Converter::case1, sim::Converter::case2}) {
            sim::ScenarioConfig cfg;
            cfg.trajectory = sim::Trajectory::accel_profile;
            cfg.tilt_only_profile = true;
            cfg.converter = conv;
            cfg.j_override = j;
            cfg.duration = 60.0;
            const auto m = sim::metrics(sim::run(cfg), cfg.metric_skip);
            (conv == sim::Converter::case1 ? case1 : case2).push_back(m.rms_accel_error.z());
        }
    }
    const double spread = *std::max_element(case2.begin(), case2.end()) -
                          *std::min_element(case2.begin(), case2.end());
    // J-invariance: 2 percent relative or the absolute numerical floor
    CHECK(spread <= std::max(0.02 * case2[0], 1e-4));
    CHECK(case1[0] < case1[1]);
    CHECK(case1[1] < case1[2]);
}

TEST_CASE("run: time-domain corroboration of the stability verdicts") {
    // Worst-case constant plant perturbations: gain 1 +- 0.1, inertia
    // Jbar (1 +- 0.3), plus a 0.1 s command-path delay the estimator does not
    // know about. Certified filter settings must ride it out; filters at half
    // the certified boundary must show a non-decaying oscillation somewhere.
    auto corner_run = [](double tau1, double tau2, double gain, double j) {
        sim::ScenarioConfig cfg;
        cfg.duration = 60.0;
        cfg.dob_on = true;
        cfg.q_filter.tau1 = tau1;
        cfg.q_filter.tau2 = tau2;
        cfg.thrust_gain = gain;
        cfg.j_override = j;
        cfg.command_delay = 0.1;
        cfg.disturbance.kind = sim::DisturbanceKind::step;  // 1 N kick for excitation
        cfg.disturbance.force = 1.0;
        cfg.disturbance.start = 1.0;
        const auto log = sim::run(cfg);
        double max_err = 0.0, rms_mid = 0.0, rms_end = 0.0;
        int nm = 0, ne = 0;
        for (std::size_t i = 0; i < log.size(); ++i) {
            const double e = (log.position[i] - log.position_ref[i]).norm();
            max_err = std::max(max_err, e);
            if (log.t[i] >= 20.0 && log.t[i] < 30.0) { rms_mid += e * e; ++nm; }
            if (log.t[i] >= 50.0) { rms_end += e * e; ++ne; }
        }
        struct Out { bool aborted; double max_err, rms_mid, rms_end; };
        return Out{log.aborted, max_err, std::sqrt(rms_mid / nm), std::sqrt(rms_end / ne)};
    };

    SUBCASE("certified defaults stay bounded on every corner") {
        for (double gain : {0.9, 1.1})
            for (double j : {0.82 * 0.7, 0.82 * 1.3}) {
                const auto r = corner_run(0.15, 0.12, gain, j);
                CHECK_FALSE(r.aborted);
                CHECK(r.max_err < 1.0);
                CHECK(r.rms_end < 0.1);
            }
    }

    SUBCASE("half the certified boundary sustains an oscillation") {
        bool sustained = false;
        for (double gain : {0.9, 1.1})
            for (double j : {0.82 * 0.7, 0.82 * 1.3}) {
                const auto r = corner_run(0.05, 0.045, gain, j);
                if (r.aborted || (r.rms_end > 0.5 && r.rms_end > 0.9 * r.rms_mid))
                    sustained = true;
            }
        CHECK(sustained);
    }
}

TEST_CASE("run: compensated command tracks the desired force through the disturbance") {
    // kappa = F~_d + d should reconstruct F_d for in-band disturbances.
    sim::ScenarioConfig cfg;
    cfg.duration = 40.0;
    cfg.dob_on = true;
    cfg.disturbance.kind = sim::DisturbanceKind::sinusoid;  // 5.5 m/s^2 at 0.15 Hz
    const auto log = sim::run(cfg);
    double err_sq = 0.0, dist_sq = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (log.t[i] < 5.0) continue;
        const Vector3d kappa = log.force_commanded[i] + log.disturbance[i];
        err_sq += (kappa - log.force_desired[i]).squaredNorm();
        dist_sq += log.disturbance[i].squaredNorm();
        ++n;
    }
    CHECK(std::sqrt(err_sq / n) < 0.5 * std::sqrt(dist_sq / n));
}

TEST_CASE("run: abort handling") {
    // The command clamps keep disturbance-driven runs inside the envelope, so
    // a tumbling start is the honest way into the tilt diagnostic.
    auto cfg = base_config();
    cfg.duration = 20.0;
    cfg.initial_body_rate = {0.0, 8.0, 0.0};
    const auto log = sim::run(cfg);
    CHECK(log.aborted);
    CHECK_FALSE(log.abort_reason.empty());
    CHECK(log.size() < static_cast<std::size_t>(20.0 / sim::kControlDt));
}

TEST_CASE("metrics") {
    SUBCASE("perfect tracking scores zero") {
        sim::RunLog log;
        for (int i = 0; i < 100; ++i) {
            log.t.push_back(i * 0.1);
            log.position.push_back({1.0, 2.0, 3.0});
            log.position_ref.push_back({1.0, 2.0, 3.0});
            log.accel_meas.push_back(Vector3d::Zero());
            log.accel_cmd.push_back(Vector3d::Zero());
            log.disturbance.push_back(Vector3d::Zero());
            log.dhat.push_back(Vector3d::Zero());
        }
        const auto m = sim::metrics(log, 1.0);
        CHECK(m.rms_position_error.norm() == doctest::Approx(0.0));
        CHECK(m.rms_accel_error.norm() == doctest::Approx(0.0));
        CHECK(m.max_position_deviation == doctest::Approx(0.0));
    }

    SUBCASE("constant offset is reported unchanged") {
        sim::RunLog log;
        for (int i = 0; i < 100; ++i) {
            log.t.push_back(i * 0.1);
            log.position.push_back({0.3, 0.0, 0.0});
            log.position_ref.push_back(Vector3d::Zero());
            log.accel_meas.push_back(Vector3d::Zero());
            log.accel_cmd.push_back(Vector3d::Zero());
            log.disturbance.push_back(Vector3d::Zero());
            log.dhat.push_back(Vector3d::Zero());
        }
        const auto m = sim::metrics(log, 1.0);
        CHECK(m.rms_position_error.x() == doctest::Approx(0.3));
        CHECK(m.max_position_deviation == doctest::Approx(0.3));
    }

    SUBCASE("window longer than the log is an error") {
        sim::RunLog log;
        log.t.push_back(0.0);
        log.position.push_back(Vector3d::Zero());
        log.position_ref.push_back(Vector3d::Zero());
        log.accel_meas.push_back(Vector3d::Zero());
        log.accel_cmd.push_back(Vector3d::Zero());
        log.disturbance.push_back(Vector3d::Zero());
        log.dhat.push_back(Vector3d::Zero());
        CHECK_THROWS_AS(sim::metrics(log, 5.0), std::invalid_argument);
    }
}

TEST_CASE("moi_comparison table shape") {
    sim::ScenarioConfig base;
    base.duration = 20.0;  // circle scenario length; the profile scenario pins its own
    const auto rows = sim::moi_comparison({0.1, 1.0}, base);
    REQUIRE(rows.size() == 8);  // 2 scenarios x 2 converters x 2 inertias
    int profile_rows = 0;
    for (const auto& r : rows)
        if (r.scenario == sim::Trajectory::accel_profile) ++profile_rows;
    CHECK(profile_rows == 4);
}
