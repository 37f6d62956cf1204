#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "fcw/errors.hpp"
#include "fcw/robust.hpp"
#include "fcw/sim.hpp"

namespace fcw::io {

/// Shortest round-trippable decimal; keeps CSV output bytewise reproducible.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const char* kRunLogHeader =
    "t,x,y,z,x_ref,y_ref,z_ref,ax,ay,az,ax_cmd,ay_cmd,az_cmd,"
    "roll,pitch,yaw,roll_cmd,pitch_cmd,yaw_cmd,thrust,"
    "fd_x,fd_y,fd_z,fcmd_x,fcmd_y,fcmd_z,d_x,d_y,d_z,dhat_x,dhat_y,dhat_z";

inline void write_runlog_csv(const sim::RunLog& log, std::ostream& out) {
    out << kRunLogHeader << "\n";
    auto v3 = [&](const Eigen::Vector3d& v) {
        return fmt(v.x()) + "," + fmt(v.y()) + "," + fmt(v.z());
    };
    for (std::size_t i = 0; i < log.size(); ++i) {
        out << fmt(log.t[i]) << ',' << v3(log.position[i]) << ',' << v3(log.position_ref[i]) << ','
            << v3(log.accel_meas[i]) << ',' << v3(log.accel_cmd[i]) << ',' << v3(log.attitude[i])
            << ',' << v3(log.attitude_cmd[i]) << ',' << fmt(log.thrust[i]) << ','
            << v3(log.force_desired[i]) << ',' << v3(log.force_commanded[i]) << ','
            << v3(log.disturbance[i]) << ',' << v3(log.dhat[i]) << "\n";
    }
}

inline std::vector<std::pair<std::string, double>> metrics_items(const sim::Metrics& m) {
    return {{"rms_pos_x", m.rms_position_error.x()},
            {"rms_pos_y", m.rms_position_error.y()},
            {"rms_pos_z", m.rms_position_error.z()},
            {"rms_acc_x", m.rms_accel_error.x()},
            {"rms_acc_y", m.rms_accel_error.y()},
            {"rms_acc_z", m.rms_accel_error.z()},
            {"max_pos_deviation", m.max_position_deviation},
            {"dhat_rms_error", m.dhat_rms_error},
            {"disturbance_rms", m.disturbance_rms},
            {"samples", static_cast<double>(m.samples)}};
}

inline void write_metrics_text(const sim::Metrics& m, std::ostream& out) {
    for (const auto& [k, v] : metrics_items(m)) out << k << "=" << fmt(v) << "\n";
}

inline void write_metrics_csv(const sim::Metrics& m, std::ostream& out) {
    out << "key,value\n";
    for (const auto& [k, v] : metrics_items(m)) out << k << ',' << fmt(v) << "\n";
}

inline void write_mu_curves_csv(const robust::MuResult& mu, const robust::SgtResult& sgt,
                                std::ostream& out) {
    out << "omega,mu_upper,sgt_product\n";
    for (std::size_t i = 0; i < mu.grid.size(); ++i)
        out << fmt(mu.grid[i]) << ',' << fmt(mu.mu_upper[i]) << ',' << fmt(sgt.product[i]) << "\n";
}

inline void write_sweep_csv(const robust::SweepResult& s, std::ostream& out) {
    out << "tau,peak_mu,peak_sgt,stable_mu,stable_sgt\n";
    for (std::size_t i = 0; i < s.taus.size(); ++i)
        out << fmt(s.taus[i]) << ',' << fmt(s.peak_mu[i]) << ',' << fmt(s.peak_sgt[i]) << ','
            << (s.peak_mu[i] < 1.0 ? 1 : 0) << ',' << (s.peak_sgt[i] < 1.0 ? 1 : 0) << "\n";
}

inline void write_moi_table_csv(const std::vector<sim::MoiRow>& rows, std::ostream& out) {
    out << "scenario,converter,j,rms_acc_x,rms_acc_y,rms_acc_z,rms_pos_x,rms_pos_y,rms_pos_z,"
           "max_pos_deviation\n";
    for (const auto& r : rows) {
        out << (r.scenario == sim::Trajectory::accel_profile ? "accel-profile" : "circle") << ','
            << (r.converter == sim::Converter::case1 ? "case1" : "case2") << ',' << fmt(r.j) << ','
            << fmt(r.metrics.rms_accel_error.x()) << ',' << fmt(r.metrics.rms_accel_error.y())
            << ',' << fmt(r.metrics.rms_accel_error.z()) << ','
            << fmt(r.metrics.rms_position_error.x()) << ',' << fmt(r.metrics.rms_position_error.y())
            << ',' << fmt(r.metrics.rms_position_error.z()) << ','
            << fmt(r.metrics.max_position_deviation) << "\n";
    }
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("io: cannot open output file " + path);
    return out;
}

}  // namespace fcw::io
