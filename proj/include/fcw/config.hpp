#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "fcw/errors.hpp"
#include "fcw/robust.hpp"
#include "fcw/sim.hpp"

namespace fcw::cfg {

/// Everything the workbench runs from: vehicle constants, controller gains,
/// filter and uncertainty settings, scenario defaults, output directory.
/// Shipped defaults encode the platform table of the design.
struct WorkbenchConfig {
    veh::VehicleParams vehicle{};
    conv::PositionGains outer{};
    dob::QFilterConfig qfilter{};
    robust::UncertaintyModel uncertainty{};

    sim::Converter converter = sim::Converter::case2;
    bool dob_on = false;
    sim::Trajectory trajectory = sim::Trajectory::hover;
    sim::DisturbanceSpec disturbance{};
    double duration = 30.0;
    unsigned long seed = 0;
    double warmup = 0.5;
    double metric_skip = 5.0;
    double dhat_limit = 6.0;  // m/s^2 per axis
    double accel_noise_std = 0.0;
    double circle_radius = 3.0;
    double circle_height = 5.0;
    double circle_period = 12.0;
    Eigen::Vector3d initial_rate = Eigen::Vector3d::Zero();

    std::string output_dir = "out";

    sim::ScenarioConfig scenario() const {
        sim::ScenarioConfig s;
        s.converter = converter;
        s.dob_on = dob_on;
        s.q_filter = qfilter;
        s.trajectory = trajectory;
        s.disturbance = disturbance;
        s.duration = duration;
        s.seed = seed;
        s.vehicle = vehicle;
        s.outer = outer;
        s.circle_radius = circle_radius;
        s.circle_height = circle_height;
        s.circle_period = circle_period;
        s.dhat_limit_accel = dhat_limit;
        s.warmup = warmup;
        s.metric_skip = metric_skip;
        s.accel_noise_std = accel_noise_std;
        s.initial_body_rate = initial_rate;
        return s;
    }

    robust::AnalysisSetup analysis() const {
        robust::AnalysisSetup a;
        a.nominal = vehicle;
        a.qcfg = qfilter;
        a.uncertainty = uncertainty;
        return a;
    }

    void validate() const {
        vehicle.validate();
        qfilter.validate();
        uncertainty.validate();
        disturbance.validate();
        if (!(duration > 0.0)) throw ConfigError("config: scenario.duration must be positive");
        if (!(warmup >= 0.0)) throw ConfigError("config: scenario.warmup must be nonnegative");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    }
}

}  // namespace detail

/// "none" | "sinusoid:amp=5.5,freq=0.15" | "step:force=6,start=5,axis=x" |
/// "pull:force=6,period=12,axis=z"
inline sim::DisturbanceSpec parse_disturbance(const std::string& text) {
    sim::DisturbanceSpec d;
    const std::string t = detail::trim(text);
    const auto colon = t.find(':');
    const std::string kind = detail::trim(t.substr(0, colon));
    if (kind == "none") {
        d.kind = sim::DisturbanceKind::none;
        if (colon != std::string::npos) throw ConfigError("disturbance: 'none' takes no arguments");
        return d;
    }
    if (kind == "sinusoid") d.kind = sim::DisturbanceKind::sinusoid;
    else if (kind == "step") d.kind = sim::DisturbanceKind::step;
    else if (kind == "pull") d.kind = sim::DisturbanceKind::pull_release;
    else throw ConfigError("disturbance: unknown kind '" + kind + "'");

    std::string rest = colon == std::string::npos ? "" : t.substr(colon + 1);
    std::istringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("disturbance: expected key=value in '" + item + "'");
        const std::string key = detail::trim(item.substr(0, eq));
        const std::string val = detail::trim(item.substr(eq + 1));
        if (key == "amp") d.amplitude = detail::to_double(key, val);
        else if (key == "freq") d.frequency = detail::to_double(key, val);
        else if (key == "force") d.force = detail::to_double(key, val);
        else if (key == "start") d.start = detail::to_double(key, val);
        else if (key == "period") d.period = detail::to_double(key, val);
        else if (key == "lag") d.lag = detail::to_double(key, val);
        else if (key == "axis") {
            if (val == "x") d.axis = 0;
            else if (val == "y") d.axis = 1;
            else if (val == "z") d.axis = 2;
            else throw ConfigError("disturbance: axis must be x, y or z");
        } else {
            throw ConfigError("disturbance: unknown key '" + key + "'");
        }
    }
    d.validate();
    return d;
}

inline std::string disturbance_to_string(const sim::DisturbanceSpec& d) {
    std::ostringstream out;
    const char axis = d.axis == 0 ? 'x' : d.axis == 1 ? 'y' : 'z';
    switch (d.kind) {
        case sim::DisturbanceKind::none: return "none";
        case sim::DisturbanceKind::sinusoid:
            out << "sinusoid:amp=" << d.amplitude << ",freq=" << d.frequency;
            break;
        case sim::DisturbanceKind::step:
            out << "step:force=" << d.force << ",start=" << d.start << ",axis=" << axis;
            break;
        case sim::DisturbanceKind::pull_release:
            out << "pull:force=" << d.force << ",period=" << d.period << ",lag=" << d.lag
                << ",axis=" << axis;
            break;
    }
    return out.str();
}

inline void apply_key(WorkbenchConfig& c, const std::string& section, const std::string& key,
                      const std::string& value) {
    using detail::to_double;
    const std::string full = section + "." + key;
    if (section == "vehicle") {
        if (key == "mass") c.vehicle.mass = to_double(full, value);
        else if (key == "j1") c.vehicle.inertia[0] = to_double(full, value);
        else if (key == "j2") c.vehicle.inertia[1] = to_double(full, value);
        else if (key == "j3") c.vehicle.inertia[2] = to_double(full, value);
        else if (key == "gravity") c.vehicle.gravity = to_double(full, value);
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "attitude") {
        if (key == "p_gain") c.vehicle.p_gain.setConstant(to_double(full, value));
        else if (key == "d_gain") c.vehicle.d_gain.setConstant(to_double(full, value));
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "outer") {
        if (key == "kp") c.outer.kp = to_double(full, value);
        else if (key == "kd") c.outer.kd = to_double(full, value);
        else if (key == "accel_limit") c.outer.accel_limit = to_double(full, value);
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "qfilter") {
        if (key == "tau1") c.qfilter.tau1 = to_double(full, value);
        else if (key == "tau2") c.qfilter.tau2 = to_double(full, value);
        else if (key == "zeta") c.qfilter.zeta = to_double(full, value);
        else if (key == "damping") {
            if (value == "critical") c.qfilter.damping = dob::QDamping::critical;
            else if (value == "standard") c.qfilter.damping = dob::QDamping::standard;
            else if (value == "literal") c.qfilter.damping = dob::QDamping::literal;
            else throw ConfigError("config: qfilter.damping must be critical|standard|literal");
        } else throw ConfigError("config: unknown key " + full);
    } else if (section == "uncertainty") {
        if (key == "delta_max") c.uncertainty.delta_max = to_double(full, value);
        else if (key == "k_delta_max") c.uncertainty.k_delta_max = to_double(full, value);
        else if (key == "j_delta_max") c.uncertainty.j_delta_max = to_double(full, value);
        else if (key == "i_gain") c.uncertainty.i_gain = to_double(full, value);
        else if (key == "w_delta") {
            if (value == "exact") c.uncertainty.w_delta = robust::WDeltaForm::exact;
            else if (value == "rational") c.uncertainty.w_delta = robust::WDeltaForm::rational;
            else throw ConfigError("config: uncertainty.w_delta must be exact|rational");
        } else if (key == "wj_form") {
            if (value == "pd") c.uncertainty.wj_form = robust::WjForm::pd;
            else if (value == "paper") c.uncertainty.wj_form = robust::WjForm::paper;
            else throw ConfigError("config: uncertainty.wj_form must be pd|paper");
        } else throw ConfigError("config: unknown key " + full);
    } else if (section == "scenario") {
        if (key == "duration") c.duration = to_double(full, value);
        else if (key == "seed") c.seed = static_cast<unsigned long>(to_double(full, value));
        else if (key == "warmup") c.warmup = to_double(full, value);
        else if (key == "metric_skip") c.metric_skip = to_double(full, value);
        else if (key == "dhat_limit") c.dhat_limit = to_double(full, value);
        else if (key == "accel_noise_std") c.accel_noise_std = to_double(full, value);
        else if (key == "circle_radius") c.circle_radius = to_double(full, value);
        else if (key == "circle_height") c.circle_height = to_double(full, value);
        else if (key == "circle_period") c.circle_period = to_double(full, value);
        else if (key == "initial_rate") {
            std::istringstream vs(value);
            std::string part;
            int idx = 0;
            while (std::getline(vs, part, ',') && idx < 3)
                c.initial_rate[idx++] = to_double(full, detail::trim(part));
            if (idx != 3) throw ConfigError("config: initial_rate needs three components");
        }
        else if (key == "disturbance") c.disturbance = parse_disturbance(value);
        else if (key == "converter") {
            if (value == "case1") c.converter = sim::Converter::case1;
            else if (value == "case2") c.converter = sim::Converter::case2;
            else throw ConfigError("config: scenario.converter must be case1|case2");
        } else if (key == "dob") {
            if (value == "on") c.dob_on = true;
            else if (value == "off") c.dob_on = false;
            else throw ConfigError("config: scenario.dob must be on|off");
        } else if (key == "trajectory") {
            if (value == "hover") c.trajectory = sim::Trajectory::hover;
            else if (value == "circle") c.trajectory = sim::Trajectory::circle;
            else if (value == "accel-profile") c.trajectory = sim::Trajectory::accel_profile;
            else throw ConfigError("config: scenario.trajectory must be hover|circle|accel-profile");
        } else throw ConfigError("config: unknown key " + full);
    } else if (section == "output") {
        if (key == "dir") c.output_dir = value;
        else throw ConfigError("config: unknown key " + full);
    } else {
        throw ConfigError("config: unknown section [" + section + "]");
    }
}

inline WorkbenchConfig load(std::istream& in) {
    WorkbenchConfig c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section header at line " + std::to_string(lineno));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("config: key outside any section at line " + std::to_string(lineno));
        apply_key(c, section, key, value);
    }
    c.validate();
    return c;
}

inline WorkbenchConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    return load(in);
}

inline void save(const WorkbenchConfig& c, std::ostream& out) {
    auto num = [](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    };
    out << "[vehicle]\n"
        << "mass = " << num(c.vehicle.mass) << "\n"
        << "j1 = " << num(c.vehicle.inertia[0]) << "\n"
        << "j2 = " << num(c.vehicle.inertia[1]) << "\n"
        << "j3 = " << num(c.vehicle.inertia[2]) << "\n"
        << "gravity = " << num(c.vehicle.gravity) << "\n\n"
        << "[attitude]\n"
        << "p_gain = " << num(c.vehicle.p_gain[0]) << "\n"
        << "d_gain = " << num(c.vehicle.d_gain[0]) << "\n\n"
        << "[outer]\n"
        << "kp = " << num(c.outer.kp) << "\n"
        << "kd = " << num(c.outer.kd) << "\n"
        << "accel_limit = " << num(c.outer.accel_limit) << "\n\n"
        << "[qfilter]\n"
        << "tau1 = " << num(c.qfilter.tau1) << "\n"
        << "tau2 = " << num(c.qfilter.tau2) << "\n"
        << "zeta = " << num(c.qfilter.zeta) << "\n"
        << "damping = "
        << (c.qfilter.damping == dob::QDamping::critical
                ? "critical"
                : c.qfilter.damping == dob::QDamping::standard ? "standard" : "literal")
        << "\n\n"
        << "[uncertainty]\n"
        << "delta_max = " << num(c.uncertainty.delta_max) << "\n"
        << "k_delta_max = " << num(c.uncertainty.k_delta_max) << "\n"
        << "j_delta_max = " << num(c.uncertainty.j_delta_max) << "\n"
        << "w_delta = " << (c.uncertainty.w_delta == robust::WDeltaForm::exact ? "exact" : "rational")
        << "\n"
        << "wj_form = " << (c.uncertainty.wj_form == robust::WjForm::pd ? "pd" : "paper") << "\n"
        << "i_gain = " << num(c.uncertainty.i_gain) << "\n\n"
        << "[scenario]\n"
        << "duration = " << num(c.duration) << "\n"
        << "converter = " << (c.converter == sim::Converter::case1 ? "case1" : "case2") << "\n"
        << "dob = " << (c.dob_on ? "on" : "off") << "\n"
        << "trajectory = "
        << (c.trajectory == sim::Trajectory::hover
                ? "hover"
                : c.trajectory == sim::Trajectory::circle ? "circle" : "accel-profile")
        << "\n"
        << "disturbance = " << disturbance_to_string(c.disturbance) << "\n"
        << "seed = " << c.seed << "\n"
        << "warmup = " << num(c.warmup) << "\n"
        << "metric_skip = " << num(c.metric_skip) << "\n"
        << "dhat_limit = " << num(c.dhat_limit) << "\n"
        << "accel_noise_std = " << num(c.accel_noise_std) << "\n"
        << "circle_radius = " << num(c.circle_radius) << "\n"
        << "circle_height = " << num(c.circle_height) << "\n"
        << "circle_period = " << num(c.circle_period) << "\n"
        << "initial_rate = " << num(c.initial_rate[0]) << "," << num(c.initial_rate[1]) << ","
        << num(c.initial_rate[2]) << "\n\n"
        << "[output]\n"
        << "dir = " << c.output_dir << "\n";
}

/// Config resolution: explicit path, else $FCW_CONFIG, else shipped defaults.
inline WorkbenchConfig resolve(const std::string& explicit_path) {
    if (!explicit_path.empty()) return load_file(explicit_path);
    if (const char* env = std::getenv("FCW_CONFIG"); env && *env) return load_file(env);
    return WorkbenchConfig{};
}

}  // namespace fcw::cfg
