#pragma once

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fcw/config.hpp"
#include "fcw/io.hpp"

namespace fcw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAbort = 2;

namespace detail {

inline std::string scenario_name(sim::Trajectory t) {
    switch (t) {
        case sim::Trajectory::hover: return "hover";
        case sim::Trajectory::circle: return "circle";
        case sim::Trajectory::accel_profile: return "accel-profile";
    }
    return "unknown";
}

inline std::filesystem::path ensure_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

inline robust::Channel parse_channel(const std::string& s) {
    if (s == "xy") return robust::Channel::xy;
    if (s == "z") return robust::Channel::z;
    throw ConfigError("channel must be xy or z");
}

inline double channel_tau_default(robust::Channel ch, const cfg::WorkbenchConfig& c) {
    return ch == robust::Channel::xy ? c.qfilter.tau1 : c.qfilter.tau2;
}

inline void apply_wj_form(cfg::WorkbenchConfig& c, const std::string& wj) {
    if (wj.empty()) return;
    if (wj == "pd") c.uncertainty.wj_form = robust::WjForm::pd;
    else if (wj == "paper") c.uncertainty.wj_form = robust::WjForm::paper;
    else throw ConfigError("--wj-form must be pd or paper");
}

inline void apply_q_form(cfg::WorkbenchConfig& c, const std::string& q) {
    if (q.empty()) return;
    if (q == "critical") c.qfilter.damping = dob::QDamping::critical;
    else if (q == "standard") c.qfilter.damping = dob::QDamping::standard;
    else if (q == "literal") c.qfilter.damping = dob::QDamping::literal;
    else throw ConfigError("--q-form must be critical, standard or literal");
}

}  // namespace detail

inline int cmd_sim(const cfg::WorkbenchConfig& base, const std::string& out_dir) {
    const auto dir = detail::ensure_dir(out_dir);
    const sim::ScenarioConfig scenario = base.scenario();
    const sim::RunLog log = sim::run(scenario);

    const std::string stem =
        detail::scenario_name(scenario.trajectory) + "_dob_" + (scenario.dob_on ? "on" : "off");
    {
        auto f = io::open_out((dir / (stem + ".csv")).string());
        io::write_runlog_csv(log, f);
    }
    if (log.aborted) {
        std::cerr << "fcw sim: vehicle abort: " << log.abort_reason << " (partial log retained)\n";
        return kExitAbort;
    }
    const sim::Metrics m = sim::metrics(log, scenario.metric_skip);
    {
        auto f = io::open_out((dir / "metrics.txt").string());
        io::write_metrics_text(m, f);
    }
    {
        auto f = io::open_out((dir / "metrics.csv").string());
        io::write_metrics_csv(m, f);
    }
    std::cout << "wrote " << (dir / (stem + ".csv")).string() << "\n";
    io::write_metrics_text(m, std::cout);
    return kExitOk;
}

inline int cmd_analyze(const cfg::WorkbenchConfig& c, robust::Channel channel, double tau,
                       const std::string& out_dir) {
    const robust::AnalysisSetup setup = c.analysis();
    const robust::MuResult mu = robust::check_stability(channel, tau, setup);
    const robust::SgtResult sgt = robust::sgt_check(channel, tau, setup);

    const auto dir = detail::ensure_dir(out_dir);
    const std::string name = channel == robust::Channel::xy ? "xy" : "z";
    {
        auto f = io::open_out((dir / ("analyze_" + name + ".csv")).string());
        io::write_mu_curves_csv(mu, sgt, f);
    }
    std::cout << "channel=" << name << " tau=" << io::fmt(tau)
              << " stable=" << (mu.stable ? "true" : "false") << " peak_mu=" << io::fmt(mu.peak)
              << " peak_mu_omega=" << io::fmt(mu.peak_omega) << " peak_sgt=" << io::fmt(sgt.peak)
              << " sgt_stable=" << (sgt.stable ? "true" : "false")
              << " converged=" << (mu.converged ? "true" : "false") << "\n";
    if (!mu.converged)
        std::cout << "diagnostic=mu-scaling-not-converged (best bound reported)\n";
    return kExitOk;
}

inline int cmd_sweep(cfg::WorkbenchConfig c, robust::Channel channel, double tau_min,
                     double tau_max, int steps, const std::string& out_dir) {
    const auto dir = detail::ensure_dir(out_dir);
    const std::string name = channel == robust::Channel::xy ? "xy" : "z";

    const robust::SweepResult active = robust::tau_sweep(channel, tau_min, tau_max, steps, c.analysis());
    {
        auto f = io::open_out((dir / ("sweep_" + name + ".csv")).string());
        io::write_sweep_csv(active, f);
    }
    const char* active_name = c.uncertainty.wj_form == robust::WjForm::pd ? "pd" : "paper";
    std::cout << "channel=" << name << " wj_form=" << active_name
              << " tau_star_mu=" << io::fmt(active.tau_star_mu)
              << " tau_star_sgt=" << io::fmt(active.tau_star_sgt) << "\n";

    // The alternate W_J shape is always reported alongside for comparison.
    cfg::WorkbenchConfig alt = c;
    alt.uncertainty.wj_form = c.uncertainty.wj_form == robust::WjForm::pd ? robust::WjForm::paper
                                                                          : robust::WjForm::pd;
    const robust::SweepResult other =
        robust::tau_sweep(channel, tau_min, tau_max, steps, alt.analysis());
    std::cout << "channel=" << name << " wj_form="
              << (alt.uncertainty.wj_form == robust::WjForm::pd ? "pd" : "paper")
              << " tau_star_mu=" << io::fmt(other.tau_star_mu)
              << " tau_star_sgt=" << io::fmt(other.tau_star_sgt) << "\n";
    return kExitOk;
}

inline int cmd_compare_moi(const cfg::WorkbenchConfig& c, const std::vector<double>& j_values,
                           const std::string& out_dir) {
    for (double j : j_values)
        if (!(j > 0.0)) throw ConfigError("compare-moi: J values must be positive");
    const auto dir = detail::ensure_dir(out_dir);
    const auto rows = sim::moi_comparison(j_values, c.scenario());
    {
        auto f = io::open_out((dir / "moi_table.csv").string());
        io::write_moi_table_csv(rows, f);
    }
    io::write_moi_table_csv(rows, std::cout);
    return kExitOk;
}

/// Full command-line front end; returns the process exit code.
inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"multirotor translational-force control workbench"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "configuration file (default: $FCW_CONFIG or built-ins)");

    auto* sim_cmd = app.add_subcommand("sim", "run a closed-loop scenario and write logs/metrics");
    std::string scenario = "hover", converter, dob, disturbance, out_dir;
    double duration = -1.0, j_override = -1.0;
    long long seed = -1;
    sim_cmd->add_option("--scenario", scenario, "hover|circle|accel-profile")
        ->check(CLI::IsMember({"hover", "circle", "accel-profile"}));
    sim_cmd->add_option("--converter", converter, "case1|case2")
        ->check(CLI::IsMember({"case1", "case2"}));
    sim_cmd->add_option("--dob", dob, "on|off")->check(CLI::IsMember({"on", "off"}));
    sim_cmd->add_option("--disturbance", disturbance, "none|sinusoid:...|step:...|pull:...");
    sim_cmd->add_option("--duration", duration, "seconds");
    sim_cmd->add_option("--j", j_override, "plant roll/pitch inertia override");
    sim_cmd->add_option("--seed", seed, "deterministic seed");
    sim_cmd->add_option("--out", out_dir, "output directory");

    auto* an_cmd = app.add_subcommand("analyze", "mu and small-gain stability at one tau");
    std::string channel = "xy", wj_form, q_form;
    double tau = -1.0;
    an_cmd->add_option("--channel", channel, "xy|z")->check(CLI::IsMember({"xy", "z"}));
    an_cmd->add_option("--tau", tau, "Q-filter time constant (s)");
    an_cmd->add_option("--wj-form", wj_form, "pd|paper")->check(CLI::IsMember({"pd", "paper"}));
    an_cmd->add_option("--q-form", q_form, "critical|standard|literal")
        ->check(CLI::IsMember({"critical", "standard", "literal"}));
    an_cmd->add_option("--out", out_dir, "output directory");

    auto* sw_cmd = app.add_subcommand("sweep", "tau boundary under mu and SGT criteria");
    double tau_min = 0.02, tau_max = 0.5;
    int steps = 25;
    sw_cmd->add_option("--channel", channel, "xy|z")->check(CLI::IsMember({"xy", "z"}));
    sw_cmd->add_option("--tau-min", tau_min, "range start (s)");
    sw_cmd->add_option("--tau-max", tau_max, "range end (s)");
    sw_cmd->add_option("--steps", steps, "curve points")->check(CLI::PositiveNumber);
    sw_cmd->add_option("--wj-form", wj_form, "pd|paper")->check(CLI::IsMember({"pd", "paper"}));
    sw_cmd->add_option("--q-form", q_form, "critical|standard|literal")
        ->check(CLI::IsMember({"critical", "standard", "literal"}));
    sw_cmd->add_option("--out", out_dir, "output directory");

    auto* moi_cmd = app.add_subcommand("compare-moi", "converter comparison across inertia values");
    std::string j_list = "0.1,0.5,1.0";
    moi_cmd->add_option("--j", j_list, "comma-separated inertia list");
    moi_cmd->add_option("--out", out_dir, "output directory");

    std::vector<const char*> argv;
    argv.push_back("fcw");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        cfg::WorkbenchConfig c = cfg::resolve(config_path);
        if (!out_dir.empty()) c.output_dir = out_dir;

        if (sim_cmd->parsed()) {
            if (scenario == "hover") c.trajectory = sim::Trajectory::hover;
            else if (scenario == "circle") c.trajectory = sim::Trajectory::circle;
            else c.trajectory = sim::Trajectory::accel_profile;
            if (!converter.empty()) c.converter = converter == "case1" ? sim::Converter::case1
                                                                       : sim::Converter::case2;
            if (!dob.empty()) c.dob_on = dob == "on";
            if (!disturbance.empty()) c.disturbance = cfg::parse_disturbance(disturbance);
            if (duration > 0.0) c.duration = duration;
            if (c.trajectory == sim::Trajectory::accel_profile && duration <= 0.0) c.duration = 60.0;
            if (seed >= 0) c.seed = static_cast<unsigned long>(seed);
            cfg::WorkbenchConfig run_cfg = c;
            sim::ScenarioConfig s = run_cfg.scenario();
            if (j_override > 0.0) s.j_override = j_override;
            const auto dir = detail::ensure_dir(c.output_dir);
            const sim::RunLog log = sim::run(s);
            const std::string stem = detail::scenario_name(s.trajectory) + "_dob_" +
                                     (s.dob_on ? std::string("on") : std::string("off"));
            {
                auto f = io::open_out((dir / (stem + ".csv")).string());
                io::write_runlog_csv(log, f);
            }
            if (log.aborted) {
                std::cerr << "fcw sim: vehicle abort: " << log.abort_reason
                          << " (partial log retained)\n";
                return kExitAbort;
            }
            const sim::Metrics m = sim::metrics(log, s.metric_skip);
            {
                auto f = io::open_out((dir / "metrics.txt").string());
                io::write_metrics_text(m, f);
            }
            {
                auto f = io::open_out((dir / "metrics.csv").string());
                io::write_metrics_csv(m, f);
            }
            io::write_metrics_text(m, std::cout);
            return kExitOk;
        }

        detail::apply_wj_form(c, wj_form);
        detail::apply_q_form(c, q_form);

        if (an_cmd->parsed()) {
            const robust::Channel ch = detail::parse_channel(channel);
            if (tau <= 0.0) tau = detail::channel_tau_default(ch, c);
            return cmd_analyze(c, ch, tau, c.output_dir);
        }
        if (sw_cmd->parsed()) {
            const robust::Channel ch = detail::parse_channel(channel);
            return cmd_sweep(c, ch, tau_min, tau_max, steps, c.output_dir);
        }
        if (moi_cmd->parsed()) {
            std::vector<double> js;
            std::istringstream ss(j_list);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) js.push_back(std::stod(item));
            if (js.empty()) throw ConfigError("compare-moi: empty J list");
            return cmd_compare_moi(c, js, c.output_dir);
        }
    } catch (const ConfigError& e) {
        std::cerr << "fcw: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SweepError& e) {
        std::cerr << "fcw: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "fcw: " << e.what() << "\n";
        return kExitUsage;
    } catch (const VehicleAbort& e) {
        std::cerr << "fcw: vehicle abort: " << e.what() << "\n";
        return kExitAbort;
    }
    return kExitUsage;
}

}  // namespace fcw::cli
