#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <vector>

#include "fcw/dob.hpp"
#include "fcw/errors.hpp"
#include "fcw/linsys.hpp"
#include "fcw/vehicle.hpp"

namespace fcw::robust {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using linsys::TransferFunction;

enum class Channel { xy, z };
enum class WDeltaForm { exact, rational };
enum class WjForm { pd, paper };

/// Per-channel uncertainty bounds and weight-shape selections.
struct UncertaintyModel {
    double delta_max = 0.12;     // s, |delay| bound
    double k_delta_max = 0.1;    // gain-error bound
    double j_delta_max = 0.3;    // inertia-error bound
    WDeltaForm w_delta = WDeltaForm::exact;
    WjForm wj_form = WjForm::pd;
    double i_gain = 0.0;         // integral gain of the paper-form W_J denominator
    int j_grid_points = 61;      // envelope maximization grid over J_delta

    void validate() const {
        if (delta_max < 0.0 || k_delta_max < 0.0 || j_delta_max < 0.0 || j_delta_max >= 1.0)
            throw std::invalid_argument("UncertaintyModel: bounds out of range");
    }
};

/// max over |delta| <= delta_max of |e^{-j w delta} - 1| = 2|sin(w delta/2)|, capped at 2.
inline double w_delta_exact(double delta_max, double omega) {
    if (delta_max < 0.0) throw std::invalid_argument("w_delta_exact: negative delay bound");
    const double x = omega * delta_max;
    if (x >= M_PI) return 2.0;
    return 2.0 * std::abs(std::sin(x / 2.0));
}

/// The fitted rational upper bound of the delay set for delta_max = 0.12 s.
inline TransferFunction w_delta_rational() {
    return TransferFunction({2.015, 52.88, 431.6, 0.415}, {1.0, 36.7, 606.8, 3521.0});
}

inline double w_delta_value(const UncertaintyModel& u, double omega) {
    if (u.w_delta == WDeltaForm::exact) return w_delta_exact(u.delta_max, omega);
    return std::abs(linsys::freq_eval(w_delta_rational(), omega));
}

/**
 * Inertia-uncertainty envelope at one frequency: the maximum relative gap
 * between the perturbed and nominal attitude loops over the J_delta interval,
 * maximized on a parameter grid rather than assuming endpoint extremality.
 * The pd form follows the implemented PD closed loop; the paper form keeps the
 * printed s^3 / PID shape with a configurable integral gain.
 */
inline double w_j_envelope(double j_bar, double j_delta_max, double d_gain, double p_gain,
                           double omega, WjForm form = WjForm::pd, double i_gain = 0.0,
                           int grid_points = 61) {
    if (!(j_bar > 0.0)) throw std::invalid_argument("w_j_envelope: j_bar must be positive");
    if (j_delta_max < 0.0 || j_delta_max >= 1.0)
        throw std::invalid_argument("w_j_envelope: j_delta_max must lie in [0, 1)");
    if (j_delta_max == 0.0) return 0.0;
    const Complex s(0.0, omega);
    const Complex s2 = s * s, s3 = s2 * s;
    double best = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double jd =
            -j_delta_max + 2.0 * j_delta_max * static_cast<double>(k) / (grid_points - 1);
        Complex num, den;
        if (form == WjForm::pd) {
            num = -j_bar * jd * s2;
            den = j_bar * (1.0 + jd) * s2 + d_gain * s + p_gain;
        } else {
            num = -j_bar * jd * s3;
            den = j_bar * (1.0 + jd) * s3 + d_gain * s2 + p_gain * s + i_gain;
        }
        if (std::abs(den) == 0.0) continue;
        best = std::max(best, std::abs(num / den));
    }
    return best;
}

inline linsys::FrequencyResponse w_j_response(double j_bar, double j_delta_max, double d_gain,
                                              double p_gain, const std::vector<double>& grid,
                                              WjForm form = WjForm::pd, double i_gain = 0.0,
                                              int grid_points = 61) {
    std::vector<Complex> vals;
    vals.reserve(grid.size());
    for (double w : grid)
        vals.emplace_back(w_j_envelope(j_bar, j_delta_max, d_gain, p_gain, w, form, i_gain,
                                       grid_points),
                          0.0);
    return linsys::FrequencyResponse(grid, std::move(vals));
}

/**
 * M11 of the DOB loop's upper-LFT description with block order
 * (Delta_delta, Delta_K, Delta_J); the Z channel drops the J block (W_J,3 = 0).
 * Satisfies det(I - M11 Delta) = 1 + q((1+wd dd)(1+wk dk)(1+wj dj) - 1),
 * the closed loop's characteristic function.
 */
inline MatrixXcd assemble_m11(Channel channel, Complex q, double wd, double wk, double wj) {
    if (channel == Channel::xy) {
        MatrixXcd m(3, 3);
        m << -q * wd, -q * wd, -q * wd,
             (1.0 - q) * wk, -q * wk, -q * wk,
             (1.0 - q) * wj, (1.0 - q) * wj, -q * wj;
        return m;
    }
    MatrixXcd m(2, 2);
    m << -q * wd, -q * wd,
         (1.0 - q) * wk, -q * wk;
    return m;
}

inline double sigma_max(const MatrixXcd& m) {
    return Eigen::JacobiSVD<MatrixXcd>(m).singularValues()(0);
}

inline double spectral_radius(const MatrixXcd& m) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct MuOptions {
    int max_iterations = 200;
    double rel_tol = 1e-8;
};

struct MuBound {
    double value = 0.0;
    bool converged = true;
};

/**
 * Upper bound on the structured singular value for scalar complex blocks:
 * inf over positive diagonal scalings D (last entry pinned to 1) of
 * sigma_max(D M D^-1), minimized by coordinate descent on the log scales.
 * Exact for two blocks and near-tight for three.
 */
inline MuBound mu_upper_bound(const MatrixXcd& m, const MuOptions& opt = {}) {
    const int n = static_cast<int>(m.rows());
    if (n != m.cols() || n < 1) throw std::invalid_argument("mu_upper_bound: square matrix required");
    if (n == 1) return {std::abs(m(0, 0)), true};

    Eigen::VectorXd log_d = Eigen::VectorXd::Zero(n - 1);
    auto value_at = [&](const Eigen::VectorXd& ld) {
        MatrixXcd scaled = m;
        for (int i = 0; i < n; ++i) {
            const double di = i < n - 1 ? std::exp(ld(i)) : 1.0;
            for (int j = 0; j < n; ++j) {
                const double dj = j < n - 1 ? std::exp(ld(j)) : 1.0;
                scaled(i, j) = m(i, j) * (di / dj);
            }
        }
        return sigma_max(scaled);
    };

    double best = value_at(log_d);
    double step = 0.5;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        bool improved = false;
        for (int i = 0; i < n - 1; ++i) {
            for (double sgn : {1.0, -1.0}) {
                Eigen::VectorXd trial = log_d;
                trial(i) += sgn * step;
                const double v = value_at(trial);
                if (v < best - opt.rel_tol * std::abs(best)) {
                    best = v;
                    log_d = trial;
                    improved = true;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
            if (step < 1e-6) return {best, true};
        }
    }
    return {best, false};
}

/// Everything the frequency-domain analysis needs about the plant and filters.
struct AnalysisSetup {
    veh::VehicleParams nominal{};
    dob::QFilterConfig qcfg{};
    UncertaintyModel uncertainty{};
    std::vector<double> grid = linsys::log_grid(1e-2, 1e3, 400);

    double attitude_j() const { return nominal.inertia[1]; }
    double attitude_d() const { return nominal.d_gain[1]; }
    double attitude_p() const { return nominal.p_gain[1]; }
};

inline TransferFunction q_filter_for(Channel channel, double tau, const dob::QFilterConfig& qcfg) {
    return channel == Channel::xy ? dob::q_horizontal(tau, qcfg.zeta, qcfg.damping)
                                  : dob::q_vertical(tau);
}

inline double w_j_for(Channel channel, const AnalysisSetup& s, double omega) {
    if (channel == Channel::z) return 0.0;
    return w_j_envelope(s.attitude_j(), s.uncertainty.j_delta_max, s.attitude_d(),
                        s.attitude_p(), omega, s.uncertainty.wj_form, s.uncertainty.i_gain,
                        s.uncertainty.j_grid_points);
}

struct MuResult {
    std::vector<double> grid;
    std::vector<double> mu_upper;
    double peak = 0.0;
    double peak_omega = 0.0;
    bool stable = false;
    bool converged = true;
};

/// Per-frequency mu upper bound for the channel at Q time constant tau.
inline MuResult check_stability(Channel channel, double tau, const AnalysisSetup& s) {
    if (!(tau > 0.0)) throw std::invalid_argument("check_stability: tau must be positive");
    s.uncertainty.validate();
    const TransferFunction q = q_filter_for(channel, tau, s.qcfg);
    MuResult out;
    out.grid = s.grid;
    out.mu_upper.reserve(s.grid.size());
    for (double w : s.grid) {
        const MatrixXcd m = assemble_m11(channel, linsys::freq_eval(q, w),
                                         w_delta_value(s.uncertainty, w),
                                         s.uncertainty.k_delta_max, w_j_for(channel, s, w));
        const MuBound b = mu_upper_bound(m);
        out.converged = out.converged && b.converged;
        out.mu_upper.push_back(b.value);
        if (b.value > out.peak) {
            out.peak = b.value;
            out.peak_omega = w;
        }
    }
    out.stable = out.peak < 1.0;
    return out;
}

struct SgtResult {
    std::vector<double> grid;
    std::vector<double> product;  // |Q| * W_l per frequency
    double peak = 0.0;
    double peak_omega = 0.0;
    bool stable = false;
};

/// Small-gain check with the lumped multiplicative bound
/// W_l = (1+w_J)(1+w_K)(1+w_delta) - 1.
inline SgtResult sgt_check(Channel channel, double tau, const AnalysisSetup& s) {
    if (!(tau > 0.0)) throw std::invalid_argument("sgt_check: tau must be positive");
    const TransferFunction q = q_filter_for(channel, tau, s.qcfg);
    SgtResult out;
    out.grid = s.grid;
    out.product.reserve(s.grid.size());
    for (double w : s.grid) {
        const double wl = (1.0 + w_j_for(channel, s, w)) * (1.0 + s.uncertainty.k_delta_max) *
                              (1.0 + w_delta_value(s.uncertainty, w)) -
                          1.0;
        const double v = std::abs(linsys::freq_eval(q, w)) * wl;
        out.product.push_back(v);
        if (v > out.peak) {
            out.peak = v;
            out.peak_omega = w;
        }
    }
    out.stable = out.peak < 1.0;
    return out;
}

enum class Criterion { mu, sgt };

inline double peak_for(Criterion c, Channel channel, double tau, const AnalysisSetup& s) {
    return c == Criterion::mu ? check_stability(channel, tau, s).peak
                              : sgt_check(channel, tau, s).peak;
}

struct SweepResult {
    std::vector<double> taus;
    std::vector<double> peak_mu;
    std::vector<double> peak_sgt;
    double tau_star_mu = 0.0;
    double tau_star_sgt = 0.0;
    bool converged = true;
};

/**
 * Smallest stable tau under each criterion: coarse curves over `steps` points,
 * then bisection on the peak = 1 crossing. Throws SweepError when a criterion
 * does not change verdict inside the range.
 */
inline SweepResult tau_sweep(Channel channel, double tau_min, double tau_max, int steps,
                             const AnalysisSetup& s) {
    if (!(tau_min > 0.0) || !(tau_max > tau_min))
        throw std::invalid_argument("tau_sweep: range must be positive and increasing");
    if (steps < 2) throw std::invalid_argument("tau_sweep: steps must be at least 2");

    SweepResult out;
    out.taus.resize(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        out.taus[static_cast<std::size_t>(i)] =
            tau_min + (tau_max - tau_min) * static_cast<double>(i) / (steps - 1);
    for (double tau : out.taus) {
        const MuResult mr = check_stability(channel, tau, s);
        out.converged = out.converged && mr.converged;
        out.peak_mu.push_back(mr.peak);
        out.peak_sgt.push_back(sgt_check(channel, tau, s).peak);
    }

    auto bisect = [&](Criterion c) {
        double lo = tau_min, hi = tau_max;
        const double f_lo = peak_for(c, channel, lo, s), f_hi = peak_for(c, channel, hi, s);
        if (!(f_lo > 1.0) || !(f_hi < 1.0))
            throw SweepError("tau_sweep: stability boundary not bracketed by the tau range");
        for (int i = 0; i < 40 && (hi - lo) > 1e-5 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (peak_for(c, channel, mid, s) < 1.0 ? hi : lo) = mid;
        }
        return hi;
    };
    out.tau_star_mu = bisect(Criterion::mu);
    out.tau_star_sgt = bisect(Criterion::sgt);
    return out;
}

/// Uniform sample of an admissible structured Delta (scalar complex blocks, |d_i| <= 1).
inline VectorXcd sample_admissible(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    VectorXcd d(n);
    for (int i = 0; i < n; ++i) {
        const double r = std::sqrt(unit(rng));
        const double ph = 2.0 * M_PI * unit(rng);
        d(i) = Complex(r * std::cos(ph), r * std::sin(ph));
    }
    return d;
}

inline Complex det_i_minus_md(const MatrixXcd& m, const VectorXcd& d) {
    const int n = static_cast<int>(m.rows());
    MatrixXcd a = MatrixXcd::Identity(n, n) - m * d.asDiagonal();
    return a.determinant();
}

/// Smallest |det(I - M Delta)| over random admissible samples (stable-side check).
inline double min_abs_det_over_samples(const MatrixXcd& m, int draws, std::mt19937_64& rng) {
    double best = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(m.rows());
    for (int i = 0; i < draws; ++i)
        best = std::min(best, std::abs(det_i_minus_md(m, sample_admissible(rng, n))));
    return best;
}

struct Destabilizer {
    VectorXcd delta;
    double sigma = 0.0;  // max singular value = max |delta_i|
};

/**
 * Searches for an admissible Delta that makes I - M Delta singular: random
 * phase directions, then the exact complex scaling along each direction from
 * the roots of det(I - t M diag(phase)) (degree <= 3 polynomial in t).
 */
inline std::optional<Destabilizer> find_destabilizing(const MatrixXcd& m, int max_draws,
                                                      std::mt19937_64& rng) {
    const int n = static_cast<int>(m.rows());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::optional<Destabilizer> best;
    for (int draw = 0; draw < max_draws; ++draw) {
        VectorXcd phase(n);
        for (int i = 0; i < n; ++i) {
            const double ph = 2.0 * M_PI * unit(rng);
            phase(i) = Complex(std::cos(ph), std::sin(ph));
        }
        const MatrixXcd md = m * phase.asDiagonal();
        // det(I - t MD) = 1 - e1 t + e2 t^2 - e3 t^3 (principal minors of MD).
        std::vector<Complex> poly{1.0};
        const Complex e1 = md.trace();
        poly.push_back(-e1);
        if (n >= 2) {
            Complex e2 = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) e2 += md(i, i) * md(j, j) - md(i, j) * md(j, i);
            poly.push_back(e2);
        }
        if (n >= 3) poly.push_back(-md.determinant());
        // roots via the companion matrix of the monic reversal
        const int deg = static_cast<int>(poly.size()) - 1;
        if (std::abs(poly[static_cast<std::size_t>(deg)]) < 1e-300) continue;
        MatrixXcd comp = MatrixXcd::Zero(deg, deg);
        for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < deg; ++i)
            comp(i, deg - 1) = -poly[static_cast<std::size_t>(i)] / poly[static_cast<std::size_t>(deg)];
        Eigen::ComplexEigenSolver<MatrixXcd> es(comp, false);
        for (int i = 0; i < deg; ++i) {
            const Complex t = es.eigenvalues()(i);
            const double sigma = std::abs(t);
            if (sigma <= 1.0 && (!best || sigma < best->sigma)) {
                Destabilizer cand;
                cand.delta = (phase.array() * t).matrix();
                cand.sigma = sigma;
                best = cand;
            }
        }
        if (best && best->sigma < 1.0) return best;  // first admissible hit suffices
    }
    return best;
}

}  // namespace fcw::robust
