#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fcw/errors.hpp"

namespace fcw::linsys {

using Complex = std::complex<double>;

/// Dense real polynomial, coefficients in descending powers.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline Poly poly_add(const Poly& a, const Poly& b) {
    const std::size_t n = std::max(a.size(), b.size());
    Poly out(n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
    return out;
}

/// Drop exact leading zeros, keeping at least one coefficient.
inline Poly poly_trim(Poly p) {
    std::size_t lead = 0;
    while (lead + 1 < p.size() && p[lead] == 0.0) ++lead;
    p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(lead));
    return p;
}

inline Complex poly_eval(const Poly& p, Complex s) {
    Complex acc = 0.0;
    for (double c : p) acc = acc * s + c;
    return acc;
}

/**
 * Real-rational SISO transfer function in s.
 *
 * Improper functions are representable (relative degree may be negative);
 * only discretization requires properness. No automatic pole/zero
 * cancellation is performed: exact common factors introduced by composition
 * stay in place until the caller decides otherwise.
 */
class TransferFunction {
public:
    TransferFunction() : num_{0.0}, den_{1.0} {}

    TransferFunction(Poly num, Poly den) : num_(poly_trim(std::move(num))), den_(std::move(den)) {
        if (num_.empty() || den_.empty())
            throw std::invalid_argument("TransferFunction: empty coefficient list");
        if (den_[0] == 0.0)
            throw std::invalid_argument("TransferFunction: leading denominator coefficient is zero");
    }

    static TransferFunction constant(double k) { return TransferFunction({k}, {1.0}); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    int degree_num() const { return num_is_zero() ? 0 : static_cast<int>(num_.size()) - 1; }
    int degree_den() const { return static_cast<int>(den_.size()) - 1; }

    /// deg(den) - deg(num); negative for improper functions such as Pn^-1.
    int relative_degree() const { return degree_den() - degree_num(); }

    bool num_is_zero() const {
        return std::all_of(num_.begin(), num_.end(), [](double c) { return c == 0.0; });
    }

    double dc_gain() const {
        const double d0 = den_.back();
        if (d0 == 0.0) throw EvaluationError("dc_gain: pole at s = 0");
        return num_.back() / d0;
    }

private:
    Poly num_, den_;
};

/// Substitute s = j*omega. Throws EvaluationError on a pole within tolerance.
inline Complex freq_eval(const TransferFunction& tf, double omega) {
    if (omega < 0.0) throw std::invalid_argument("freq_eval: omega must be nonnegative");
    const Complex s(0.0, omega);
    const Complex d = poly_eval(tf.den(), s);
    double den_scale = 0.0;
    for (double c : tf.den()) den_scale = std::max(den_scale, std::abs(c));
    if (std::abs(d) < 1e-12 * den_scale)
        throw EvaluationError("freq_eval: pole on the imaginary axis near omega");
    return poly_eval(tf.num(), s) / d;
}

enum class Compose { series, parallel, negative_feedback };

/**
 * Polynomial interconnection of two transfer functions. negative_feedback
 * closes a/(1 + a*b). Exact over the coefficient field; no cancellation.
 */
inline TransferFunction compose(const TransferFunction& a, const TransferFunction& b,
                                Compose mode) {
    Poly num, den;
    switch (mode) {
        case Compose::series:
            num = poly_mul(a.num(), b.num());
            den = poly_mul(a.den(), b.den());
            break;
        case Compose::parallel:
            num = poly_add(poly_mul(a.num(), b.den()), poly_mul(b.num(), a.den()));
            den = poly_mul(a.den(), b.den());
            break;
        case Compose::negative_feedback:
            num = poly_mul(a.num(), b.den());
            den = poly_add(poly_mul(a.den(), b.den()), poly_mul(a.num(), b.num()));
            break;
    }
    den = poly_trim(den);
    if (den.size() == 1 && den[0] == 0.0)
        throw CompositionError("compose: interconnection denominator is identically zero");
    return TransferFunction(std::move(num), std::move(den));
}

/**
 * Discrete-time realization in z^-1 with a direct-form II transposed state.
 * den[0] is normalized to 1 at construction.
 */
class DiscreteFilter {
public:
    DiscreteFilter(Poly b, Poly a, double dt) : b_(std::move(b)), a_(std::move(a)), dt_(dt) {
        if (b_.empty() || a_.empty() || a_[0] == 0.0)
            throw std::invalid_argument("DiscreteFilter: bad coefficients");
        if (dt_ <= 0.0) throw std::invalid_argument("DiscreteFilter: dt must be positive");
        const double a0 = a_[0];
        for (double& c : b_) c /= a0;
        for (double& c : a_) c /= a0;
        const std::size_t order = std::max(b_.size(), a_.size()) - 1;
        b_.resize(order + 1, 0.0);
        a_.resize(order + 1, 0.0);
        state_.assign(order, 0.0);
    }

    const Poly& num() const { return b_; }
    const Poly& den() const { return a_; }
    double dt() const { return dt_; }
    const std::vector<double>& state() const { return state_; }

    void reset() { std::fill(state_.begin(), state_.end(), 0.0); }

    /// One difference-equation advance.
    double step(double u) {
        const double y = b_[0] * u + (state_.empty() ? 0.0 : state_[0]);
        for (std::size_t i = 0; i + 1 < state_.size(); ++i)
            state_[i] = b_[i + 1] * u - a_[i + 1] * y + state_[i + 1];
        if (!state_.empty()) state_.back() = b_.back() * u - a_.back() * y;
        return y;
    }

    double dc_gain() const {
        double sb = 0.0, sa = 0.0;
        for (double c : b_) sb += c;
        for (double c : a_) sa += c;
        return sb / sa;
    }

private:
    Poly b_, a_;
    double dt_;
    std::vector<double> state_;
};

/**
 * Tustin substitution s <- (2/dt)(1 - z^-1)/(1 + z^-1), no prewarping.
 * Requires a proper function; improper ones must be pre-multiplied by a
 * Q-filter of sufficient relative degree first.
 */
inline DiscreteFilter discretize_bilinear(const TransferFunction& tf, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("discretize_bilinear: dt must be positive");
    if (tf.relative_degree() < 0)
        throw DiscretizationError(
            "discretize_bilinear: improper transfer function; pre-multiply by a Q-filter "
            "so the product is proper");

    const int n = tf.degree_den();
    Poly num(tf.num());
    num.insert(num.begin(), static_cast<std::size_t>(n + 1) - num.size(), 0.0);
    const Poly& den = tf.den();

    // (1 - z)^k (1 + z)^(n-k) expansion, z standing for z^-1.
    auto binom_pow = [](double c0, double c1, int k) {
        Poly p{1.0};
        for (int i = 0; i < k; ++i) {
            Poly q(p.size() + 1, 0.0);
            for (std::size_t j = 0; j < p.size(); ++j) {
                q[j] += c0 * p[j];
                q[j + 1] += c1 * p[j];
            }
            p = std::move(q);
        }
        return p;
    };

    const double k = 2.0 / dt;
    Poly b(static_cast<std::size_t>(n) + 1, 0.0), a(static_cast<std::size_t>(n) + 1, 0.0);
    double kpow = 1.0;  // k^(n-i), built from i = n downwards
    for (int i = n; i >= 0; --i) {
        const Poly term = poly_mul(binom_pow(1.0, -1.0, n - i), binom_pow(1.0, 1.0, i));
        for (std::size_t j = 0; j < term.size(); ++j) {
            b[j] += num[static_cast<std::size_t>(i)] * kpow * term[j];
            a[j] += den[static_cast<std::size_t>(i)] * kpow * term[j];
        }
        kpow *= k;
    }
    // Enforce the exact s=0 <-> z=1 correspondence: the expansion sums cancel
    // at z=1 only in exact arithmetic, so fold the rounding residue into the
    // last numerator coefficient (after normalization, which re-rounds).
    const double a0 = a[0];
    for (double& c : a) c /= a0;
    for (double& c : b) c /= a0;
    if (den.back() != 0.0) {
        const double dc = num.back() / den.back();
        for (int pass = 0; pass < 2; ++pass) {
            double sa = 0.0, sb = 0.0;
            for (double c : a) sa += c;
            for (double c : b) sb += c;
            b.back() -= sb - dc * sa;
        }
    }
    return DiscreteFilter(std::move(b), std::move(a), dt);
}

/// Per-frequency complex samples over a strictly increasing grid.
class FrequencyResponse {
public:
    FrequencyResponse(std::vector<double> grid, std::vector<Complex> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (grid_.size() != values_.size())
            throw std::invalid_argument("FrequencyResponse: grid/value length mismatch");
        for (std::size_t i = 1; i < grid_.size(); ++i)
            if (grid_[i] <= grid_[i - 1])
                throw std::invalid_argument("FrequencyResponse: grid must be strictly increasing");
    }

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<Complex>& values() const { return values_; }
    std::size_t size() const { return grid_.size(); }

private:
    std::vector<double> grid_;
    std::vector<Complex> values_;
};

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("log_grid: bad range");
    std::vector<double> g(n);
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                        static_cast<double>(n - 1));
    return g;
}

inline FrequencyResponse sample_response(const TransferFunction& tf,
                                         const std::vector<double>& grid) {
    std::vector<Complex> vals;
    vals.reserve(grid.size());
    for (double w : grid) vals.push_back(freq_eval(tf, w));
    return FrequencyResponse(grid, std::move(vals));
}

}  // namespace fcw::linsys
