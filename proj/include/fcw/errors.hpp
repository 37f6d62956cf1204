#pragma once

#include <stdexcept>
#include <string>

namespace fcw {

/// Pole on the evaluation axis or other ill-posed frequency-domain query.
struct EvaluationError : std::runtime_error {
    explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

/// Degenerate interconnection (identically zero denominator and the like).
struct CompositionError : std::runtime_error {
    explicit CompositionError(const std::string& what) : std::runtime_error(what) {}
};

struct DiscretizationError : std::runtime_error {
    explicit DiscretizationError(const std::string& what) : std::runtime_error(what) {}
};

/// Acceleration command outside the convertible region (near free fall, etc).
struct ConversionError : std::runtime_error {
    explicit ConversionError(const std::string& what) : std::runtime_error(what) {}
};

/// Simulation left its validity envelope (tilt abort).
struct VehicleAbort : std::runtime_error {
    explicit VehicleAbort(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SweepError : std::runtime_error {
    explicit SweepError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fcw
