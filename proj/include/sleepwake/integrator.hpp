#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sleepwake/model.hpp"

namespace sleepwake {

struct SimulationConfig {
    double t_start = 0.0;
    double t_end = 216.0;           // hours
    double step = 0.002;            // hours
    double transient_discard = 48.0;
    int record_stride = 1;          // samples kept every stride steps
    bool clamp_warnings = true;     // warn when a concentration dips < -1e-3
    double rem_threshold = 0.5;

    // REM dormancy guard. The oscillator's rest state is exactly invariant,
    // so a small envelope floor keeps a dormant remnant alive for the next
    // sleep bout; wake onset switches the oscillation off down to that floor.
    double rem_floor = 0.03;
    bool rem_wake_shutdown = true;

    bool operator==(const SimulationConfig&) const = default;
};

enum class EventKind { ForceWake, ForceSleep, KnockoutOn, KnockoutOff };

std::string to_string(EventKind kind);

struct PerturbationEvent {
    double time = 0.0;              // hours, absolute
    EventKind kind = EventKind::ForceWake;
    double factor = 0.0;            // knockout events only
    bool operator==(const PerturbationEvent&) const = default;
    auto operator<=>(const PerturbationEvent&) const = default;
};

using PerturbationSchedule = std::vector<PerturbationEvent>;

/// Immutable record of one simulation run. Samples are uniformly spaced at
/// step * record_stride; the final state is always recorded.
struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<BehavioralState> behavior;
    std::vector<bool> transient;    // inside the discard window

    SimulationConfig config;
    std::string params_fingerprint;
    PerturbationSchedule events;
    std::map<std::string, int> warnings;  // variable name -> count

    size_t size() const { return times.size(); }
    const StateVector& final_state() const { return states.back(); }
    double final_time() const { return times.back(); }
};

/// One classical fourth-order Runge-Kutta update: stages at t, t+h/2, t+h/2,
/// t+h with weights 1/6, 1/3, 1/3, 1/6. Throws NonFiniteStateError if any
/// stage evaluation yields NaN/Inf.
template <typename Rhs>
StateVector rk4_step(Rhs&& rhs, const StateVector& state, double t, double h);

/// Integrates full_rhs over [t_start, t_end]. Events snap to the nearest step
/// boundary and apply before the step departing that time. Samples within the
/// transient window are flagged but retained.
Trajectory simulate(const ModelParameters& params, const SimulationConfig& config,
                    const StateVector& initial,
                    const PerturbationSchedule& schedule = {});

/// Continues integration from the trajectory's final sample with identical
/// config and parameter set for `additional` hours.
Trajectory resume(const Trajectory& trajectory, const ModelParameters& params,
                  double additional, const PerturbationSchedule& schedule = {});

// --- implementation ---

namespace detail {
[[noreturn]] void throw_non_finite(double t, const std::array<double, kNumVars>& v);

inline void check_finite(double t, const std::array<double, kNumVars>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) throw_non_finite(t, v);
    }
}
}  // namespace detail

template <typename Rhs>
StateVector rk4_step(Rhs&& rhs, const StateVector& state, double t, double h) {
    const std::array<double, kNumVars> y = state.to_array();

    const std::array<double, kNumVars> d1 = rhs(state);
    detail::check_finite(t, d1);

    std::array<double, kNumVars> tmp{};
    for (int i = 0; i < kNumVars; ++i) tmp[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] + 0.5 * h * d1[static_cast<size_t>(i)];
    const std::array<double, kNumVars> d2 = rhs(StateVector::from_array(tmp));
    detail::check_finite(t + 0.5 * h, d2);

    for (int i = 0; i < kNumVars; ++i) tmp[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] + 0.5 * h * d2[static_cast<size_t>(i)];
    const std::array<double, kNumVars> d3 = rhs(StateVector::from_array(tmp));
    detail::check_finite(t + 0.5 * h, d3);

    for (int i = 0; i < kNumVars; ++i) tmp[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] + h * d3[static_cast<size_t>(i)];
    const std::array<double, kNumVars> d4 = rhs(StateVector::from_array(tmp));
    detail::check_finite(t + h, d4);

    std::array<double, kNumVars> out{};
    for (int i = 0; i < kNumVars; ++i) {
        const auto k = static_cast<size_t>(i);
        out[k] = y[k] + (h / 6.0) * (d1[k] + 2.0 * d2[k] + 2.0 * d3[k] + d4[k]);
    }
    return StateVector::from_array(out);
}

}  // namespace sleepwake
